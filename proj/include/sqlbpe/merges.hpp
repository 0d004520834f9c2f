// Copyright 2026 The sqlbpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sqlbpe {

enum class TrainMode { plain, ast };

std::string_view to_string(TrainMode mode);

// left + U+241F + right; self-describing, so decode needs no auxiliary
// id map.
std::string merged_name(std::string_view left, std::string_view right);

struct MergeRule {
  std::string left;
  std::string right;
  std::string merged;
  int step_index = 0;  // position in the accepted list
};

// The ordered rule list l plus the vocabulary observed at training time.
// Rule i's merged text never appears as left/right of any earlier rule.
struct MergeTable {
  std::vector<MergeRule> rules;
  std::set<std::string> base_vocabulary;
  TrainMode mode = TrainMode::plain;
  int retention_steps = 20;
  int min_count = 100;
};

}  // namespace sqlbpe
