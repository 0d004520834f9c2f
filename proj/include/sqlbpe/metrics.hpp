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

#include <cstddef>
#include <set>
#include <string>

#include "sqlbpe/corpus.hpp"

namespace sqlbpe {

struct LengthStats {
  double mean_before = 0.0;
  double mean_after = 0.0;
  double reduction_fraction = 0.0;  // 1 - mean_after / mean_before
};

// Corpora must have equal query counts, index-aligned. Two empty corpora
// yield all-zero stats.
LengthStats length_stats(const Corpus& before, const Corpus& after);

struct OovReport {
  std::set<std::string> tokens;  // vocabulary(valid, 1) \ vocabulary(train, m)
  std::size_t count = 0;
};

OovReport oov_report(const Corpus& train, const Corpus& valid, long min_count);

// Keywords, operators and punctuation that survive pattern abstraction.
const std::set<std::string>& sql_pattern_keywords();

// Schema-abstracted query form: keywords map to themselves, quoted groups
// collapse to a single VALUE, numbers and anonymization placeholders
// (lowercase name with a trailing digit) become VALUE, everything else
// IDENT. Joined with single spaces.
std::string pattern_of(const QuerySeq& query, const std::set<std::string>& keywords = sql_pattern_keywords());

// Fraction of test queries whose pattern never occurs in train.
double unseen_pattern_rate(const Corpus& train, const Corpus& test,
                           const std::set<std::string>& keywords = sql_pattern_keywords());

}  // namespace sqlbpe
