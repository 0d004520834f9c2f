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

#include <filesystem>

#include "sqlbpe/corpus.hpp"
#include "sqlbpe/merges.hpp"

namespace sqlbpe {

// Applies rules in table order; each rule replaces the maximal
// non-overlapping left-to-right occurrences of its pair in every query.
// Pure rule application: no AST is consulted, whatever mode the table was
// trained in, and unknown tokens pass through untouched.
Corpus encode(const Corpus& corpus, const MergeTable& table, TokenInterner& interner);

// Recursively expands merged tokens back to base tokens. A token
// containing the reserved separator with no matching rule raises
// DecodeError naming the token.
Corpus decode(const Corpus& corpus, const MergeTable& table, TokenInterner& interner);

// Text format, round-trips exactly:
//   sqlbpe-merges v1 mode=<plain|ast> r=<int> m=<int>
//   <left>\t<right>              (one accepted rule per line, in order)
//   ---
//   <token>                      (base vocabulary, one per line)
void save_table(const MergeTable& table, const std::filesystem::path& path);
MergeTable load_table(const std::filesystem::path& path);

}  // namespace sqlbpe
