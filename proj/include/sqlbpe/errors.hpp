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

#include <stdexcept>
#include <string>

namespace sqlbpe {

// Unreadable or malformed input data: corpus files, dataset JSON,
// merge-table files. The CLI maps this to exit code 2.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raw SQL that cannot be tokenized or parsed (unterminated quote,
// unbalanced parentheses). Carries the failing query index when raised
// while processing a corpus. The CLI maps this to exit code 3.
class SqlParseError : public std::runtime_error {
 public:
  explicit SqlParseError(const std::string& what, long query_index = -1)
      : std::runtime_error(what), query_index_(query_index) {}

  // 0-based index of the offending query, or -1 outside corpus context.
  long query_index() const { return query_index_; }

 private:
  long query_index_;
};

// A merged token that cannot be expanded with the given merge table.
// The CLI maps this to exit code 4.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sqlbpe
