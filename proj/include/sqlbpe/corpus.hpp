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
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sqlbpe/errors.hpp"

namespace sqlbpe {

// U+241F SYMBOL FOR UNIT SEPARATOR. Reserved for naming merged tokens
// (left + separator + right); forbidden inside raw input tokens. Corpora
// produced by encode legitimately contain it, so the ban is enforced at
// the raw-ingestion boundaries (dataset JSON, trainer inputs), not by
// load_plaintext.
inline constexpr std::string_view kMergeSeparator = "\xe2\x90\x9f";

bool contains_merge_separator(std::string_view text);

// Assigns dense non-negative ids to token texts, first come first served.
// One interner per run keeps ids stable across every corpus it touches.
class TokenInterner {
 public:
  int intern(std::string_view text);
  const std::string& text_of(int id) const { return texts_.at(id); }
  std::size_t size() const { return texts_.size(); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> texts_;
};

struct Token {
  std::string text;  // non-empty, no whitespace
  int id = 0;
};

Token make_token(std::string_view text, TokenInterner& interner);

enum class CorpusRole { train, valid, test };

std::string_view to_string(CorpusRole role);

struct QuerySeq {
  std::vector<Token> tokens;  // length >= 1 after ingestion
  std::string source_id;
};

struct Corpus {
  std::vector<QuerySeq> queries;  // file order, so counting is reproducible
  CorpusRole role = CorpusRole::train;
};

// One sentence of a dataset record: the natural-language text (carried
// through untouched), its question-split key, and placeholder bindings.
struct SentenceEntry {
  std::string text;
  std::string split_key;
  std::vector<std::pair<std::string, std::string>> bindings;  // name, value
};

struct DatasetRecord {
  std::vector<std::string> sql_templates;
  std::vector<SentenceEntry> sentences;
  std::string query_split_key;
  std::vector<std::pair<std::string, std::string>> variables;  // name, type
};

enum class SplitMode { question, query };

// Normalizes raw split-key strings. "train", "valid", "dev" and "test"
// are always understood. Numeric fold ids resolve through the optional
// fold assignments (both must be set); every other numeric fold is a
// training fold. Anything else is rejected with IngestError.
struct SplitKeyMap {
  std::optional<std::string> valid_fold;
  std::optional<std::string> test_fold;

  CorpusRole role_of(const std::string& key) const;
};

struct SplitCorpora {
  Corpus train;
  Corpus valid;
  Corpus test;
};

// One query per line, tokens separated by runs of whitespace. Blank lines
// are skipped; a non-empty line with no tokens is rejected with its line
// number.
Corpus load_plaintext(const std::filesystem::path& path, TokenInterner& interner,
                      CorpusRole role = CorpusRole::train);

// Canonical form: single-space joined tokens, LF line endings, UTF-8.
void save_plaintext(const Corpus& corpus, const std::filesystem::path& path);

// JSON array of records: "sql" (array of strings), "sentences" (array of
// {"text", "question-split", "variables"}), "query-split", "variables"
// (array of {"name", "type"}). Unknown fields are ignored; missing ones
// are reported with the record index.
std::vector<DatasetRecord> load_dataset_json(const std::filesystem::path& path);

// Question mode assigns each (sentence, sql) pair by the sentence's split
// key; query mode assigns all instances of a record by the record's
// query-split key, so no SQL template straddles two corpora. With
// anonymize=true placeholders stay verbatim; otherwise each sentence's
// bindings are substituted into the template.
SplitCorpora build_split(std::span<const DatasetRecord> records, SplitMode mode,
                         bool anonymize, const SplitKeyMap& keys,
                         TokenInterner& interner);

// Token texts occurring at least min_count times across the corpus.
std::set<std::string> vocabulary(const Corpus& corpus, long min_count);

std::unordered_map<std::string, long> token_counts(const Corpus& corpus);

}  // namespace sqlbpe
