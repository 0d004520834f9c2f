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

#include "sqlbpe/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sqlbpe {

namespace {

using nlohmann::json;

// getline already strips '\n'; everything else whitespace-like splits tokens.
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

std::string record_context(std::size_t record_index) {
  return "record " + std::to_string(record_index);
}

}  // namespace

bool contains_merge_separator(std::string_view text) {
  return text.find(kMergeSeparator) != std::string_view::npos;
}

int TokenInterner::intern(std::string_view text) {
  auto it = ids_.find(std::string(text));
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(texts_.size());
  texts_.emplace_back(text);
  ids_.emplace(texts_.back(), id);
  return id;
}

Token make_token(std::string_view text, TokenInterner& interner) {
  return Token{std::string(text), interner.intern(text)};
}

std::string_view to_string(CorpusRole role) {
  switch (role) {
    case CorpusRole::train: return "train";
    case CorpusRole::valid: return "valid";
    case CorpusRole::test: return "test";
  }
  return "?";
}

CorpusRole SplitKeyMap::role_of(const std::string& key) const {
  if (key == "train") return CorpusRole::train;
  if (key == "valid" || key == "dev") return CorpusRole::valid;
  if (key == "test") return CorpusRole::test;
  if (all_digits(key) && valid_fold && test_fold) {
    if (key == *valid_fold) return CorpusRole::valid;
    if (key == *test_fold) return CorpusRole::test;
    return CorpusRole::train;
  }
  throw IngestError("unknown split value '" + key + "'");
}

Corpus load_plaintext(const std::filesystem::path& path, TokenInterner& interner,
                      CorpusRole role) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus file " + path.string());

  Corpus corpus;
  corpus.role = role;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;  // blank lines skipped
    auto texts = split_whitespace(line);
    if (texts.empty()) {
      throw IngestError(path.string() + ": line " + std::to_string(line_no) +
                        ": no tokens on non-blank line");
    }
    QuerySeq query;
    query.source_id = path.filename().string() + ":" + std::to_string(line_no);
    query.tokens.reserve(texts.size());
    for (const auto& text : texts) query.tokens.push_back(make_token(text, interner));
    corpus.queries.push_back(std::move(query));
  }
  return corpus;
}

void save_plaintext(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write corpus file " + path.string());
  for (const auto& query : corpus.queries) {
    for (std::size_t i = 0; i < query.tokens.size(); ++i) {
      if (i > 0) out << ' ';
      out << query.tokens[i].text;
    }
    out << '\n';
  }
}

std::vector<DatasetRecord> load_dataset_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open dataset file " + path.string());

  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw IngestError("malformed dataset JSON: " + std::string(e.what()));
  }
  if (!root.is_array()) throw IngestError("dataset root must be a JSON array");

  std::vector<DatasetRecord> records;
  records.reserve(root.size());
  for (std::size_t ri = 0; ri < root.size(); ++ri) {
    const json& rec = root[ri];
    if (!rec.is_object()) throw IngestError(record_context(ri) + ": not an object");

    auto require = [&](const json& obj, const char* field, const std::string& ctx) -> const json& {
      auto it = obj.find(field);
      if (it == obj.end()) throw IngestError(ctx + ": missing " + field);
      return *it;
    };

    DatasetRecord out;
    const json& sql = require(rec, "sql", record_context(ri));
    if (!sql.is_array() || sql.empty())
      throw IngestError(record_context(ri) + ": sql must be a non-empty array");
    for (const auto& s : sql) out.sql_templates.push_back(s.get<std::string>());

    out.query_split_key = require(rec, "query-split", record_context(ri)).get<std::string>();

    const json& vars = require(rec, "variables", record_context(ri));
    for (const auto& v : vars) {
      std::string ctx = record_context(ri) + ": variables";
      out.variables.emplace_back(require(v, "name", ctx).get<std::string>(),
                                 require(v, "type", ctx).get<std::string>());
    }

    const json& sentences = require(rec, "sentences", record_context(ri));
    for (std::size_t si = 0; si < sentences.size(); ++si) {
      const json& s = sentences[si];
      std::string ctx = record_context(ri) + ": sentence " + std::to_string(si);
      SentenceEntry entry;
      entry.text = require(s, "text", ctx).get<std::string>();
      entry.split_key = require(s, "question-split", ctx).get<std::string>();
      const json& bindings = require(s, "variables", ctx);
      for (auto it = bindings.begin(); it != bindings.end(); ++it) {
        entry.bindings.emplace_back(it.key(), it.value().get<std::string>());
      }
      // Every bound variable must be declared on the record.
      for (const auto& [name, value] : entry.bindings) {
        bool declared = std::any_of(out.variables.begin(), out.variables.end(),
                                    [&](const auto& v) { return v.first == name; });
        if (!declared) throw IngestError(ctx + ": variable '" + name + "' not declared");
      }
      out.sentences.push_back(std::move(entry));
    }
    records.push_back(std::move(out));
  }
  return records;
}

namespace {

std::vector<std::string> instantiate_template(const std::string& tmpl,
                                              const SentenceEntry& sentence,
                                              bool anonymize) {
  std::vector<std::string> tokens = split_whitespace(tmpl);
  if (anonymize) return tokens;  // placeholders kept verbatim

  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto& tok : tokens) {
    const std::string* value = nullptr;
    for (const auto& [name, bound] : sentence.bindings) {
      if (name == tok) {
        value = &bound;
        break;
      }
    }
    if (!value) {
      out.push_back(std::move(tok));
      continue;
    }
    for (auto& piece : split_whitespace(*value)) out.push_back(std::move(piece));
  }
  return out;
}

}  // namespace

SplitCorpora build_split(std::span<const DatasetRecord> records, SplitMode mode,
                         bool anonymize, const SplitKeyMap& keys,
                         TokenInterner& interner) {
  SplitCorpora out;
  out.train.role = CorpusRole::train;
  out.valid.role = CorpusRole::valid;
  out.test.role = CorpusRole::test;

  for (std::size_t ri = 0; ri < records.size(); ++ri) {
    const DatasetRecord& rec = records[ri];
    if (rec.sql_templates.empty())
      throw IngestError(record_context(ri) + ": no sql template");
    const std::string& tmpl = rec.sql_templates.front();

    for (std::size_t si = 0; si < rec.sentences.size(); ++si) {
      const SentenceEntry& sentence = rec.sentences[si];
      CorpusRole role;
      try {
        role = keys.role_of(mode == SplitMode::query ? rec.query_split_key
                                                     : sentence.split_key);
      } catch (const IngestError& e) {
        throw IngestError(record_context(ri) + ": " + e.what());
      }

      auto texts = instantiate_template(tmpl, sentence, anonymize);
      std::string ctx = record_context(ri) + ": sentence " + std::to_string(si);
      if (texts.empty()) throw IngestError(ctx + ": empty query");

      QuerySeq query;
      query.source_id = "r" + std::to_string(ri) + ".s" + std::to_string(si);
      query.tokens.reserve(texts.size());
      for (const auto& text : texts) {
        if (contains_merge_separator(text))
          throw IngestError(ctx + ": token '" + text + "' contains the reserved separator");
        query.tokens.push_back(make_token(text, interner));
      }

      Corpus& target = role == CorpusRole::train  ? out.train
                       : role == CorpusRole::valid ? out.valid
                                                   : out.test;
      target.queries.push_back(std::move(query));
    }
  }
  return out;
}

std::unordered_map<std::string, long> token_counts(const Corpus& corpus) {
  std::unordered_map<std::string, long> counts;
  for (const auto& query : corpus.queries)
    for (const auto& token : query.tokens) ++counts[token.text];
  return counts;
}

std::set<std::string> vocabulary(const Corpus& corpus, long min_count) {
  if (min_count < 1) throw std::invalid_argument("vocabulary: min_count must be >= 1");
  std::set<std::string> vocab;
  for (auto& [text, count] : token_counts(corpus)) {
    if (count >= min_count) vocab.insert(text);
  }
  return vocab;
}

}  // namespace sqlbpe
