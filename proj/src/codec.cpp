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

#include "sqlbpe/codec.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace sqlbpe {

std::string_view to_string(TrainMode mode) {
  return mode == TrainMode::plain ? "plain" : "ast";
}

std::string merged_name(std::string_view left, std::string_view right) {
  std::string out;
  out.reserve(left.size() + kMergeSeparator.size() + right.size());
  out += left;
  out += kMergeSeparator;
  out += right;
  return out;
}

namespace {

// Maximal non-overlapping left-to-right replacement of one rule's pair.
void apply_rule(std::vector<std::string>& texts, const MergeRule& rule) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  std::size_t i = 0;
  while (i < texts.size()) {
    if (i + 1 < texts.size() && texts[i] == rule.left && texts[i + 1] == rule.right) {
      out.push_back(rule.merged);
      i += 2;
    } else {
      out.push_back(std::move(texts[i]));
      ++i;
    }
  }
  texts = std::move(out);
}

std::vector<std::string> query_texts(const QuerySeq& query) {
  std::vector<std::string> texts;
  texts.reserve(query.tokens.size());
  for (const auto& token : query.tokens) texts.push_back(token.text);
  return texts;
}

Corpus assemble(const Corpus& source, std::vector<std::vector<std::string>>&& encoded,
                TokenInterner& interner) {
  Corpus out;
  out.role = source.role;
  out.queries.resize(source.queries.size());
  // interning is serialized so ids stay deterministic
  for (std::size_t qi = 0; qi < encoded.size(); ++qi) {
    QuerySeq& query = out.queries[qi];
    query.source_id = source.queries[qi].source_id;
    query.tokens.reserve(encoded[qi].size());
    for (const auto& text : encoded[qi]) query.tokens.push_back(make_token(text, interner));
  }
  return out;
}

}  // namespace

Corpus encode(const Corpus& corpus, const MergeTable& table, TokenInterner& interner) {
  const long n = static_cast<long>(corpus.queries.size());
  std::vector<std::vector<std::string>> encoded(corpus.queries.size());
#pragma omp parallel for schedule(static)
  for (long qi = 0; qi < n; ++qi) {
    auto texts = query_texts(corpus.queries[qi]);
    for (const auto& rule : table.rules) apply_rule(texts, rule);
    encoded[qi] = std::move(texts);
  }
  return assemble(corpus, std::move(encoded), interner);
}

Corpus decode(const Corpus& corpus, const MergeTable& table, TokenInterner& interner) {
  std::unordered_map<std::string_view, const MergeRule*> by_name;
  by_name.reserve(table.rules.size());
  for (const auto& rule : table.rules) by_name.emplace(rule.merged, &rule);

  const long n = static_cast<long>(corpus.queries.size());
  std::vector<std::vector<std::string>> decoded(corpus.queries.size());
  std::atomic<bool> failed{false};
  std::string first_error;  // written under the critical section only
#pragma omp parallel for schedule(static)
  for (long qi = 0; qi < n; ++qi) {
    std::vector<std::string> out;
    for (const auto& token : corpus.queries[qi].tokens) {
      // expand depth-first; the name shrinks strictly at every split
      std::vector<std::string_view> stack{token.text};
      while (!stack.empty() && !failed.load(std::memory_order_relaxed)) {
        std::string_view text = stack.back();
        stack.pop_back();
        if (!contains_merge_separator(text)) {
          out.emplace_back(text);
          continue;
        }
        auto it = by_name.find(text);
        if (it == by_name.end()) {
#pragma omp critical(sqlbpe_decode_error)
          {
            if (!failed.load()) {
              first_error = "cannot expand token '" + std::string(text) +
                            "': no matching merge rule";
              failed.store(true);
            }
          }
          break;
        }
        stack.push_back(it->second->right);
        stack.push_back(it->second->left);
      }
    }
    decoded[qi] = std::move(out);
  }
  if (failed.load()) throw DecodeError(first_error);
  return assemble(corpus, std::move(decoded), interner);
}

void save_table(const MergeTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write merge table " + path.string());
  out << "sqlbpe-merges v1 mode=" << to_string(table.mode) << " r=" << table.retention_steps
      << " m=" << table.min_count << '\n';
  for (const auto& rule : table.rules) out << rule.left << '\t' << rule.right << '\n';
  out << "---\n";
  for (const auto& token : table.base_vocabulary) out << token << '\n';
}

MergeTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open merge table " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw IngestError(path.string() + ": empty merge table file");

  MergeTable table;
  {
    std::istringstream hs(header);
    std::string magic, version, field;
    hs >> magic >> version;
    if (magic != "sqlbpe-merges" || version != "v1")
      throw IngestError(path.string() + ": unsupported merge table version '" + header + "'");
    bool have_mode = false, have_r = false, have_m = false;
    while (hs >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos)
        throw IngestError(path.string() + ": malformed header field '" + field + "'");
      std::string key = field.substr(0, eq);
      std::string value = field.substr(eq + 1);
      try {
        if (key == "mode") {
          if (value != "plain" && value != "ast")
            throw IngestError(path.string() + ": unknown mode '" + value + "'");
          table.mode = value == "plain" ? TrainMode::plain : TrainMode::ast;
          have_mode = true;
        } else if (key == "r") {
          table.retention_steps = std::stoi(value);
          have_r = true;
        } else if (key == "m") {
          table.min_count = std::stoi(value);
          have_m = true;
        }
      } catch (const std::logic_error&) {
        throw IngestError(path.string() + ": malformed header field '" + field + "'");
      }
    }
    if (!have_mode || !have_r || !have_m)
      throw IngestError(path.string() + ": header must carry mode, r and m");
  }

  std::string line;
  long line_no = 1;
  bool in_vocabulary = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!in_vocabulary && line == "---") {
      in_vocabulary = true;
      continue;
    }
    if (in_vocabulary) {
      if (!line.empty()) table.base_vocabulary.insert(line);
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw IngestError(path.string() + ": line " + std::to_string(line_no) +
                        ": expected <left>\\t<right>");
    MergeRule rule;
    rule.left = line.substr(0, tab);
    rule.right = line.substr(tab + 1);
    if (rule.left.empty() || rule.right.empty())
      throw IngestError(path.string() + ": line " + std::to_string(line_no) +
                        ": empty pair member");
    rule.merged = merged_name(rule.left, rule.right);
    rule.step_index = static_cast<int>(table.rules.size());
    table.rules.push_back(std::move(rule));
  }
  return table;
}

}  // namespace sqlbpe
