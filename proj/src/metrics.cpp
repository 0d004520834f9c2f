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

#include "sqlbpe/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace sqlbpe {

LengthStats length_stats(const Corpus& before, const Corpus& after) {
  if (before.queries.size() != after.queries.size())
    throw std::invalid_argument("length_stats: corpora must have equal query counts");

  LengthStats stats;
  if (before.queries.empty()) return stats;

  long long total_before = 0;
  long long total_after = 0;
  for (std::size_t i = 0; i < before.queries.size(); ++i) {
    total_before += static_cast<long long>(before.queries[i].tokens.size());
    total_after += static_cast<long long>(after.queries[i].tokens.size());
  }
  const double n = static_cast<double>(before.queries.size());
  stats.mean_before = static_cast<double>(total_before) / n;
  stats.mean_after = static_cast<double>(total_after) / n;
  stats.reduction_fraction =
      total_before == 0 ? 0.0 : 1.0 - stats.mean_after / stats.mean_before;
  return stats;
}

OovReport oov_report(const Corpus& train, const Corpus& valid, long min_count) {
  OovReport report;
  auto train_counts = token_counts(train);
  for (const auto& vocab_token : vocabulary(valid, 1)) {
    auto it = train_counts.find(vocab_token);
    if (it == train_counts.end() || it->second < min_count) report.tokens.insert(vocab_token);
  }
  report.count = report.tokens.size();
  return report;
}

const std::set<std::string>& sql_pattern_keywords() {
  static const std::set<std::string> keywords = {
      // clause and predicate keywords
      "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "LIMIT",
      "UNION", "INTERSECT", "EXCEPT", "DISTINCT", "AS", "ON", "JOIN", "INNER",
      "OUTER", "LEFT", "RIGHT", "FULL", "CROSS", "NATURAL", "AND", "OR", "NOT",
      "IN", "LIKE", "BETWEEN", "IS", "NULL", "EXISTS", "ALL", "ANY", "ASC",
      "DESC", "COUNT", "MAX", "MIN", "SUM", "AVG", "INSERT", "INTO", "VALUES",
      "UPDATE", "SET", "DELETE",
      // operators and punctuation
      "=", "<", ">", "<=", ">=", "<>", "(", ")", ",", ";", "*", ".", "\"",
  };
  return keywords;
}

namespace {

bool is_number(const std::string& text) {
  std::size_t i = text.size() && text[0] == '-' ? 1 : 0;
  bool digit_seen = false;
  bool dot_seen = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit_seen = true;
    } else if (c == '.' && !dot_seen) {
      dot_seen = true;
    } else {
      return false;
    }
  }
  return digit_seen;
}

// Anonymization placeholders look like city_name0: a lowercase name with
// a trailing index digit.
bool is_placeholder(const std::string& text) {
  if (text.size() < 2) return false;
  if (!std::islower(static_cast<unsigned char>(text.front()))) return false;
  if (!std::isdigit(static_cast<unsigned char>(text.back()))) return false;
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::islower(c) || std::isdigit(c) || c == '_';
  });
}

}  // namespace

std::string pattern_of(const QuerySeq& query, const std::set<std::string>& keywords) {
  std::string out;
  auto append = [&](std::string_view piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };

  const auto& tokens = query.tokens;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::string& text = tokens[i].text;
    if (text == "\"") {
      // a paired quote group collapses to a single VALUE
      std::size_t close = i + 1;
      while (close < tokens.size() && tokens[close].text != "\"") ++close;
      if (close < tokens.size()) {
        append("VALUE");
        i = close + 1;
        continue;
      }
    }
    if (keywords.contains(text)) append(text);
    else if (is_number(text) || is_placeholder(text)) append("VALUE");
    else append("IDENT");
    ++i;
  }
  return out;
}

double unseen_pattern_rate(const Corpus& train, const Corpus& test,
                           const std::set<std::string>& keywords) {
  if (test.queries.empty()) return 0.0;
  std::unordered_set<std::string> seen;
  for (const auto& query : train.queries) seen.insert(pattern_of(query, keywords));
  long unseen = 0;
  for (const auto& query : test.queries)
    if (!seen.contains(pattern_of(query, keywords))) ++unseen;
  return static_cast<double>(unseen) / static_cast<double>(test.queries.size());
}

}  // namespace sqlbpe
