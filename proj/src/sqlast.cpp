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

#include "sqlbpe/sqlast.hpp"

#include <array>
#include <cctype>
#include <stdexcept>
#include <string>

namespace sqlbpe {

namespace {

// Keywords that open a clause at parenthesis depth 0. Fixed list;
// two-word heads (GROUP BY, ORDER BY) stay two leaf children.
constexpr std::array<std::string_view, 10> kClauseKeywords = {
    "SELECT", "FROM", "WHERE", "GROUP", "HAVING",
    "ORDER",  "LIMIT", "UNION", "INTERSECT", "EXCEPT"};

constexpr std::array<std::string_view, 4> kComparisonOps = {"=", "<", ">", "LIKE"};

// Tokens that can never act as a comparison operand or column token.
constexpr std::array<std::string_view, 12> kConnectives = {
    "AND", "OR", "NOT", "IN", "AS", "ON", "BY", "BETWEEN", "ASC", "DESC", "IS", "NULL"};

bool is_clause_keyword(std::string_view text) {
  for (auto k : kClauseKeywords)
    if (text == k) return true;
  return false;
}

bool is_comparison_op(std::string_view text) {
  for (auto k : kComparisonOps)
    if (text == k) return true;
  return false;
}

bool is_punct_token(std::string_view text) {
  return text == "(" || text == ")" || text == "," || text == ";" || text == "\"";
}

bool is_connective(std::string_view text) {
  for (auto k : kConnectives)
    if (text == k) return true;
  return false;
}

bool is_tokenizer_punct(char c) {
  return c == '(' || c == ')' || c == ',' || c == ';' || c == '=' || c == '<' || c == '>';
}

bool is_raw_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

AstNode make_leaf(int index) { return AstNode{AstKind::leaf, index, index, {}}; }

}  // namespace

std::vector<Token> tokenize_sql(std::string_view raw, TokenInterner& interner) {
  if (raw.empty()) throw std::invalid_argument("tokenize_sql: empty input");

  std::vector<std::string> texts;
  std::size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (is_raw_space(c)) {
      ++i;
      continue;
    }
    if (c == '"') {
      std::size_t open = i++;
      texts.emplace_back("\"");
      std::string word;
      bool closed = false;
      while (i < raw.size()) {
        if (raw[i] == '"') {
          closed = true;
          break;
        }
        if (is_raw_space(raw[i])) {
          if (!word.empty()) texts.push_back(std::exchange(word, {}));
        } else {
          word += raw[i];
        }
        ++i;
      }
      if (!word.empty()) texts.push_back(std::move(word));
      if (!closed)
        throw SqlParseError("unterminated double quote at offset " + std::to_string(open));
      texts.emplace_back("\"");
      ++i;
      continue;
    }
    if (is_tokenizer_punct(c)) {
      texts.emplace_back(1, c);
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < raw.size() && !is_raw_space(raw[i]) && !is_tokenizer_punct(raw[i]) &&
           raw[i] != '"')
      ++i;
    texts.emplace_back(raw.substr(start, i - start));
  }

  std::vector<Token> tokens;
  tokens.reserve(texts.size());
  for (const auto& text : texts) tokens.push_back(make_token(text, interner));
  return tokens;
}

namespace {

const std::string& leaf_text(const AstNode& node, std::span<const Token> tokens) {
  return tokens[node.start].text;
}

bool is_leaf_text(const AstNode& node, std::span<const Token> tokens, std::string_view text) {
  return node.kind == AstKind::leaf && leaf_text(node, tokens) == text;
}

// Stack grouping: a ')' closes the innermost open '(', wrapping everything
// between them (quotes included) plus both parens into one group node.
void group_parens(std::vector<AstNode>& children, std::span<const Token> tokens) {
  std::vector<AstNode> out;
  std::vector<std::size_t> open_positions;
  for (auto& node : children) {
    if (is_leaf_text(node, tokens, "(")) {
      open_positions.push_back(out.size());
      out.push_back(std::move(node));
    } else if (is_leaf_text(node, tokens, ")") && !open_positions.empty()) {
      std::size_t at = open_positions.back();
      open_positions.pop_back();
      AstNode group{AstKind::paren_group, out[at].start, node.end, {}};
      group.children.assign(std::make_move_iterator(out.begin() + at),
                            std::make_move_iterator(out.end()));
      group.children.push_back(std::move(node));
      out.resize(at);
      out.push_back(std::move(group));
    } else {
      out.push_back(std::move(node));
    }
  }
  children = std::move(out);
}

// Pairs '"' leaves left to right within one sibling list; the quote tokens
// are the group's first and last children. An unpaired quote stays a leaf.
void group_quoted_literals(std::vector<AstNode>& children, std::span<const Token> tokens) {
  std::vector<AstNode> out;
  std::size_t i = 0;
  while (i < children.size()) {
    if (is_leaf_text(children[i], tokens, "\"")) {
      std::size_t close = i + 1;
      while (close < children.size() && !is_leaf_text(children[close], tokens, "\""))
        ++close;
      if (close < children.size()) {
        AstNode group{AstKind::quoted_literal, children[i].start, children[close].end, {}};
        for (std::size_t k = i; k <= close; ++k) group.children.push_back(std::move(children[k]));
        out.push_back(std::move(group));
        i = close + 1;
        continue;
      }
    }
    out.push_back(std::move(children[i]));
    ++i;
  }
  children = std::move(out);
}

bool can_be_column(const AstNode& node, std::span<const Token> tokens) {
  if (node.kind != AstKind::leaf) return false;
  const std::string& text = leaf_text(node, tokens);
  return !is_clause_keyword(text) && !is_comparison_op(text) && !is_punct_token(text) &&
         !is_connective(text) && text != "BETWEEN";
}

bool can_be_operand(const AstNode& node, std::span<const Token> tokens) {
  if (node.kind == AstKind::paren_group || node.kind == AstKind::quoted_literal) return true;
  return can_be_column(node, tokens);
}

// Wraps [column, operator(s), operand] runs — and the BETWEEN x AND y
// form — into comparison nodes, left to right and non-overlapping.
void group_comparisons(std::vector<AstNode>& children, std::span<const Token> tokens) {
  std::vector<AstNode> out;
  std::size_t i = 0;
  while (i < children.size()) {
    bool is_between = is_leaf_text(children[i], tokens, "BETWEEN");
    bool is_op = children[i].kind == AstKind::leaf && is_comparison_op(leaf_text(children[i], tokens));
    if ((is_op || is_between) && !out.empty() && can_be_column(out.back(), tokens)) {
      std::size_t last = 0;
      bool matched = false;
      if (is_between) {
        // BETWEEN <operand> AND <operand>
        if (i + 3 < children.size() && can_be_operand(children[i + 1], tokens) &&
            is_leaf_text(children[i + 2], tokens, "AND") &&
            can_be_operand(children[i + 3], tokens)) {
          last = i + 3;
          matched = true;
        }
      } else {
        // one or two operator tokens (covers <=, >=, <> after tokenizing)
        std::size_t op_end = i;
        if (op_end + 1 < children.size() && children[op_end + 1].kind == AstKind::leaf &&
            is_comparison_op(leaf_text(children[op_end + 1], tokens)))
          ++op_end;
        if (op_end + 1 < children.size() && can_be_operand(children[op_end + 1], tokens)) {
          last = op_end + 1;
          matched = true;
        }
      }
      if (matched) {
        AstNode cmp{AstKind::comparison, out.back().start, children[last].end, {}};
        cmp.children.push_back(std::move(out.back()));
        out.pop_back();
        for (std::size_t k = i; k <= last; ++k) cmp.children.push_back(std::move(children[k]));
        out.push_back(std::move(cmp));
        i = last + 1;
        continue;
      }
    }
    out.push_back(std::move(children[i]));
    ++i;
  }
  children = std::move(out);
}

// Runs a grouping scan over eligible children lists. The paren scan must
// not revisit a paren_group (its own ( and ) children would re-wrap, and
// one stack pass already nests fully); comparison nodes are traversed but
// never rescanned, and quoted literals are atomic value groups.
template <typename Fn>
void for_each_container(AstNode& node, bool scan_paren_groups, Fn&& fn) {
  if (node.kind == AstKind::leaf || node.kind == AstKind::quoted_literal) return;
  bool scan = node.kind == AstKind::statement || node.kind == AstKind::clause ||
              (scan_paren_groups && node.kind == AstKind::paren_group);
  if (scan) fn(node);
  for (auto& child : node.children) for_each_container(child, scan_paren_groups, fn);
}

}  // namespace

AstTree parse(std::span<const Token> tokens) {
  if (tokens.empty()) throw std::invalid_argument("parse: empty token sequence");

  int depth = 0;
  for (const auto& token : tokens) {
    if (token.text == "(") ++depth;
    if (token.text == ")" && --depth < 0) throw SqlParseError("unbalanced parentheses");
  }
  if (depth != 0) throw SqlParseError("unbalanced parentheses");

  const int n = static_cast<int>(tokens.size());
  AstNode root{AstKind::statement, 0, n - 1, {}};

  // Clause split at depth-0 keywords; anything before the first keyword
  // stays directly under the statement.
  std::vector<int> clause_starts;
  depth = 0;
  for (int i = 0; i < n; ++i) {
    const std::string& text = tokens[i].text;
    if (text == "(") ++depth;
    else if (text == ")") --depth;
    else if (depth == 0 && is_clause_keyword(text)) clause_starts.push_back(i);
  }
  int first_clause = clause_starts.empty() ? n : clause_starts.front();
  for (int i = 0; i < first_clause; ++i) root.children.push_back(make_leaf(i));
  for (std::size_t k = 0; k < clause_starts.size(); ++k) {
    int lo = clause_starts[k];
    int hi = k + 1 < clause_starts.size() ? clause_starts[k + 1] : n;
    AstNode clause{AstKind::clause, lo, hi - 1, {}};
    for (int i = lo; i < hi; ++i) clause.children.push_back(make_leaf(i));
    root.children.push_back(std::move(clause));
  }

  for_each_container(root, false, [&](AstNode& node) { group_parens(node.children, tokens); });
  for_each_container(root, true,
                     [&](AstNode& node) { group_quoted_literals(node.children, tokens); });
  for_each_container(root, true,
                     [&](AstNode& node) { group_comparisons(node.children, tokens); });

  return AstTree{std::move(root), n};
}

bool is_tree_aligned(const AstTree& tree, int start, int end) {
  if (start < 0 || end < start || end >= tree.leaf_count)
    throw std::out_of_range("is_tree_aligned: span out of bounds");
  if (start == end) return true;

  // Descend to the smallest node whose span contains [start, end].
  const AstNode* node = &tree.root;
  for (;;) {
    const AstNode* inner = nullptr;
    for (const auto& child : node->children) {
      if (child.start <= start && end <= child.end) {
        inner = &child;
        break;
      }
    }
    if (!inner) break;
    node = inner;
  }
  if (node->children.empty()) return false;

  // The span must open exactly at a child boundary and close at one;
  // contiguity in between is guaranteed because children tile the parent.
  for (std::size_t k = 0; k < node->children.size(); ++k) {
    if (node->children[k].start != start) continue;
    for (std::size_t j = k; j < node->children.size(); ++j) {
      if (node->children[j].end == end) return true;
      if (node->children[j].end > end) return false;
    }
    return false;
  }
  return false;
}

namespace {

void append_sexpr(const AstNode& node, std::span<const Token> tokens, std::string& out) {
  if (node.kind == AstKind::leaf) {
    out += tokens[node.start].text;
    return;
  }
  const char* tag = nullptr;
  switch (node.kind) {
    case AstKind::statement: tag = "stmt"; break;
    case AstKind::clause: tag = "clause"; break;
    case AstKind::paren_group: tag = "paren"; break;
    case AstKind::quoted_literal: tag = "lit"; break;
    case AstKind::comparison: tag = "cmp"; break;
    case AstKind::leaf: break;
  }
  out += '(';
  out += tag;
  for (const auto& child : node.children) {
    out += ' ';
    append_sexpr(child, tokens, out);
  }
  out += ')';
}

}  // namespace

std::string to_sexpr(const AstTree& tree, std::span<const Token> tokens) {
  std::string out;
  append_sexpr(tree.root, tokens, out);
  return out;
}

std::vector<AstTree> parse_corpus(const Corpus& corpus) {
  std::vector<AstTree> trees;
  trees.reserve(corpus.queries.size());
  for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
    try {
      trees.push_back(parse(corpus.queries[i].tokens));
    } catch (const SqlParseError& e) {
      throw SqlParseError("query " + std::to_string(i) + ": " + e.what(),
                          static_cast<long>(i));
    } catch (const std::invalid_argument& e) {
      throw SqlParseError("query " + std::to_string(i) + ": " + e.what(),
                          static_cast<long>(i));
    }
  }
  return trees;
}

}  // namespace sqlbpe
