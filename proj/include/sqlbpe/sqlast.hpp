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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlbpe/corpus.hpp"

namespace sqlbpe {

enum class AstKind { leaf, paren_group, quoted_literal, comparison, clause, statement };

// A node covers the inclusive leaf range [start, end] over the query's
// original token sequence. Children spans are ordered, disjoint, and
// exactly tile the parent span.
struct AstNode {
  AstKind kind = AstKind::leaf;
  int start = 0;
  int end = 0;
  std::vector<AstNode> children;  // empty for leaves
};

struct AstTree {
  AstNode root;        // kind == statement, span [0, leaf_count - 1]
  int leaf_count = 0;
};

// Whitespace split, with ( ) , ; = < > and " broken out as standalone
// tokens. Double-quoted content is whitespace-split only and kept between
// the two quote tokens. Throws SqlParseError with the character offset of
// an unterminated opening quote.
std::vector<Token> tokenize_sql(std::string_view raw, TokenInterner& interner);

// Pragmatic sibling-group grammar, built in a fixed order: clause nodes at
// top-level keywords, paren groups at any depth, quoted literals, then
// comparison nodes over the resulting siblings. Tokens not captured by any
// rule stay direct leaf children of the enclosing node, so the only
// failure is unbalanced parentheses.
AstTree parse(std::span<const Token> tokens);

// True iff [start, end] equals the span union of a contiguous run of
// consecutive children of some node. A single-leaf span is always aligned.
// Throws std::out_of_range for spans outside [0, leaf_count).
bool is_tree_aligned(const AstTree& tree, int start, int end);

// Debug form, e.g. `(clause WHERE (cmp STATE = (lit " alabama ")))`.
std::string to_sexpr(const AstTree& tree, std::span<const Token> tokens);

// Parses every query; on failure rethrows SqlParseError carrying the
// 0-based query index.
std::vector<AstTree> parse_corpus(const Corpus& corpus);

}  // namespace sqlbpe
