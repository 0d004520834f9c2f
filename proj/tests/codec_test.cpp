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

#include <random>

#include <doctest.h>

#include "sqlbpe/bpetrain.hpp"
#include "testutil.hpp"

using namespace sqlbpe;
using testutil::TempDir;
using testutil::make_corpus;
using testutil::query_strings;
using testutil::read_file;

namespace {

MergeTable table_of(std::vector<std::pair<std::string, std::string>> pairs) {
  MergeTable table;
  for (auto& [left, right] : pairs) {
    MergeRule rule{left, right, merged_name(left, right),
                   static_cast<int>(table.rules.size())};
    table.rules.push_back(std::move(rule));
  }
  return table;
}

}  // namespace

TEST_CASE("encode applies one rule left to right") {
  TokenInterner interner;
  Corpus corpus = make_corpus({"a b c"}, interner);
  auto table = table_of({{"a", "b"}});
  Corpus out = encode(corpus, table, interner);
  CHECK(query_strings(out) == std::vector<std::string>{merged_name("a", "b") + " c"});
}

TEST_CASE("encode chains rules in table order") {
  TokenInterner interner;
  Corpus corpus = make_corpus({"a b c"}, interner);
  std::string ab = merged_name("a", "b");
  auto table = table_of({{"a", "b"}, {ab, "c"}});
  Corpus out = encode(corpus, table, interner);
  CHECK(query_strings(out) == std::vector<std::string>{merged_name(ab, "c")});
}

TEST_CASE("encode with an empty table is the identity") {
  TokenInterner interner;
  Corpus corpus = make_corpus({"a b c", "d"}, interner);
  Corpus out = encode(corpus, MergeTable{}, interner);
  CHECK(query_strings(out) == query_strings(corpus));
}

TEST_CASE("decode inverts the chained encoding") {
  TokenInterner interner;
  std::string ab = merged_name("a", "b");
  auto table = table_of({{"a", "b"}, {ab, "c"}});
  Corpus encoded = make_corpus({merged_name(ab, "c")}, interner);
  Corpus out = decode(encoded, table, interner);
  CHECK(query_strings(out) == std::vector<std::string>{"a b c"});
}

TEST_CASE("decode leaves base-only corpora unchanged") {
  TokenInterner interner;
  Corpus corpus = make_corpus({"x y z"}, interner);
  auto table = table_of({{"a", "b"}});
  Corpus out = decode(corpus, table, interner);
  CHECK(query_strings(out) == query_strings(corpus));
}

TEST_CASE("decode names an underivable token") {
  TokenInterner interner;
  Corpus corpus = make_corpus({merged_name("x", "y")}, interner);
  auto table = table_of({{"a", "b"}});
  CHECK_THROWS_WITH_AS(decode(corpus, table, interner),
                       doctest::Contains(merged_name("x", "y").c_str()), DecodeError);
}

TEST_CASE("decode of encode is the identity on random trained tables") {
  std::mt19937 rng(79);
  TokenInterner interner;
  for (int round = 0; round < 50; ++round) {
    auto lines = testutil::random_letter_lines(rng, 10, 16, 5);
    Corpus corpus = make_corpus(lines, interner);
    Corpus valid = make_corpus(testutil::random_letter_lines(rng, 4, 10, 5), interner,
                               CorpusRole::valid);
    TrainerConfig config{.retention_steps = static_cast<int>(rng() % 4),
                         .min_count = 1 + static_cast<int>(rng() % 2)};
    auto result = train(corpus, valid, config, nullptr, interner);
    Corpus roundtrip = decode(encode(corpus, result.table, interner), result.table, interner);
    CHECK(query_strings(roundtrip) == query_strings(corpus));
  }
}

TEST_CASE("the trainer's encoded train corpus is plain re-encoding") {
  std::mt19937 rng(83);
  TokenInterner interner;
  for (int round = 0; round < 20; ++round) {
    Corpus corpus = make_corpus(testutil::random_letter_lines(rng, 10, 14, 4), interner);
    Corpus valid = make_corpus(testutil::random_letter_lines(rng, 4, 10, 4), interner,
                               CorpusRole::valid);
    TrainerConfig config{.retention_steps = 3, .min_count = 1};
    auto result = train(corpus, valid, config, nullptr, interner);
    Corpus re_encoded = encode(corpus, result.table, interner);
    CHECK(query_strings(re_encoded) == query_strings(result.encoded_train));
    // with the table trained to fixpoint on this corpus, encode is idempotent
    Corpus twice = encode(re_encoded, result.table, interner);
    CHECK(query_strings(twice) == query_strings(re_encoded));
  }
}

TEST_CASE("save and load round-trip a table") {
  TempDir dir;
  TokenInterner interner;
  std::string ab = merged_name("a", "b");
  MergeTable table = table_of({{"a", "b"}, {ab, "c"}});
  table.mode = TrainMode::ast;
  table.retention_steps = 7;
  table.min_count = 3;
  table.base_vocabulary = {"a", "b", "c"};
  save_table(table, dir.file("m.bpe"));

  MergeTable loaded = load_table(dir.file("m.bpe"));
  REQUIRE(loaded.rules.size() == 2);
  CHECK(loaded.rules[0].left == "a");
  CHECK(loaded.rules[0].right == "b");
  CHECK(loaded.rules[0].merged == ab);
  CHECK(loaded.rules[1].left == ab);
  CHECK(loaded.rules[1].merged == merged_name(ab, "c"));
  CHECK(loaded.rules[1].step_index == 1);
  CHECK(loaded.mode == TrainMode::ast);
  CHECK(loaded.retention_steps == 7);
  CHECK(loaded.min_count == 3);
  CHECK(loaded.base_vocabulary == table.base_vocabulary);

  // line count: header + rules + separator + vocabulary
  std::string text = read_file(dir.file("m.bpe"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 + 1 + 3);
}

TEST_CASE("a header-only file is an empty table") {
  TempDir dir;
  testutil::write_file(dir.file("m.bpe"), "sqlbpe-merges v1 mode=plain r=20 m=100\n");
  MergeTable table = load_table(dir.file("m.bpe"));
  CHECK(table.rules.empty());
  CHECK(table.base_vocabulary.empty());
  CHECK(table.retention_steps == 20);
  CHECK(table.min_count == 100);
}

TEST_CASE("load_table rejects version mismatches and malformed lines") {
  TempDir dir;
  testutil::write_file(dir.file("v2.bpe"), "sqlbpe-merges v2 mode=plain r=1 m=1\n");
  CHECK_THROWS_WITH_AS(load_table(dir.file("v2.bpe")), doctest::Contains("version"),
                       IngestError);

  testutil::write_file(dir.file("bad.bpe"),
                       "sqlbpe-merges v1 mode=plain r=1 m=1\nno-tab-here\n");
  CHECK_THROWS_WITH_AS(load_table(dir.file("bad.bpe")), doctest::Contains("line 2"),
                       IngestError);

  CHECK_THROWS_AS(load_table(dir.file("missing.bpe")), IngestError);
}
