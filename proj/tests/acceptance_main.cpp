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

// Acceptance suite. Each criterion prints one PASS/FAIL line (SKIP for the
// optional dataset-backed checks when the public datasets are not present);
// the process exits non-zero iff any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "reference/reference_trainer.hpp"
#include "sqlbpe/bpetrain.hpp"
#include "sqlbpe/codec.hpp"
#include "sqlbpe/metrics.hpp"
#include "testutil.hpp"

namespace {

using namespace sqlbpe;
using testutil::make_corpus;
using testutil::query_strings;

struct Outcome {
  enum Status { pass, fail, skip } status = fail;
  std::string detail;
};

Outcome ok(std::string detail) { return {Outcome::pass, std::move(detail)}; }
Outcome bad(std::string detail) { return {Outcome::fail, std::move(detail)}; }
Outcome skipped(std::string detail) { return {Outcome::skip, std::move(detail)}; }

// ---- shared helpers --------------------------------------------------------

using RuleSig = std::vector<std::tuple<std::string, std::string, std::string, int>>;
using RejectSig = std::vector<std::tuple<std::string, std::string, int>>;

RuleSig rules_sig(const std::vector<MergeRule>& rules) {
  RuleSig out;
  for (const auto& r : rules) out.emplace_back(r.left, r.right, r.merged, r.step_index);
  return out;
}

RejectSig rejected_sig(const std::vector<RejectedPair>& rejected) {
  RejectSig out;
  for (const auto& r : rejected) out.emplace_back(r.left, r.right, r.step);
  return out;
}

std::vector<std::string> working_strings(const WorkingCorpus& corpus) {
  std::vector<std::string> out;
  for (const auto& q : corpus.queries) {
    std::string line;
    for (const auto& wt : q) {
      if (!line.empty()) line += ' ';
      line += wt.text;
    }
    out.push_back(std::move(line));
  }
  return out;
}

// Spans of an encoded query, rebuilt from the separator-structured names.
std::vector<std::pair<int, int>> spans_of(const QuerySeq& query) {
  std::vector<std::pair<int, int>> spans;
  int cursor = 0;
  for (const auto& token : query.tokens) {
    int pieces = 1;
    std::string_view text = token.text;
    for (std::size_t at = text.find(kMergeSeparator); at != std::string_view::npos;
         at = text.find(kMergeSeparator, at + kMergeSeparator.size()))
      ++pieces;
    spans.emplace_back(cursor, cursor + pieces - 1);
    cursor += pieces;
  }
  return spans;
}

// ---- criterion 1: round-trip law -------------------------------------------

Outcome criterion_roundtrip() {
  std::mt19937 rng(1001);
  TokenInterner interner;
  int corpora = 0;
  for (int i = 0; i < 1000; ++i) {
    int alphabet = 2 + static_cast<int>(rng() % 19);  // <= 20 distinct tokens
    Corpus corpus = make_corpus(testutil::random_letter_lines(rng, 10, 30, alphabet), interner);
    Corpus valid = make_corpus(testutil::random_letter_lines(rng, 4, 20, alphabet), interner,
                               CorpusRole::valid);
    TrainerConfig config{.retention_steps = static_cast<int>(rng() % 4),
                         .min_count = 1 + static_cast<int>(rng() % 3),
                         .max_steps = i % 7 == 0 ? 10000 : 10 + static_cast<int>(rng() % 50)};
    auto result = train(corpus, valid, config, nullptr, interner);
    Corpus decoded =
        decode(encode(corpus, result.table, interner), result.table, interner);
    if (query_strings(decoded) != query_strings(corpus))
      return bad("round-trip mismatch on corpus " + std::to_string(i));
    // the validation side must round-trip through the same table too
    Corpus decoded_valid =
        decode(encode(valid, result.table, interner), result.table, interner);
    if (query_strings(decoded_valid) != query_strings(valid))
      return bad("validation round-trip mismatch on corpus " + std::to_string(i));
    ++corpora;
  }
  return ok(std::to_string(corpora) + " random corpora decoded back exactly");
}

// ---- criterion 2: oracle equivalence ---------------------------------------

long g_observer_violations = 0;
long g_observed_accepts = 0;

StepObserver safety_observer() {
  return [](const StepTrace& trace) {
    if (trace.accepted) {
      ++g_observed_accepts;
      if (trace.oov_after > trace.oov_before) ++g_observer_violations;
    }
  };
}

Outcome criterion_oracle_equivalence() {
  std::mt19937 rng(2002);
  TokenInterner interner;
  const int retention_choices[] = {0, 1, 2, 5, 20};
  int runs = 0;
  for (int i = 0; i < 200; ++i) {
    bool sql_shaped = i % 2 == 0;
    auto train_lines = sql_shaped ? testutil::random_sql_lines(rng, 50, 20)
                                  : testutil::random_letter_lines(rng, 50, 20, 6);
    auto valid_lines = sql_shaped ? testutil::random_sql_lines(rng, 15, 16)
                                  : testutil::random_letter_lines(rng, 15, 16, 7);
    Corpus train_set = make_corpus(train_lines, interner);
    Corpus valid_set = make_corpus(valid_lines, interner, CorpusRole::valid);
    AstContext trees{parse_corpus(train_set), parse_corpus(valid_set)};

    for (TrainMode mode : {TrainMode::plain, TrainMode::ast}) {
      TrainerConfig config{
          .retention_steps = retention_choices[rng() % 5],
          .min_count = 1 + static_cast<int>(rng() % 5),
          .mode = mode,
          .max_steps = i % 5 == 0 ? 10000 : 20 + static_cast<int>(rng() % 180)};
      const AstContext* ctx = mode == TrainMode::ast ? &trees : nullptr;
      auto optimized = train(train_set, valid_set, config, ctx, interner, safety_observer());
      auto naive = reference::train(train_set, valid_set, config, ctx);

      std::string tag = "corpus " + std::to_string(i) + " mode " +
                        std::string(to_string(mode));
      if (rules_sig(optimized.report.accepted) != rules_sig(naive.report.accepted))
        return bad(tag + ": merge lists differ");
      if (rejected_sig(optimized.report.rejected) != rejected_sig(naive.report.rejected))
        return bad(tag + ": rejected lists differ");
      if (optimized.report.stop_reason != naive.report.stop_reason)
        return bad(tag + ": stop reasons differ");
      if (query_strings(optimized.encoded_train) != working_strings(naive.train))
        return bad(tag + ": encoded train corpora differ");
      if (query_strings(optimized.encoded_valid) != working_strings(naive.valid))
        return bad(tag + ": encoded valid corpora differ");
      ++runs;
    }
  }
  return ok(std::to_string(runs) + " trainer runs identical to the naive reference");
}

// ---- criterion 3: stopping criterion ---------------------------------------

Outcome criterion_stopping() {
  TokenInterner interner;
  for (int r : {0, 1, 2, 5, 20}) {
    // 25 candidate pairs, each of which would starve a validation token:
    // p<i> only ever precedes q<i>, and the validation set needs p<i>
    std::vector<std::string> train_lines;
    std::string valid_line;
    for (int i = 0; i < 25; ++i) {
      std::string left = "p" + std::to_string(i);
      for (int c = 0; c < 26 - i; ++c) train_lines.push_back(left + " q" + std::to_string(i));
      if (i) valid_line += ' ';
      valid_line += left;
    }
    Corpus train_set = make_corpus(train_lines, interner);
    Corpus valid_set = make_corpus({valid_line}, interner, CorpusRole::valid);
    TrainerConfig config{.retention_steps = r, .min_count = 1};
    auto result = train(train_set, valid_set, config, nullptr, interner, safety_observer());

    if (result.report.stop_reason != StopReason::retention_exhausted)
      return bad("r=" + std::to_string(r) + ": wrong stop reason");
    if (static_cast<int>(result.report.rejected.size()) != r)
      return bad("r=" + std::to_string(r) + ": " +
                 std::to_string(result.report.rejected.size()) + " rejections");
    for (int i = 0; i < r; ++i) {
      const auto& rej = result.report.rejected[i];
      if (rej.left != "p" + std::to_string(i) || rej.step != i)
        return bad("r=" + std::to_string(r) + ": rejection order broke at " +
                   std::to_string(i));
    }
    // the valid corpus never contributes candidates: its own bigrams stay
    if (!result.report.accepted.empty())
      return bad("r=" + std::to_string(r) + ": unexpected accepted merges");
  }

  // the two hand-traced runs
  {
    TokenInterner fresh;
    Corpus t = make_corpus({"a b", "a b"}, fresh);
    Corpus v = make_corpus({"a b", "a b"}, fresh, CorpusRole::valid);
    auto result = train(t, v, TrainerConfig{.retention_steps = 1, .min_count = 1}, nullptr,
                        fresh, safety_observer());
    if (rules_sig(result.report.accepted) !=
        RuleSig{{"a", "b", merged_name("a", "b"), 0}})
      return bad("hand trace 1: wrong merge list");
    if (result.report.stop_reason != StopReason::no_bigrams)
      return bad("hand trace 1: wrong stop reason");
  }
  {
    TokenInterner fresh;
    Corpus t = make_corpus({"a b", "a b"}, fresh);
    Corpus v = make_corpus({"a c"}, fresh, CorpusRole::valid);
    auto result = train(t, v, TrainerConfig{.retention_steps = 1, .min_count = 1}, nullptr,
                        fresh, safety_observer());
    if (!result.report.accepted.empty() ||
        rejected_sig(result.report.rejected) != RejectSig{{"a", "b", 0}} ||
        result.report.stop_reason != StopReason::retention_exhausted)
      return bad("hand trace 2: wrong report");
  }
  return ok("exact r rejections for r in {0,1,2,5,20}; hand traces reproduced");
}

// ---- criterion 4: acceptance safety ----------------------------------------

Outcome criterion_safety() {
  // top up the instrumented runs from criteria 2 and 3 with mixed-validity
  // corpora where rejections and acceptances interleave
  std::mt19937 rng(4004);
  TokenInterner interner;
  for (int i = 0; i < 60; ++i) {
    Corpus train_set =
        make_corpus(testutil::random_letter_lines(rng, 20, 14, 5), interner);
    Corpus valid_set = make_corpus(testutil::random_letter_lines(rng, 8, 12, 7), interner,
                                   CorpusRole::valid);
    TrainerConfig config{.retention_steps = static_cast<int>(rng() % 8),
                         .min_count = 1 + static_cast<int>(rng() % 4)};
    train(train_set, valid_set, config, nullptr, interner, safety_observer());
  }
  if (g_observed_accepts == 0) return bad("no accepted steps were observed");
  if (g_observer_violations != 0)
    return bad(std::to_string(g_observer_violations) + " OOV increases after accepts");
  return ok(std::to_string(g_observed_accepts) +
            " accepted steps observed, OOV difference never grew");
}

// ---- criterion 5: AST soundness --------------------------------------------

const char* kExampleQuery = "SELECT NAME FROM CITY WHERE STATE = \" alabama \" ;";

Outcome check_ast_spans(const Corpus& encoded, const std::vector<AstTree>& trees,
                        const std::string& tag) {
  for (std::size_t qi = 0; qi < encoded.queries.size(); ++qi) {
    auto spans = spans_of(encoded.queries[qi]);
    auto enumerated = trees[qi].leaf_count <= 12
                          ? reference::aligned_spans(trees[qi])
                          : std::set<std::pair<int, int>>{};
    for (std::size_t ti = 0; ti < spans.size(); ++ti) {
      auto [start, end] = spans[ti];
      if (start == end) continue;  // unmerged token
      if (!is_tree_aligned(trees[qi], start, end))
        return bad(tag + ": query " + std::to_string(qi) + " has an unaligned merge");
      if (trees[qi].leaf_count <= 12 && !enumerated.contains({start, end}))
        return bad(tag + ": enumerator disagrees on query " + std::to_string(qi));
    }
  }
  return ok("");
}

Outcome criterion_ast_soundness() {
  TokenInterner interner;
  {
    std::vector<std::string> lines(30, kExampleQuery);
    Corpus train_set = make_corpus(lines, interner);
    Corpus valid_set = make_corpus(lines, interner, CorpusRole::valid);
    AstContext trees{parse_corpus(train_set), parse_corpus(valid_set)};
    TrainerConfig config{.retention_steps = 3, .min_count = 1, .mode = TrainMode::ast};
    auto result = train(train_set, valid_set, config, &trees, interner, safety_observer());

    bool learned_quote_alabama = false;
    for (const auto& rule : result.report.accepted) {
      if (rule.left == "=" && rule.right == "\"")
        return bad("the (=, \") pair was learned on the example corpus");
      if (rule.left == "\"" && rule.right == "alabama") learned_quote_alabama = true;
    }
    if (!learned_quote_alabama)
      return bad("the (\", alabama) pair was never learned on the example corpus");

    Outcome spans = check_ast_spans(result.encoded_train, trees.train_trees, "example");
    if (spans.status != Outcome::pass) return spans;
  }

  std::mt19937 rng(5005);
  int checked = 0;
  for (int round = 0; round < 10; ++round) {
    auto lines = testutil::random_sql_lines(rng, 10, 12);
    Corpus train_set = make_corpus(lines, interner);
    Corpus valid_set = make_corpus(
        std::vector<std::string>(lines.begin(), lines.begin() + 1 + lines.size() / 2),
        interner, CorpusRole::valid);
    AstContext trees{parse_corpus(train_set), parse_corpus(valid_set)};
    TrainerConfig config{.retention_steps = 5, .min_count = 1, .mode = TrainMode::ast};
    auto result = train(train_set, valid_set, config, &trees, interner, safety_observer());
    Outcome spans = check_ast_spans(result.encoded_train, trees.train_trees,
                                    "synthetic round " + std::to_string(round));
    if (spans.status != Outcome::pass) return spans;
    checked += static_cast<int>(lines.size());
  }
  if (checked < 100) return bad("only " + std::to_string(checked) + " synthetic queries");
  return ok("example corpus constrained correctly; " + std::to_string(checked) +
            " synthetic queries all tree-aligned");
}

// ---- criterion 6: compression proxy ----------------------------------------

Outcome criterion_compression() {
  std::mt19937 rng(6006);
  static const char* columns[] = {"NAME", "POP", "AREA", "LEN", "CAPITAL", "DENSITY"};
  static const char* tables[] = {"CITY", "RIVER", "LAKE", "STATE_T", "BORDER"};

  std::vector<std::vector<std::string>> templates;  // tokens; "$" marks a value slot
  for (int t = 0; t < 10; ++t) {
    std::vector<std::string> tmpl = {"SELECT", columns[t % 6], "FROM", tables[t % 5],
                                     "WHERE", columns[(t + 1) % 6], "=", "$"};
    int extra_clauses = t % 3 + 1;  // pad to 15-40 tokens
    for (int c = 0; c < extra_clauses + 2; ++c) {
      tmpl.insert(tmpl.end(), {"AND", columns[(t + c + 2) % 6], "<", "$"});
    }
    tmpl.insert(tmpl.end(), {"ORDER", "BY", columns[t % 6], "DESC", ";"});
    while (tmpl.size() < 15) tmpl.insert(tmpl.end() - 1, "DESC");
    templates.push_back(std::move(tmpl));
  }

  auto instantiate = [&](int t, int k) {
    std::string line;
    int slot = 0;
    for (const auto& token : templates[t]) {
      if (!line.empty()) line += ' ';
      if (token == "$")
        line += "v" + std::to_string(t) + "_" + std::to_string(k) + "_" +
                std::to_string(slot++);
      else
        line += token;
    }
    return line;
  };

  std::vector<std::string> train_lines, valid_lines;
  for (int t = 0; t < 10; ++t) {
    for (int k = 0; k < 50; ++k) train_lines.push_back(instantiate(t, k));
    for (int k = 50; k < 55; ++k) valid_lines.push_back(instantiate(t, k));
  }
  std::shuffle(train_lines.begin(), train_lines.end(), rng);

  TokenInterner interner;
  Corpus train_set = make_corpus(train_lines, interner);
  Corpus valid_set = make_corpus(valid_lines, interner, CorpusRole::valid);
  std::size_t min_len = templates[0].size(), max_len = 0;
  for (const auto& tmpl : templates) {
    min_len = std::min(min_len, tmpl.size());
    max_len = std::max(max_len, tmpl.size());
  }
  if (min_len < 15 || max_len > 40) return bad("template lengths out of range");

  TrainerConfig config{.retention_steps = 20, .min_count = 1};
  auto result = train(train_set, valid_set, config, nullptr, interner, safety_observer());
  LengthStats stats = length_stats(train_set, result.encoded_train);
  std::ostringstream detail;
  detail.precision(3);
  detail << "mean length " << stats.mean_before << " -> " << stats.mean_after
         << " (reduction " << stats.reduction_fraction * 100 << "%)";
  if (stats.reduction_fraction < 0.5) return bad(detail.str() + ", needs >= 50%");
  return ok(detail.str());
}

// ---- criterion 7: determinism ----------------------------------------------

int run_shell(const std::string& cmd) {
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_determinism() {
  testutil::TempDir dir;
  std::ostringstream dataset;
  dataset << "[";
  for (int r = 0; r < 8; ++r) {
    if (r) dataset << ",";
    dataset << R"({"sql": ["SELECT NAME FROM CITY WHERE AREA = area)" << r
            << R"( AND POP < 100 ;"], "sentences": [)";
    for (int s = 0; s < 3; ++s) {
      const char* key = s == 0 ? "train" : (s == 1 ? "valid" : "test");
      if (s) dataset << ",";
      dataset << R"({"text": "question )" << r << '.' << s << R"(", "question-split": ")"
              << key << R"(", "variables": {"area)" << r << R"(": ")" << 100 + r
              << R"("}})";
    }
    dataset << R"(], "query-split": "train", "variables": [{"name": "area)" << r
            << R"(", "type": "num"}]})";
  }
  dataset << "]";
  testutil::write_file(dir.file("data.json"), dataset.str());

  auto pipeline = [&](const std::string& sub, int threads) -> bool {
    std::filesystem::path out = dir.file(sub);
    std::filesystem::create_directories(out);
    std::string env = "OMP_NUM_THREADS=" + std::to_string(threads) + " ";
    std::string cli = std::string(SQLBPE_CLI_PATH);
    std::string prefix = env + cli + " ";
    if (run_shell(prefix + "ingest --json " + dir.file("data.json").string() +
                  " --split question --anonymize --out-dir " + out.string() +
                  " >/dev/null"))
      return false;
    if (run_shell(prefix + "train --train " + (out / "train.txt").string() + " --valid " +
                  (out / "valid.txt").string() + " --mode ast -m 1 -r 5 --out " +
                  (out / "merges.bpe").string() + " --report " +
                  (out / "report.json").string() + " >/dev/null"))
      return false;
    if (run_shell(prefix + "encode --table " + (out / "merges.bpe").string() + " --in " +
                  (out / "train.txt").string() + " --out " + (out / "enc.txt").string()))
      return false;
    if (run_shell(prefix + "stats --train " + (out / "train.txt").string() + " --valid " +
                  (out / "valid.txt").string() + " --test " + (out / "test.txt").string() +
                  " --table " + (out / "merges.bpe").string() + " --json > " +
                  (out / "stats.json").string()))
      return false;
    return true;
  };

  if (!pipeline("one", 1)) return bad("pipeline run with 1 thread failed");
  if (!pipeline("four", 4)) return bad("pipeline run with 4 threads failed");

  for (const char* name : {"train.txt", "valid.txt", "test.txt", "merges.bpe",
                           "report.json", "enc.txt", "stats.json"}) {
    std::string a = testutil::read_file(dir.file("one") / name);
    std::string b = testutil::read_file(dir.file("four") / name);
    if (a.empty()) return bad(std::string(name) + " is empty");
    if (a != b) return bad(std::string(name) + " differs between thread counts");
  }
  return ok("ingest/train/encode/stats byte-identical with 1 and 4 threads");
}

// ---- criterion 8 (optional): public dataset quantities ----------------------

std::filesystem::path dataset_dir() {
  if (const char* env = std::getenv("SQLBPE_DATA_DIR")) return env;
  return "data";
}

Outcome criterion_datasets() {
  namespace fs = std::filesystem;
  fs::path dir = dataset_dir();
  fs::path advising = dir / "advising.json";
  fs::path atis = dir / "atis.json";
  fs::path geography = dir / "geography.json";
  if (!fs::exists(advising) || !fs::exists(atis) || !fs::exists(geography)) {
    return skipped("public datasets not found under '" + dir.string() +
                   "' (advising.json, atis.json, geography.json)");
  }

  std::ostringstream detail;

  {  // anonymized advising vocabulary: 177 unique tokens
    TokenInterner interner;
    auto records = load_dataset_json(advising);
    auto split = build_split(records, SplitMode::question, true, {}, interner);
    Corpus both = split.train;
    for (auto& query : split.valid.queries) both.queries.push_back(query);
    std::size_t vocab = vocabulary(both, 1).size();
    detail << "advising vocab " << vocab;
    if (vocab != 177) return bad(detail.str() + " (expected exactly 177)");
  }

  {  // advising query split, AST BPE: mean train length reduced by > 44%
    TokenInterner interner;
    auto records = load_dataset_json(advising);
    auto split = build_split(records, SplitMode::query, true, {}, interner);
    AstContext trees{parse_corpus(split.train), parse_corpus(split.valid)};
    TrainerConfig config{.retention_steps = 20, .min_count = 300, .mode = TrainMode::ast};
    auto result = train(split.train, split.valid, config, &trees, interner);
    LengthStats stats = length_stats(split.train, result.encoded_train);
    detail << "; advising reduction " << stats.reduction_fraction;
    if (stats.reduction_fraction <= 0.44) return bad(detail.str() + " (needs > 0.44)");
  }

  {  // unseen-pattern rates on the query splits
    TokenInterner interner;
    auto atis_split =
        build_split(load_dataset_json(atis), SplitMode::query, true, {}, interner);
    double atis_rate = unseen_pattern_rate(atis_split.train, atis_split.test);
    detail << "; atis unseen " << atis_rate;
    if (atis_rate < 0.4784 - 0.05 || atis_rate > 0.4784 + 0.05)
      return bad(detail.str() + " (expected 0.4784 +/- 0.05)");

    auto geo_split =
        build_split(load_dataset_json(geography), SplitMode::query, true, {}, interner);
    double geo_rate = unseen_pattern_rate(geo_split.train, geo_split.test);
    detail << "; geography unseen " << geo_rate;
    if (geo_rate < 0.0549 - 0.02 || geo_rate > 0.0549 + 0.02)
      return bad(detail.str() + " (expected 0.0549 +/- 0.02)");
  }

  return ok(detail.str());
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"roundtrip-law", criterion_roundtrip},
      {"oracle-equivalence", criterion_oracle_equivalence},
      {"stopping-criterion", criterion_stopping},
      {"acceptance-safety", criterion_safety},
      {"ast-soundness", criterion_ast_soundness},
      {"compression-proxy", criterion_compression},
      {"determinism", criterion_determinism},
      {"dataset-quantities (optional)", criterion_datasets},
  };

  int failures = 0;
  int index = 0;
  for (const auto& criterion : criteria) {
    ++index;
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = bad(std::string("exception: ") + e.what());
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* label = outcome.status == Outcome::pass   ? "PASS"
                        : outcome.status == Outcome::skip ? "SKIP"
                                                          : "FAIL";
    std::printf("%s  criterion %d  %-30s (%6.2fs)  %s\n", label, index, criterion.name,
                seconds, outcome.detail.c_str());
    if (outcome.status == Outcome::fail) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
