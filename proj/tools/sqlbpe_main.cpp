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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sqlbpe/bpetrain.hpp"
#include "sqlbpe/codec.hpp"
#include "sqlbpe/corpus.hpp"
#include "sqlbpe/metrics.hpp"
#include "sqlbpe/sqlast.hpp"

namespace {

using namespace sqlbpe;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBadData = 2;    // unreadable or malformed inputs
constexpr int kExitParse = 3;      // SQL that ast mode cannot parse
constexpr int kExitUndecodable = 4;

struct IngestArgs {
  std::string json_path;
  std::string split = "question";
  bool anonymize = false;
  std::string out_dir;
  std::string valid_fold;
  std::string test_fold;
};

int cmd_ingest(const IngestArgs& args) {
  if (args.split != "question" && args.split != "query") {
    std::cerr << "ingest: unknown split '" << args.split << "' (use question or query)\n";
    return kExitBadData;
  }
  SplitKeyMap keys;
  if (!args.valid_fold.empty()) keys.valid_fold = args.valid_fold;
  if (!args.test_fold.empty()) keys.test_fold = args.test_fold;

  auto records = load_dataset_json(args.json_path);
  TokenInterner interner;
  SplitMode mode = args.split == "question" ? SplitMode::question : SplitMode::query;
  SplitCorpora split = build_split(records, mode, args.anonymize, keys, interner);

  std::filesystem::create_directories(args.out_dir);
  std::filesystem::path dir(args.out_dir);
  save_plaintext(split.train, dir / "train.txt");
  save_plaintext(split.valid, dir / "valid.txt");
  save_plaintext(split.test, dir / "test.txt");
  std::cout << "wrote " << split.train.queries.size() << " train, "
            << split.valid.queries.size() << " valid, " << split.test.queries.size()
            << " test queries to " << args.out_dir << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string train_path;
  std::string valid_path;
  std::string mode = "plain";
  TrainerConfig config;
  std::string out_path;
  std::string report_path;
};

ordered_json report_json(const TrainerConfig& config, const TrainReport& report) {
  ordered_json j;
  j["mode"] = std::string(to_string(config.mode));
  j["r"] = config.retention_steps;
  j["m"] = config.min_count;
  j["max_steps"] = config.max_steps;
  j["stop_reason"] = std::string(to_string(report.stop_reason));
  j["accepted"] = ordered_json::array();
  for (const auto& rule : report.accepted) {
    j["accepted"].push_back({{"left", rule.left},
                             {"right", rule.right},
                             {"merged", rule.merged},
                             {"step_index", rule.step_index}});
  }
  j["rejected"] = ordered_json::array();
  for (const auto& r : report.rejected)
    j["rejected"].push_back({{"left", r.left}, {"right", r.right}, {"step", r.step}});
  return j;
}

int cmd_train(const TrainArgs& args) {
  if (args.mode != "plain" && args.mode != "ast") {
    std::cerr << "train: unknown mode '" << args.mode << "' (use plain or ast)\n";
    return kExitBadData;
  }
  TrainerConfig config = args.config;
  config.mode = args.mode == "plain" ? TrainMode::plain : TrainMode::ast;

  TokenInterner interner;
  Corpus train_set = load_plaintext(args.train_path, interner, CorpusRole::train);
  Corpus valid_set = load_plaintext(args.valid_path, interner, CorpusRole::valid);

  std::optional<AstContext> trees;
  if (config.mode == TrainMode::ast)
    trees = AstContext{parse_corpus(train_set), parse_corpus(valid_set)};

  TrainResult result =
      train(train_set, valid_set, config, trees ? &*trees : nullptr, interner);
  save_table(result.table, args.out_path);

  if (!args.report_path.empty()) {
    std::ofstream out(args.report_path, std::ios::binary);
    if (!out) throw IngestError("cannot write report " + args.report_path);
    out << report_json(config, result.report).dump(2) << '\n';
  }
  std::cout << "accepted " << result.report.accepted.size() << " merges, rejected "
            << result.report.rejected.size() << " (stop: "
            << to_string(result.report.stop_reason) << ")\n";
  return kExitOk;
}

struct CodecArgs {
  std::string table_path;
  std::string in_path;
  std::string out_path;
};

int cmd_encode(const CodecArgs& args) {
  MergeTable table = load_table(args.table_path);
  TokenInterner interner;
  Corpus corpus = load_plaintext(args.in_path, interner);
  save_plaintext(encode(corpus, table, interner), args.out_path);
  return kExitOk;
}

int cmd_decode(const CodecArgs& args) {
  MergeTable table = load_table(args.table_path);
  TokenInterner interner;
  Corpus corpus = load_plaintext(args.in_path, interner);
  save_plaintext(decode(corpus, table, interner), args.out_path);
  return kExitOk;
}

struct StatsArgs {
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string table_path;
  long min_count = 1;
  bool as_json = false;
  bool dump_ast = false;
};

int cmd_stats(const StatsArgs& args) {
  TokenInterner interner;
  Corpus train_set = load_plaintext(args.train_path, interner, CorpusRole::train);

  if (args.dump_ast) {
    for (const auto& query : train_set.queries) {
      AstTree tree = parse(query.tokens);
      std::cout << to_sexpr(tree, query.tokens) << '\n';
    }
  }

  ordered_json j;
  j["train_queries"] = train_set.queries.size();
  long train_tokens = 0;
  for (const auto& q : train_set.queries) train_tokens += static_cast<long>(q.tokens.size());
  j["train_tokens"] = train_tokens;
  j["vocab_size"] = vocabulary(train_set, 1).size();

  if (!args.valid_path.empty()) {
    Corpus valid_set = load_plaintext(args.valid_path, interner, CorpusRole::valid);
    OovReport oov = oov_report(train_set, valid_set, args.min_count);
    j["oov_count"] = oov.count;
    j["oov_tokens"] = ordered_json::array();
    for (const auto& token : oov.tokens) j["oov_tokens"].push_back(token);
  }

  if (!args.table_path.empty()) {
    MergeTable table = load_table(args.table_path);
    Corpus encoded = encode(train_set, table, interner);
    LengthStats stats = length_stats(train_set, encoded);
    j["mean_len_before"] = stats.mean_before;
    j["mean_len_after"] = stats.mean_after;
    j["reduction"] = stats.reduction_fraction;
  }

  if (!args.test_path.empty()) {
    Corpus test_set = load_plaintext(args.test_path, interner, CorpusRole::test);
    j["unseen_pattern_rate"] = unseen_pattern_rate(train_set, test_set);
  }

  if (args.as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& [key, value] : j.items()) std::cout << key << '=' << value.dump() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-level BPE for SQL query corpora"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  CLI::App* ingest = app.add_subcommand(
      "ingest", "Split a dataset JSON file into plain-text train/valid/test corpora");
  ingest->add_option("--json", ingest_args.json_path, "dataset JSON file")->required();
  ingest->add_option("--split", ingest_args.split, "question or query")->required();
  ingest->add_flag("--anonymize", ingest_args.anonymize,
                   "keep variable placeholders instead of substituting bindings");
  ingest->add_option("--out-dir", ingest_args.out_dir, "output directory")->required();
  ingest->add_option("--valid-fold", ingest_args.valid_fold,
                     "numeric fold id treated as the validation set");
  ingest->add_option("--test-fold", ingest_args.test_fold,
                     "numeric fold id treated as the test set");

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Learn a merge table with the stopping criterion");
  train_cmd->add_option("--train", train_args.train_path, "training corpus")->required();
  train_cmd->add_option("--valid", train_args.valid_path, "validation corpus")->required();
  train_cmd->add_option("--mode", train_args.mode, "plain or ast (default plain)");
  train_cmd->add_option("-r,--retention-steps", train_args.config.retention_steps,
                        "tolerated rejections before stopping (default 20)");
  train_cmd->add_option("-m,--min-count", train_args.config.min_count,
                        "minimum training-set count for validation tokens (default 100)");
  train_cmd->add_option("--max-steps", train_args.config.max_steps,
                        "safety cap on accepted merges");
  train_cmd->add_option("--out", train_args.out_path, "merge table file")->required();
  train_cmd->add_option("--report", train_args.report_path, "write a JSON training report");

  CodecArgs encode_args;
  CLI::App* encode_cmd = app.add_subcommand("encode", "Apply a merge table to a corpus");
  encode_cmd->add_option("--table", encode_args.table_path, "merge table")->required();
  encode_cmd->add_option("--in", encode_args.in_path, "input corpus")->required();
  encode_cmd->add_option("--out", encode_args.out_path, "output corpus")->required();

  CodecArgs decode_args;
  CLI::App* decode_cmd = app.add_subcommand("decode", "Expand merged tokens back");
  decode_cmd->add_option("--table", decode_args.table_path, "merge table")->required();
  decode_cmd->add_option("--in", decode_args.in_path, "input corpus")->required();
  decode_cmd->add_option("--out", decode_args.out_path, "output corpus")->required();

  StatsArgs stats_args;
  CLI::App* stats_cmd = app.add_subcommand("stats", "Corpus and encoding statistics");
  stats_cmd->add_option("--train", stats_args.train_path, "training corpus")->required();
  stats_cmd->add_option("--valid", stats_args.valid_path, "validation corpus");
  stats_cmd->add_option("--test", stats_args.test_path, "test corpus");
  stats_cmd->add_option("--table", stats_args.table_path, "merge table for length stats");
  stats_cmd->add_option("-m,--min-count", stats_args.min_count,
                        "minimum count for the OOV report (default 1)");
  stats_cmd->add_flag("--json", stats_args.as_json, "emit one JSON object");
  stats_cmd->add_flag("--dump-ast", stats_args.dump_ast,
                      "print one S-expression per training query");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_args);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (encode_cmd->parsed()) return cmd_encode(encode_args);
    if (decode_cmd->parsed()) return cmd_decode(decode_args);
    if (stats_cmd->parsed()) return cmd_stats(stats_args);
  } catch (const DecodeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUndecodable;
  } catch (const SqlParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
