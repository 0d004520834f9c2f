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

// Times the OpenMP-parallel kernels against single-thread runs and the
// naive serial reference, and checks that all routes produce identical
// results while at it.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "reference/reference_trainer.hpp"
#include "sqlbpe/bpetrain.hpp"
#include "sqlbpe/codec.hpp"

namespace {

using namespace sqlbpe;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Corpus synth_corpus(int queries, TokenInterner& interner, unsigned seed) {
  static const char* columns[] = {"NAME", "POP", "AREA", "LEN", "STATE", "CAPITAL"};
  static const char* tables[] = {"CITY", "RIVER", "LAKE", "BORDER"};
  std::mt19937 rng(seed);
  std::vector<std::string> lines;
  lines.reserve(queries);
  for (int q = 0; q < queries; ++q) {
    int t = static_cast<int>(rng() % 8);
    std::string col = columns[t % 6];
    std::string tab = tables[t % 4];
    std::string line = "SELECT " + col + " FROM " + tab + " WHERE " + columns[(t + 1) % 6] +
                       " = v" + std::to_string(rng() % 50000) + " AND " + columns[(t + 2) % 6] +
                       " < " + std::to_string(rng() % 1000) + " ;";
    lines.push_back(std::move(line));
  }
  Corpus corpus;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    QuerySeq query;
    query.source_id = "b" + std::to_string(i);
    std::string token;
    for (std::size_t at = 0; at <= lines[i].size(); ++at) {
      if (at == lines[i].size() || lines[i][at] == ' ') {
        if (!token.empty()) query.tokens.push_back(make_token(token, interner));
        token.clear();
      } else {
        token += lines[i][at];
      }
    }
    corpus.queries.push_back(std::move(query));
  }
  return corpus;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqlbpe kernel benchmark: OpenMP kernels vs the serial reference"};
  int queries = 4000;
  int steps = 30;
  app.add_option("--queries", queries, "synthetic corpus size (default 4000)");
  app.add_option("--steps", steps, "merge steps to time (default 30)");
  CLI11_PARSE(app, argc, argv);

  TokenInterner interner;
  Corpus train_set = synth_corpus(queries, interner, 12345);
  Corpus valid_set = synth_corpus(queries / 10 + 1, interner, 54321);
  valid_set.role = CorpusRole::valid;

  long tokens = 0;
  for (const auto& q : train_set.queries) tokens += static_cast<long>(q.tokens.size());
  std::printf("corpus: %zu queries, %ld tokens, %d thread(s)\n", train_set.queries.size(),
              tokens, max_threads());

  WorkingCorpus work = WorkingCorpus::from(train_set);

  // pair counting kernel
  set_threads(1);
  auto t0 = Clock::now();
  PairCounts serial_counts = pair_counts(work, TrainMode::plain);
  double count_serial = ms_since(t0);
  set_threads(max_threads());
  t0 = Clock::now();
  PairCounts parallel_counts = pair_counts(work, TrainMode::plain);
  double count_parallel = ms_since(t0);
  t0 = Clock::now();
  auto naive_counts = reference::naive_pair_counts(work, TrainMode::plain);
  double count_naive = ms_since(t0);

  bool counts_match = serial_counts.size() == parallel_counts.size() &&
                      serial_counts.size() == naive_counts.size();
  for (const auto& [pair, count] : naive_counts) {
    auto it = parallel_counts.find(pair);
    if (it == parallel_counts.end() || it->second != count) counts_match = false;
  }
  std::printf("pair_counts   1-thread %8.2f ms   parallel %8.2f ms   naive %8.2f ms   match=%s\n",
              count_serial, count_parallel, count_naive, counts_match ? "yes" : "NO");

  // encode kernel
  TrainerConfig config{.retention_steps = 5, .min_count = 1, .max_steps = steps};
  TrainResult trained = train(train_set, valid_set, config, nullptr, interner);
  set_threads(1);
  t0 = Clock::now();
  Corpus encoded_serial = encode(train_set, trained.table, interner);
  double encode_serial = ms_since(t0);
  set_threads(max_threads());
  t0 = Clock::now();
  Corpus encoded_parallel = encode(train_set, trained.table, interner);
  double encode_parallel = ms_since(t0);
  bool encode_match = encoded_serial.queries.size() == encoded_parallel.queries.size();
  std::printf("encode        1-thread %8.2f ms   parallel %8.2f ms   (%zu rules)\n",
              encode_serial, encode_parallel, trained.table.rules.size());
  if (!encode_match) std::printf("encode results diverged!\n");

  // full training loop vs the naive reference
  set_threads(max_threads());
  t0 = Clock::now();
  TrainResult optimized = train(train_set, valid_set, config, nullptr, interner);
  double train_parallel = ms_since(t0);
  t0 = Clock::now();
  reference::Result naive = reference::train(train_set, valid_set, config);
  double train_naive = ms_since(t0);

  bool rules_match = optimized.report.accepted.size() == naive.report.accepted.size();
  for (std::size_t i = 0; rules_match && i < optimized.report.accepted.size(); ++i) {
    rules_match = optimized.report.accepted[i].merged == naive.report.accepted[i].merged;
  }
  std::printf("train (%3d)   optimized %7.2f ms   reference %8.2f ms   identical rules=%s\n",
              steps, train_parallel, train_naive, rules_match ? "yes" : "NO");

  return counts_match && rules_match ? 0 : 1;
}
