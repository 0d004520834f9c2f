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

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sqlbpe/corpus.hpp"
#include "sqlbpe/merges.hpp"
#include "sqlbpe/sqlast.hpp"

namespace sqlbpe {

struct TrainerConfig {
  int retention_steps = 20;  // r: rejected candidates tolerated before stopping
  int min_count = 100;       // m: required training-set occurrences for valid-set tokens
  TrainMode mode = TrainMode::plain;
  int max_steps = 10000;     // safety cap on accepted merges
};

enum class StopReason { retention_exhausted, no_bigrams, max_steps };

std::string_view to_string(StopReason reason);

struct RejectedPair {
  std::string left;
  std::string right;
  int step = 0;  // candidate index (accepted + rejected so far) when rejected
};

struct TrainReport {
  std::vector<MergeRule> accepted;
  std::vector<RejectedPair> rejected;  // size == r iff retention_exhausted
  StopReason stop_reason = StopReason::no_bigrams;
};

// A token in mid-training: its current text and the inclusive range of
// original leaf indices it covers. Within a query the spans are disjoint,
// ordered, and tile [0, original_length - 1].
struct WorkingToken {
  std::string text;
  int span_start = 0;
  int span_end = 0;

  bool operator==(const WorkingToken&) const = default;
};

using WorkingQuery = std::vector<WorkingToken>;

struct WorkingCorpus {
  std::vector<WorkingQuery> queries;
  std::vector<std::string> source_ids;

  static WorkingCorpus from(const Corpus& corpus);
  Corpus to_corpus(CorpusRole role, TokenInterner& interner) const;
};

using TokenPair = std::pair<std::string, std::string>;

struct TokenPairHash {
  std::size_t operator()(const TokenPair& p) const {
    std::size_t h = std::hash<std::string>{}(p.first);
    return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

using PairCounts = std::unordered_map<TokenPair, long, TokenPairHash>;

// Parse trees over the original token sequences, one per query, required
// in ast mode for both corpora.
struct AstContext {
  std::vector<AstTree> train_trees;
  std::vector<AstTree> valid_trees;
};

// Counts maximal non-overlapping left-to-right occurrences of each
// adjacent pair per query, so a count equals the number of replacements
// replace_pair would perform. In ast mode an occurrence counts only if
// the union of the two spans is tree-aligned. Computed as a parallel
// reduction over queries; the result equals the sequential count exactly.
PairCounts pair_counts(const WorkingCorpus& corpus, TrainMode mode,
                       std::span<const AstTree> trees = {});

// Highest count wins; ties break lexicographically on (left, right).
// Blacklisted pairs and zero counts are skipped; nullopt when no
// candidate remains.
std::optional<TokenPair> pair_with_max_count(const PairCounts& counts,
                                             const std::set<TokenPair>& blacklist);

// Replaces occurrences of the pair with one token named merged_text whose
// span is the union of the two. In ast mode only tree-aligned occurrences
// are replaced, in the validation corpus too (with its own trees).
void replace_pair(WorkingCorpus& train, WorkingCorpus& valid, const TokenPair& pair,
                  const std::string& merged_text, TrainMode mode,
                  std::span<const AstTree> train_trees = {},
                  std::span<const AstTree> valid_trees = {});

// Single-corpus form of the above.
void replace_pair_in(WorkingCorpus& corpus, const TokenPair& pair,
                     const std::string& merged_text, TrainMode mode,
                     std::span<const AstTree> trees = {});

// True iff |vocabulary(valid', 1) \ vocabulary(train', m)| strictly grows,
// where the primed corpora are the hypothetical result of replace_pair.
// Computed incrementally (only the pair's tokens and the merged token can
// change membership) but matches the literal set definition exactly.
bool adds_new_oov(const WorkingCorpus& train, const WorkingCorpus& valid,
                  const TokenPair& pair, long min_count, TrainMode mode,
                  std::span<const AstTree> train_trees = {},
                  std::span<const AstTree> valid_trees = {});

// Per-candidate instrumentation. The OOV counts are recomputed literally
// from the working corpora (an independent route from the trainer's
// incremental bookkeeping); for a rejected candidate oov_after is the
// hypothetical count the replacement would have produced.
struct StepTrace {
  TokenPair candidate;
  bool accepted = false;
  long oov_before = 0;
  long oov_after = 0;
};

using StepObserver = std::function<void(const StepTrace&)>;

struct TrainResult {
  MergeTable table;
  TrainReport report;
  Corpus encoded_train;
  Corpus encoded_valid;
};

// The stopping-criterion trainer. Loop: stop when the rejection budget r
// is spent, no non-blacklisted bigram remains, or max_steps merges were
// accepted; otherwise take the most common pair, reject it (and blacklist
// it) if it would add a new out-of-vocabulary token, else append it to the
// rule list and replace it in both corpora. Deterministic for identical
// inputs and config regardless of internal parallelism.
TrainResult train(const Corpus& train_set, const Corpus& valid_set,
                  const TrainerConfig& config, const AstContext* trees,
                  TokenInterner& interner, const StepObserver& observer = {});

}  // namespace sqlbpe
