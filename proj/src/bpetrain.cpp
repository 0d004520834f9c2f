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

#include "sqlbpe/bpetrain.hpp"

#include <stdexcept>

namespace sqlbpe {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::retention_exhausted: return "retention_exhausted";
    case StopReason::no_bigrams: return "no_bigrams";
    case StopReason::max_steps: return "max_steps";
  }
  return "?";
}

WorkingCorpus WorkingCorpus::from(const Corpus& corpus) {
  WorkingCorpus out;
  out.queries.reserve(corpus.queries.size());
  out.source_ids.reserve(corpus.queries.size());
  for (const auto& query : corpus.queries) {
    WorkingQuery wq;
    wq.reserve(query.tokens.size());
    for (std::size_t i = 0; i < query.tokens.size(); ++i)
      wq.push_back(WorkingToken{query.tokens[i].text, static_cast<int>(i), static_cast<int>(i)});
    out.queries.push_back(std::move(wq));
    out.source_ids.push_back(query.source_id);
  }
  return out;
}

Corpus WorkingCorpus::to_corpus(CorpusRole role, TokenInterner& interner) const {
  Corpus out;
  out.role = role;
  out.queries.reserve(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    QuerySeq query;
    query.source_id = qi < source_ids.size() ? source_ids[qi] : "";
    query.tokens.reserve(queries[qi].size());
    for (const auto& wt : queries[qi]) query.tokens.push_back(make_token(wt.text, interner));
    out.queries.push_back(std::move(query));
  }
  return out;
}

namespace {

void check_trees(const WorkingCorpus& corpus, std::span<const AstTree> trees,
                 const char* where) {
  if (trees.size() != corpus.queries.size())
    throw std::invalid_argument(std::string(where) + ": ast mode needs one tree per query");
  for (std::size_t qi = 0; qi < corpus.queries.size(); ++qi) {
    const auto& q = corpus.queries[qi];
    int leaves = q.empty() ? 0 : q.back().span_end + 1;
    if (trees[qi].leaf_count != leaves)
      throw std::invalid_argument(std::string(where) + ": tree " + std::to_string(qi) +
                                  " does not cover its query");
  }
}

bool pair_occurrence_allowed(const WorkingQuery& q, std::size_t i, const AstTree* tree) {
  return !tree || is_tree_aligned(*tree, q[i].span_start, q[i + 1].span_end);
}

// One left-to-right pass counting every pair as its own greedy scan would:
// a counted occurrence of a self-pair (x, x) consumes both positions, so
// the next overlapping match is skipped. Distinct-token pairs cannot
// overlap themselves, and two self-pair matches of different tokens are
// never adjacent, so a single blocked slot is enough.
void accumulate_query(const WorkingQuery& q, const AstTree* tree, PairCounts& counts) {
  std::size_t blocked_until = 0;
  const std::string* blocked_text = nullptr;
  for (std::size_t i = 0; i + 1 < q.size(); ++i) {
    const std::string& left = q[i].text;
    const std::string& right = q[i + 1].text;
    if (left == right && blocked_text && *blocked_text == left && i < blocked_until) continue;
    if (!pair_occurrence_allowed(q, i, tree)) continue;
    ++counts[TokenPair{left, right}];
    if (left == right) {
      blocked_text = &left;
      blocked_until = i + 2;
    }
  }
}

long count_pair_in_query(const WorkingQuery& q, const TokenPair& pair, const AstTree* tree) {
  long count = 0;
  std::size_t i = 0;
  while (i + 1 < q.size()) {
    if (q[i].text == pair.first && q[i + 1].text == pair.second &&
        pair_occurrence_allowed(q, i, tree)) {
      ++count;
      i += 2;
    } else {
      ++i;
    }
  }
  return count;
}

void replace_in_query(WorkingQuery& q, const TokenPair& pair, const std::string& merged,
                      const AstTree* tree) {
  WorkingQuery out;
  out.reserve(q.size());
  std::size_t i = 0;
  while (i < q.size()) {
    if (i + 1 < q.size() && q[i].text == pair.first && q[i + 1].text == pair.second &&
        pair_occurrence_allowed(q, i, tree)) {
      out.push_back(WorkingToken{merged, q[i].span_start, q[i + 1].span_end});
      i += 2;
    } else {
      out.push_back(std::move(q[i]));
      ++i;
    }
  }
  q = std::move(out);
}

long count_of(const std::unordered_map<std::string, long>& counts, const std::string& key) {
  auto it = counts.find(key);
  return it == counts.end() ? 0 : it->second;
}

std::unordered_map<std::string, long> working_token_counts(const WorkingCorpus& corpus) {
  std::unordered_map<std::string, long> counts;
  for (const auto& q : corpus.queries)
    for (const auto& wt : q) ++counts[wt.text];
  return counts;
}

// |vocabulary(valid, 1) \ vocabulary(train, m)| evaluated literally.
long literal_oov_count(const std::unordered_map<std::string, long>& train_counts,
                       const std::unordered_map<std::string, long>& valid_counts, long m) {
  long count = 0;
  for (const auto& [text, c] : valid_counts)
    if (c >= 1 && count_of(train_counts, text) < m) ++count;
  return count;
}

// Change of the OOV set size if the pair were replaced ct times in train
// and cv times in valid. Only the pair's tokens and the merged token can
// change membership; the merged name is strictly longer than either side,
// so the three are distinct except for self-pairs.
long oov_membership_delta(const std::unordered_map<std::string, long>& train_counts,
                          const std::unordered_map<std::string, long>& valid_counts,
                          const TokenPair& pair, const std::string& merged, long ct,
                          long cv, long m) {
  auto member_delta = [&](const std::string& text, long dtrain, long dvalid) {
    long tb = count_of(train_counts, text);
    long vb = count_of(valid_counts, text);
    bool before = vb >= 1 && tb < m;
    bool after = vb + dvalid >= 1 && tb + dtrain < m;
    return (after ? 1L : 0L) - (before ? 1L : 0L);
  };
  long delta = 0;
  if (pair.first == pair.second) {
    delta += member_delta(pair.first, -2 * ct, -2 * cv);
  } else {
    delta += member_delta(pair.first, -ct, -cv);
    delta += member_delta(pair.second, -ct, -cv);
  }
  delta += member_delta(merged, ct, cv);
  return delta;
}

void bump_count(std::unordered_map<std::string, long>& counts, const std::string& key,
                long delta) {
  if (delta == 0) return;
  long& value = counts[key];
  value += delta;
  if (value == 0) counts.erase(key);
}

void apply_replacement_counts(std::unordered_map<std::string, long>& counts,
                              const TokenPair& pair, const std::string& merged, long n) {
  if (pair.first == pair.second) {
    bump_count(counts, pair.first, -2 * n);
  } else {
    bump_count(counts, pair.first, -n);
    bump_count(counts, pair.second, -n);
  }
  bump_count(counts, merged, n);
}

}  // namespace

PairCounts pair_counts(const WorkingCorpus& corpus, TrainMode mode,
                       std::span<const AstTree> trees) {
  if (mode == TrainMode::ast) check_trees(corpus, trees, "pair_counts");

  const long n = static_cast<long>(corpus.queries.size());
  PairCounts total;
#pragma omp parallel
  {
    PairCounts local;
#pragma omp for schedule(static) nowait
    for (long qi = 0; qi < n; ++qi) {
      accumulate_query(corpus.queries[qi],
                       mode == TrainMode::ast ? &trees[qi] : nullptr, local);
    }
    // merging is pure addition, so the total matches the sequential count
#pragma omp critical(sqlbpe_pair_counts_merge)
    {
      for (auto& [pair, count] : local) total[pair] += count;
    }
  }
  return total;
}

std::optional<TokenPair> pair_with_max_count(const PairCounts& counts,
                                             const std::set<TokenPair>& blacklist) {
  const TokenPair* best = nullptr;
  long best_count = 0;
  for (const auto& [pair, count] : counts) {
    if (count < 1 || blacklist.contains(pair)) continue;
    if (!best || count > best_count || (count == best_count && pair < *best)) {
      best = &pair;
      best_count = count;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

void replace_pair_in(WorkingCorpus& corpus, const TokenPair& pair,
                     const std::string& merged_text, TrainMode mode,
                     std::span<const AstTree> trees) {
  if (mode == TrainMode::ast) check_trees(corpus, trees, "replace_pair");

  const long n = static_cast<long>(corpus.queries.size());
#pragma omp parallel for schedule(static)
  for (long qi = 0; qi < n; ++qi) {
    replace_in_query(corpus.queries[qi], pair, merged_text,
                     mode == TrainMode::ast ? &trees[qi] : nullptr);
  }
}

void replace_pair(WorkingCorpus& train, WorkingCorpus& valid, const TokenPair& pair,
                  const std::string& merged_text, TrainMode mode,
                  std::span<const AstTree> train_trees,
                  std::span<const AstTree> valid_trees) {
  replace_pair_in(train, pair, merged_text, mode, train_trees);
  replace_pair_in(valid, pair, merged_text, mode, valid_trees);
}

namespace {

long replacement_count(const WorkingCorpus& corpus, const TokenPair& pair, TrainMode mode,
                       std::span<const AstTree> trees) {
  const long n = static_cast<long>(corpus.queries.size());
  long total = 0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (long qi = 0; qi < n; ++qi) {
    total += count_pair_in_query(corpus.queries[qi], pair,
                                 mode == TrainMode::ast ? &trees[qi] : nullptr);
  }
  return total;
}

}  // namespace

bool adds_new_oov(const WorkingCorpus& train, const WorkingCorpus& valid,
                  const TokenPair& pair, long min_count, TrainMode mode,
                  std::span<const AstTree> train_trees,
                  std::span<const AstTree> valid_trees) {
  if (min_count < 1) throw std::invalid_argument("adds_new_oov: min_count must be >= 1");
  if (mode == TrainMode::ast) {
    check_trees(train, train_trees, "adds_new_oov");
    check_trees(valid, valid_trees, "adds_new_oov");
  }
  auto train_counts = working_token_counts(train);
  auto valid_counts = working_token_counts(valid);
  long ct = replacement_count(train, pair, mode, train_trees);
  long cv = replacement_count(valid, pair, mode, valid_trees);
  return oov_membership_delta(train_counts, valid_counts, pair,
                              merged_name(pair.first, pair.second), ct, cv, min_count) > 0;
}

TrainResult train(const Corpus& train_set, const Corpus& valid_set,
                  const TrainerConfig& config, const AstContext* trees,
                  TokenInterner& interner, const StepObserver& observer) {
  if (config.retention_steps < 0)
    throw std::invalid_argument("train: retention_steps must be >= 0");
  if (config.min_count < 1) throw std::invalid_argument("train: min_count must be >= 1");
  if (config.max_steps < 1) throw std::invalid_argument("train: max_steps must be >= 1");
  if (config.mode == TrainMode::ast && !trees)
    throw std::invalid_argument("train: ast mode requires parse trees for both corpora");

  for (const Corpus* corpus : {&train_set, &valid_set}) {
    for (std::size_t qi = 0; qi < corpus->queries.size(); ++qi) {
      for (const auto& token : corpus->queries[qi].tokens) {
        if (contains_merge_separator(token.text))
          throw IngestError(std::string(to_string(corpus->role)) + " corpus, query " +
                            std::to_string(qi) + ": token '" + token.text +
                            "' contains the reserved separator");
      }
    }
  }

  WorkingCorpus work_train = WorkingCorpus::from(train_set);
  WorkingCorpus work_valid = WorkingCorpus::from(valid_set);

  std::span<const AstTree> train_trees, valid_trees;
  if (config.mode == TrainMode::ast) {
    train_trees = trees->train_trees;
    valid_trees = trees->valid_trees;
    check_trees(work_train, train_trees, "train");
    check_trees(work_valid, valid_trees, "train");
  }

  auto train_counts = working_token_counts(work_train);
  auto valid_counts = working_token_counts(work_valid);
  long oov_running = literal_oov_count(train_counts, valid_counts, config.min_count);

  MergeTable table;
  table.mode = config.mode;
  table.retention_steps = config.retention_steps;
  table.min_count = config.min_count;
  for (const auto& [text, count] : train_counts) table.base_vocabulary.insert(text);
  for (const auto& [text, count] : valid_counts) table.base_vocabulary.insert(text);

  TrainReport report;
  std::set<TokenPair> blacklist;
  int step = 0;

  for (;;) {
    if (static_cast<int>(report.rejected.size()) == config.retention_steps) {
      report.stop_reason = StopReason::retention_exhausted;
      break;
    }
    PairCounts counts = pair_counts(work_train, config.mode, train_trees);
    auto candidate = pair_with_max_count(counts, blacklist);
    if (!candidate) {
      report.stop_reason = StopReason::no_bigrams;
      break;
    }
    if (static_cast<int>(report.accepted.size()) == config.max_steps) {
      report.stop_reason = StopReason::max_steps;
      break;
    }

    const std::string merged = merged_name(candidate->first, candidate->second);
    const long ct = counts.at(*candidate);
    const long cv = replacement_count(work_valid, *candidate, config.mode, valid_trees);
    const long delta = oov_membership_delta(train_counts, valid_counts, *candidate, merged,
                                            ct, cv, config.min_count);

    long observed_before = 0;
    if (observer) {
      observed_before = literal_oov_count(working_token_counts(work_train),
                                          working_token_counts(work_valid),
                                          config.min_count);
      if (observed_before != oov_running)
        throw std::logic_error("train: incremental OOV bookkeeping diverged");
    }

    if (delta > 0) {
      report.rejected.push_back(RejectedPair{candidate->first, candidate->second, step});
      blacklist.insert(*candidate);
      if (observer)
        observer(StepTrace{*candidate, false, observed_before, observed_before + delta});
    } else {
      MergeRule rule{candidate->first, candidate->second, merged,
                     static_cast<int>(report.accepted.size())};
      report.accepted.push_back(rule);
      replace_pair(work_train, work_valid, *candidate, merged, config.mode, train_trees,
                   valid_trees);
      apply_replacement_counts(train_counts, *candidate, merged, ct);
      apply_replacement_counts(valid_counts, *candidate, merged, cv);
      oov_running += delta;
      if (observer) {
        long observed_after = literal_oov_count(working_token_counts(work_train),
                                                working_token_counts(work_valid),
                                                config.min_count);
        observer(StepTrace{*candidate, true, observed_before, observed_after});
      }
    }
    ++step;
  }

  table.rules = report.accepted;

  TrainResult result;
  result.encoded_train = work_train.to_corpus(train_set.role, interner);
  result.encoded_valid = work_valid.to_corpus(valid_set.role, interner);
  result.table = std::move(table);
  result.report = std::move(report);
  return result;
}

}  // namespace sqlbpe
