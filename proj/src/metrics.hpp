// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "corpus.hpp"
#include "graph.hpp"
#include "params.hpp"

namespace sessrec {

// Aggregated ranking quality. hr and mrr are fractions in [0, 1] keyed by k.
struct RankingResult {
  std::map<int, double> hr;
  std::map<int, double> mrr;
  std::int64_t n_instances = 0;
};

inline const std::vector<int>& default_ks() {
  static const std::vector<int> ks{3, 5, 10};
  return ks;
}

// 1-based rank of the target under descending score, ties broken by
// ascending item index.
int rank_of_target(std::span<const double> scores, int target);

RankingResult aggregate_ranks(std::span<const int> ranks,
                              std::span<const int> ks);

// Scores prefix instances with fixed parameters. The heterogeneous
// propagation over the full graph is computed once at construction and
// reused for every instance.
class InstanceScorer {
 public:
  InstanceScorer(const ParameterStore& params, const TrainConfig& config,
                 const GlobalHeteroGraph& graph);

  // Unnormalized item scores (the softmax over them is rank-equivalent).
  std::vector<double> score(const PrefixInstance& instance) const;

 private:
  const ParameterStore& params_;
  const TrainConfig& config_;
  ad::Tensor hetero_items_;
  ad::Tensor hetero_users_;
};

// Expands the sessions into prefix instances and ranks the target of each.
RankingResult evaluate_model(const ParameterStore& params,
                             const TrainConfig& config,
                             const GlobalHeteroGraph& graph,
                             std::span<const Session> sessions,
                             std::span<const int> ks);

// Ranks items by training frequency, ties by index.
RankingResult popularity_baseline(const Corpus& corpus, std::span<const int> ks);

// Scores successors of the prefix's last item by global transition counts,
// falling back to popularity for unseen last items.
RankingResult markov_baseline(const Corpus& corpus, std::span<const int> ks);

// metrics.json, percentages with two decimals.
void write_metrics_json(const RankingResult& result, const std::string& path);

}  // namespace sessrec
