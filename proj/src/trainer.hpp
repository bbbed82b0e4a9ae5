// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "corpus.hpp"
#include "metrics.hpp"
#include "params.hpp"

namespace sessrec {

// First/second moment buffers per parameter plus the shared step counter.
class AdamState {
 public:
  explicit AdamState(double beta1 = 0.9, double beta2 = 0.999,
                     double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One bias-corrected update from the gradients currently stored in the
  // parameter tensors.
  void step(ParameterStore& params, double lr);

  std::int64_t t() const { return t_; }

 private:
  double beta1_;
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      moments_;
};

struct EpochReport {
  int epoch = 0;
  double train_loss = 0.0;
  double recom_loss = 0.0;
  double cont_loss = 0.0;
  std::map<int, double> val_hr;   // fractions; empty when no validation split
  std::map<int, double> val_mrr;
  double wall_s = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  ParameterStore params;  // best epoch by validation MRR@10 (last if none)
  std::vector<EpochReport> reports;
  int best_epoch = 0;
  TrainConfig config;
};

// Full training loop: shuffled prefix-instance batches, local GGNN exposed to
// the readout, heterogeneous propagation refreshed every step, user-session
// attention over each user's in-batch sessions, gated fusion, the blended
// loss, and Adam with stepwise learning-rate decay. Deterministic for a
// given (corpus, config).
TrainResult train(const Corpus& corpus, const TrainConfig& config);

// Writes checkpoint.bin, reports.jsonl and config.json into out_dir.
void save_run(const TrainResult& result, const std::string& out_dir);

struct SweepEntry {
  TrainConfig config;
  RankingResult validation;
};

// Evaluates the Cartesian product of the grid's field values over the base
// config. Entries come back ranked by validation MRR@10 descending, ties by
// HR@10, then enumeration order. All runs share the base seed unless the
// grid overrides it.
std::vector<SweepEntry> grid_search(const Corpus& corpus,
                                    const TrainConfig& base,
                                    const nlohmann::json& grid);

// sweep.csv: config_hash, lambda, neg_ratio, hr3, hr5, hr10, mrr3, mrr5,
// mrr10 (percentages, two decimals), in ranked order.
void write_sweep_csv(const std::vector<SweepEntry>& entries,
                     const std::string& path);

}  // namespace sessrec
