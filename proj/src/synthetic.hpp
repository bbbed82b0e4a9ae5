// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"

namespace sessrec {

struct SyntheticConfig {
  int n_users = 50;
  int n_items = 200;
  int n_clusters = 4;
  int sessions_per_user = 100;
  double mean_session_len = 8.0;
  std::uint64_t seed = 7;

  void validate() const;
};

// Planted-preference generator. Users are partitioned into clusters; each
// cluster owns a contiguous item block and a cluster-specific first-order
// transition matrix. Sessions are random walks under the owning cluster's
// transitions. Deterministic for a given seed.
struct SyntheticResult {
  Corpus corpus;
  std::vector<int> user_cluster;  // cluster id per user index
  std::vector<int> item_cluster;  // cluster id per item index
};

SyntheticResult generate_synthetic(const SyntheticConfig& config);

// Writes the corpus directory plus a clusters.json sidecar with the
// user/item cluster assignments.
void save_synthetic(const SyntheticResult& result, const SyntheticConfig& config,
                    const std::string& dir);

}  // namespace sessrec
