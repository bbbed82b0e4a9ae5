// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "corpus_io.hpp"
#include "error.hpp"

namespace sessrec {

namespace {

std::string padded(const char* prefix, int value, int width) {
  std::string digits = std::to_string(value);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return prefix + digits;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_users <= 0 || n_items <= 0 || n_clusters <= 0 || sessions_per_user <= 0) {
    throw ConfigError("synth: all counts must be positive");
  }
  if (n_clusters > n_users) {
    throw ConfigError("synth: n_clusters must not exceed n_users");
  }
  if (n_items < n_clusters) {
    throw ConfigError("synth: need at least one item per cluster");
  }
  if (mean_session_len < 2.0) {
    throw ConfigError("synth: mean_session_len must be >= 2");
  }
}

SyntheticResult generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);

  SyntheticResult result;
  result.user_cluster.resize(config.n_users);
  result.item_cluster.resize(config.n_items);
  for (int u = 0; u < config.n_users; ++u) {
    result.user_cluster[u] = static_cast<int>(
        static_cast<std::int64_t>(u) * config.n_clusters / config.n_users);
  }

  // Contiguous item block per cluster.
  std::vector<std::pair<int, int>> item_range(config.n_clusters);
  for (int c = 0; c < config.n_clusters; ++c) {
    const int lo = static_cast<int>(static_cast<std::int64_t>(c) *
                                    config.n_items / config.n_clusters);
    const int hi = static_cast<int>(static_cast<std::int64_t>(c + 1) *
                                    config.n_items / config.n_clusters);
    item_range[c] = {lo, hi};
    for (int i = lo; i < hi; ++i) result.item_cluster[i] = c;
  }

  // Per-item successor lists with geometric weight decay. A dozen plausible
  // successors keeps the chain learnable without making the first-order
  // oracle saturate HR@5.
  struct SuccessorDist {
    std::vector<int> items;
    std::vector<double> cumulative;
  };
  std::vector<SuccessorDist> transitions(config.n_items);
  for (int c = 0; c < config.n_clusters; ++c) {
    const auto [lo, hi] = item_range[c];
    const int block = hi - lo;
    const int n_succ = std::min(12, block);
    std::vector<int> pool(block);
    for (int i = 0; i < block; ++i) pool[i] = lo + i;
    for (int item = lo; item < hi; ++item) {
      std::vector<int> shuffled = pool;
      for (int j = 0; j < n_succ; ++j) {
        std::uniform_int_distribution<int> pick(j, block - 1);
        std::swap(shuffled[j], shuffled[pick(rng)]);
      }
      SuccessorDist dist;
      dist.items.assign(shuffled.begin(), shuffled.begin() + n_succ);
      double total = 0.0;
      double w = 1.0;
      for (int j = 0; j < n_succ; ++j, w *= 0.85) {
        total += w;
        dist.cumulative.push_back(total);
      }
      for (double& x : dist.cumulative) x /= total;
      transitions[item] = std::move(dist);
    }
  }

  Corpus corpus;
  const int user_width = static_cast<int>(std::to_string(config.n_users - 1).size());
  const int item_width = static_cast<int>(std::to_string(config.n_items - 1).size());
  for (int u = 0; u < config.n_users; ++u) {
    corpus.user_vocab.add(padded("user_", u, user_width));
  }
  for (int i = 0; i < config.n_items; ++i) {
    corpus.item_vocab.add(padded("item_", i, item_width));
  }

  std::poisson_distribution<int> extra_len(config.mean_session_len - 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int u = 0; u < config.n_users; ++u) {
    const int c = result.user_cluster[u];
    const auto [lo, hi] = item_range[c];
    std::uniform_int_distribution<int> start_item(lo, hi - 1);
    std::vector<Session> sessions;
    sessions.reserve(config.sessions_per_user);
    for (int s = 0; s < config.sessions_per_user; ++s) {
      Session session;
      session.user_index = u;
      session.start_time = static_cast<std::int64_t>(s) * 86400;
      const int len = 2 + extra_len(rng);
      int current = start_item(rng);
      session.items.push_back(current);
      for (int k = 1; k < len; ++k) {
        const SuccessorDist& dist = transitions[current];
        const double r = unit(rng);
        const auto it = std::lower_bound(dist.cumulative.begin(),
                                         dist.cumulative.end(), r);
        const int pos = static_cast<int>(
            std::min<std::ptrdiff_t>(it - dist.cumulative.begin(),
                                     static_cast<std::ptrdiff_t>(dist.items.size()) - 1));
        current = dist.items[pos];
        session.items.push_back(current);
      }
      sessions.push_back(std::move(session));
    }
    const int n = static_cast<int>(sessions.size());
    const int n_train = static_cast<int>(std::ceil(0.8 * n));
    for (int i = 0; i < n; ++i) {
      (i < n_train ? corpus.train_sessions : corpus.test_sessions)
          .push_back(std::move(sessions[i]));
    }
  }

  result.corpus = std::move(corpus);
  return result;
}

void save_synthetic(const SyntheticResult& result, const SyntheticConfig& config,
                    const std::string& dir) {
  nlohmann::json echo;
  echo["n_users"] = config.n_users;
  echo["n_items"] = config.n_items;
  echo["n_clusters"] = config.n_clusters;
  echo["sessions_per_user"] = config.sessions_per_user;
  echo["mean_session_len"] = config.mean_session_len;
  echo["seed"] = config.seed;
  save_corpus(result.corpus, dir, echo);

  nlohmann::json clusters;
  clusters["format_version"] = 1;
  clusters["user_cluster"] = result.user_cluster;
  clusters["item_cluster"] = result.item_cluster;
  std::ofstream os(std::filesystem::path(dir) / "clusters.json",
                   std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write clusters.json in '" + dir + "'");
  os << clusters.dump(2) << '\n';
}

}  // namespace sessrec
