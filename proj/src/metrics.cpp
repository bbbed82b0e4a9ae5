// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "error.hpp"
#include "model.hpp"
#include "objective.hpp"

namespace sessrec {

int rank_of_target(std::span<const double> scores, int target) {
  if (target < 0 || target >= static_cast<int>(scores.size())) {
    throw PreconditionError("rank_of_target: target out of range");
  }
  const double t = scores[target];
  int rank = 1;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i] > t || (scores[i] == t && i < target)) ++rank;
  }
  return rank;
}

RankingResult aggregate_ranks(std::span<const int> ranks,
                              std::span<const int> ks) {
  if (ranks.empty()) throw PreconditionError("aggregate_ranks: no instances");
  RankingResult result;
  result.n_instances = static_cast<std::int64_t>(ranks.size());
  for (int k : ks) {
    std::int64_t hits = 0;
    double reciprocal = 0.0;
    for (int rank : ranks) {
      if (rank <= k) {
        ++hits;
        reciprocal += 1.0 / static_cast<double>(rank);
      }
    }
    result.hr[k] = static_cast<double>(hits) / static_cast<double>(ranks.size());
    result.mrr[k] = reciprocal / static_cast<double>(ranks.size());
  }
  return result;
}

InstanceScorer::InstanceScorer(const ParameterStore& params,
                               const TrainConfig& config,
                               const GlobalHeteroGraph& graph)
    : params_(params), config_(config) {
  if (!config.no_global) {
    ad::Tape tape;  // discarded; no backward pass during evaluation
    ad::Tensor items = params.at("item_embedding");
    ad::Tensor users = params.at("user_embedding");
    for (int k = 0; k < config.K_global; ++k) {
      HeteroStates next = hetero_step(tape, graph, items, users, params);
      items = next.items;
      users = next.users;
    }
    hetero_items_ = items;
    hetero_users_ = users;
  }
}

std::vector<double> InstanceScorer::score(const PrefixInstance& instance) const {
  ad::Tape tape;
  const LocalSessionGraph graph = build_local_graph(instance.prefix);

  ad::Tensor states =
      tape.gather_rows(params_.at("item_embedding"), graph.unique_items);
  for (int k = 0; k < config_.K_local; ++k) {
    states = ggnn_step(tape, graph, states, params_, config_.ggnn_shared_w);
  }
  SessionEmbedding local = attention_readout(tape, graph, states, params_);

  ad::Tensor s_final;
  if (config_.no_global) {
    s_final = local.s;
  } else {
    ad::Tensor global_states =
        tape.gather_rows(hetero_items_, graph.unique_items);
    SessionEmbedding global =
        attention_readout(tape, graph, global_states, params_);
    ad::Tensor u_global =
        tape.gather_rows(hetero_users_, {instance.user_index});
    if (!config_.no_simnet) {
      ad::Tensor user_emb = tape.gather_rows(params_.at("user_embedding"),
                                             {instance.user_index});
      ad::Tensor updated = user_session_attention(
          tape, user_emb, {local.s}, params_, config_.simnet_literal_eq15);
      u_global = tape.add(u_global, updated);
    }
    const ad::Tensor s_local = config_.no_local
                                   ? ad::Tensor::zeros(1, params_.d())
                                   : local.s;
    s_final = fuse(tape, s_local, global.s, u_global, params_).s_final;
  }

  ad::Tensor dots = tape.matmul_nt(s_final, params_.at("item_embedding"));
  auto v = dots.values();
  return std::vector<double>(v.begin(), v.end());
}

RankingResult evaluate_model(const ParameterStore& params,
                             const TrainConfig& config,
                             const GlobalHeteroGraph& graph,
                             std::span<const Session> sessions,
                             std::span<const int> ks) {
  if (sessions.empty()) {
    throw PreconditionError("evaluate: empty session set");
  }
  const std::vector<PrefixInstance> instances = make_prefix_instances(sessions);
  if (instances.empty()) {
    throw PreconditionError("evaluate: no prefix instances (all sessions are length 1)");
  }
  InstanceScorer scorer(params, config, graph);
  std::vector<int> ranks;
  ranks.reserve(instances.size());
  for (const PrefixInstance& inst : instances) {
    ranks.push_back(rank_of_target(scorer.score(inst), inst.target));
  }
  return aggregate_ranks(ranks, ks);
}

namespace {

std::vector<std::int64_t> item_frequencies(const Corpus& corpus) {
  std::vector<std::int64_t> freq(corpus.item_vocab.size(), 0);
  for (const Session& s : corpus.train_sessions) {
    for (int item : s.items) ++freq[item];
  }
  return freq;
}

RankingResult rank_with_scores(
    const Corpus& corpus,
    const std::function<std::vector<double>(const PrefixInstance&)>& score,
    std::span<const int> ks) {
  if (corpus.train_sessions.empty()) {
    throw PreconditionError("baseline: empty training set");
  }
  const std::vector<PrefixInstance> instances =
      make_prefix_instances(std::span<const Session>(corpus.test_sessions));
  if (instances.empty()) {
    throw PreconditionError("baseline: no test instances");
  }
  std::vector<int> ranks;
  ranks.reserve(instances.size());
  for (const PrefixInstance& inst : instances) {
    ranks.push_back(rank_of_target(score(inst), inst.target));
  }
  return aggregate_ranks(ranks, ks);
}

}  // namespace

RankingResult popularity_baseline(const Corpus& corpus,
                                  std::span<const int> ks) {
  const auto freq = item_frequencies(corpus);
  std::vector<double> scores(freq.begin(), freq.end());
  return rank_with_scores(
      corpus, [&scores](const PrefixInstance&) { return scores; }, ks);
}

RankingResult markov_baseline(const Corpus& corpus, std::span<const int> ks) {
  const auto freq = item_frequencies(corpus);
  const int n = corpus.item_vocab.size();
  // Global first-order transition counts from consecutive pairs.
  std::vector<std::map<int, std::int64_t>> transitions(n);
  for (const Session& s : corpus.train_sessions) {
    for (std::size_t k = 0; k + 1 < s.items.size(); ++k) {
      ++transitions[s.items[k]][s.items[k + 1]];
    }
  }
  std::vector<double> popularity(freq.begin(), freq.end());
  return rank_with_scores(
      corpus,
      [&](const PrefixInstance& inst) {
        const int last = inst.prefix.back();
        if (transitions[last].empty()) return popularity;
        std::vector<double> scores(n, 0.0);
        for (const auto& [item, count] : transitions[last]) {
          scores[item] = static_cast<double>(count);
        }
        return scores;
      },
      ks);
}

void write_metrics_json(const RankingResult& result, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  auto emit_map = [&os](const std::map<int, double>& m) {
    os << '{';
    bool first = true;
    for (const auto& [k, v] : m) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
      os << (first ? "" : ", ") << '"' << k << "\": " << buf;
      first = false;
    }
    os << '}';
  };
  os << "{\n  \"hr\": ";
  emit_map(result.hr);
  os << ",\n  \"mrr\": ";
  emit_map(result.mrr);
  os << ",\n  \"n_instances\": " << result.n_instances << "\n}\n";
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace sessrec
