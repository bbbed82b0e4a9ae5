// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "error.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "objective.hpp"

namespace sessrec {

namespace {

// splitmix64, for deriving independent RNG streams from one seed. Keeps the
// negative-sampling draws off the shuffling stream so ablations that skip
// the contrastive term leave the batch order untouched.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ salt;
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kShuffleSalt = 0x73687566666C6531ULL;
constexpr std::uint64_t kNegativeSalt = 0x6E65676174697665ULL;

double round_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return std::stod(buf);
}

nlohmann::json percent_map(const std::map<int, double>& fractions) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : fractions) j[std::to_string(k)] = round_percent(v);
  return j;
}

}  // namespace

void AdamState::step(ParameterStore& params, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const std::string& name : params.names()) {
    ad::Tensor& p = params.at(name);
    auto grad = p.grad();
    auto& [m, v] = moments_[name];
    if (m.empty()) {
      m.assign(grad.size(), 0.0);
      v.assign(grad.size(), 0.0);
    }
    auto values = p.values_mut();
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double g = grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      values[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

nlohmann::json EpochReport::to_json() const {
  nlohmann::json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["recom_loss"] = recom_loss;
  j["cont_loss"] = cont_loss;
  j["val_hr"] = percent_map(val_hr);
  j["val_mrr"] = percent_map(val_mrr);
  j["wall_s"] = wall_s;
  return j;
}

namespace {

using ad::Tape;
using ad::Tensor;

struct InstanceForward {
  LocalSessionGraph graph;
  SessionEmbedding local;
};

// One training step over a batch of instances; everything lives on one tape.
class StepRunner {
 public:
  StepRunner(const Corpus& corpus, const TrainConfig& config,
             const GlobalHeteroGraph& graph, ParameterStore& params,
             std::mt19937_64& rng_neg)
      : corpus_(corpus),
        config_(config),
        graph_(graph),
        params_(params),
        rng_neg_(rng_neg) {}

  struct Outcome {
    double total = 0.0;
    double recom = 0.0;
    double cont = 0.0;
  };

  Outcome run(std::span<const PrefixInstance> instances, double lr,
              AdamState& adam) {
    Tape tape;
    const Tensor& item_table = params_.at("item_embedding");
    const Tensor& user_table = params_.at("user_embedding");

    // Heterogeneous propagation over the full static graph, refreshed with
    // the current parameters.
    Tensor hetero_items, hetero_users;
    if (!config_.no_global) {
      Tensor items = item_table;
      Tensor users = user_table;
      for (int k = 0; k < config_.K_global; ++k) {
        HeteroStates next = hetero_step(tape, graph_, items, users, params_);
        items = next.items;
        users = next.users;
      }
      hetero_items = items;
      hetero_users = users;
    }

    // Local propagation and readout for every instance.
    std::vector<InstanceForward> forwards;
    forwards.reserve(instances.size());
    std::map<int, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const PrefixInstance& inst = instances[i];
      InstanceForward fw;
      fw.graph = build_local_graph(inst.prefix);
      Tensor states = tape.gather_rows(item_table, fw.graph.unique_items);
      for (int k = 0; k < config_.K_local; ++k) {
        states = ggnn_step(tape, fw.graph, states, params_, config_.ggnn_shared_w);
      }
      fw.local = attention_readout(tape, fw.graph, states, params_);
      forwards.push_back(std::move(fw));
      by_user[inst.user_index].push_back(i);
    }

    // Combined user embedding per batch user: the propagated UserNode state
    // plus the user-session attention output over that user's in-batch
    // session embeddings.
    std::map<int, Tensor> combined;
    if (!config_.no_global) {
      for (const auto& [user, rows] : by_user) {
        Tensor hetero_u = tape.gather_rows(hetero_users, {user});
        if (config_.no_simnet) {
          combined.emplace(user, hetero_u);
          continue;
        }
        std::vector<Tensor> sessions;
        sessions.reserve(rows.size());
        for (std::size_t i : rows) sessions.push_back(forwards[i].local.s);
        Tensor user_emb = tape.gather_rows(user_table, {user});
        Tensor updated = user_session_attention(
            tape, user_emb, sessions, params_, config_.simnet_literal_eq15);
        combined.emplace(user, tape.add(hetero_u, updated));
      }
    }

    // Fusion, prediction and the recommendation loss per instance.
    const Tensor zero_row = Tensor::zeros(1, params_.d());
    std::vector<Tensor> losses;
    losses.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const PrefixInstance& inst = instances[i];
      Tensor s_final;
      if (config_.no_global) {
        s_final = forwards[i].local.s;
      } else {
        Tensor global_states =
            tape.gather_rows(hetero_items, forwards[i].graph.unique_items);
        SessionEmbedding global =
            attention_readout(tape, forwards[i].graph, global_states, params_);
        const Tensor s_local =
            config_.no_local ? zero_row : forwards[i].local.s;
        s_final = fuse(tape, s_local, global.s, combined.at(inst.user_index),
                       params_)
                      .s_final;
      }
      Tensor probs = predict_scores(tape, s_final, item_table);
      losses.push_back(recom_loss(tape, probs, inst.target, config_.ce_loss));
    }
    Tensor l_recom = tape.scale(tape.sum(tape.concat_cols(losses)),
                                1.0 / static_cast<double>(losses.size()));

    // Contrastive term. With an effective lambda of zero it only feeds the
    // report, so it runs on a throwaway tape and cannot touch the gradients.
    const double lambda = config_.effective_lambda();
    double cont_value = 0.0;
    Tensor l_cont = Tensor::scalar(0.0);
    if (!config_.no_contrastive) {
      if (lambda > 0.0) {
        l_cont = contrastive(tape, by_user, combined, hetero_users, user_table);
        cont_value = l_cont.scalar_value();
      } else {
        Tape side;
        cont_value =
            contrastive(side, by_user, combined, hetero_users, user_table)
                .scalar_value();
      }
    }

    Tensor total = total_loss(tape, l_recom, l_cont, lambda);
    params_.zero_all_grads();
    tape.backward(total);
    adam.step(params_, lr);

    return {total.scalar_value(), l_recom.scalar_value(), cont_value};
  }

 private:
  // Anchors are the original user embeddings of the batch's users; positives
  // their combined updated embeddings. Negatives are other batch users,
  // widened to the full user set when the batch is too small; a user without
  // in-batch sessions contributes its propagated state plus its unchanged
  // embedding.
  Tensor contrastive(Tape& tape,
                     const std::map<int, std::vector<std::size_t>>& by_user,
                     const std::map<int, Tensor>& combined,
                     const Tensor& hetero_users, const Tensor& user_table) {
    std::vector<int> batch_users;
    batch_users.reserve(by_user.size());
    for (const auto& [user, _] : by_user) batch_users.push_back(user);

    const int n_users = corpus_.user_vocab.size();
    std::map<int, Tensor> fallback;
    auto updated_embedding = [&](int user) -> Tensor {
      if (auto it = combined.find(user); it != combined.end()) return it->second;
      auto it = fallback.find(user);
      if (it != fallback.end()) return it->second;
      Tensor hetero_u = config_.no_global
                            ? Tensor::zeros(1, params_.d())
                            : tape.gather_rows(hetero_users, {user});
      Tensor emb = config_.no_simnet || config_.no_global
                       ? hetero_u
                       : tape.add(hetero_u, tape.gather_rows(user_table, {user}));
      fallback.emplace(user, emb);
      return emb;
    };

    ContrastiveBatch batch;
    batch.tau = config_.tau;
    for (int anchor : batch_users) {
      std::vector<int> pool;
      if (static_cast<int>(batch_users.size()) - 1 >= config_.neg_ratio) {
        for (int u : batch_users)
          if (u != anchor) pool.push_back(u);
      } else {
        pool.reserve(n_users - 1);
        for (int u = 0; u < n_users; ++u)
          if (u != anchor) pool.push_back(u);
      }
      const int k = std::min<int>(config_.neg_ratio,
                                  static_cast<int>(pool.size()));
      for (int j = 0; j < k; ++j) {
        std::uniform_int_distribution<int> pick(j,
                                                static_cast<int>(pool.size()) - 1);
        std::swap(pool[j], pool[pick(rng_neg_)]);
      }

      batch.anchors.push_back(tape.gather_rows(user_table, {anchor}));
      batch.positives.push_back(updated_embedding(anchor));
      std::vector<Tensor> negs;
      negs.reserve(k);
      for (int j = 0; j < k; ++j) negs.push_back(updated_embedding(pool[j]));
      batch.negatives.push_back(std::move(negs));
    }
    return contrastive_loss(tape, batch);
  }

  const Corpus& corpus_;
  const TrainConfig& config_;
  const GlobalHeteroGraph& graph_;
  ParameterStore& params_;
  std::mt19937_64& rng_neg_;
};

}  // namespace

TrainResult train(const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.train_sessions.empty()) {
    throw PreconditionError("train: corpus has no training sessions");
  }

  // Hold out the last tenth of each user's training sessions for epoch
  // validation and checkpoint selection.
  std::map<int, std::vector<std::size_t>> sessions_by_user;
  for (std::size_t i = 0; i < corpus.train_sessions.size(); ++i) {
    sessions_by_user[corpus.train_sessions[i].user_index].push_back(i);
  }
  std::vector<char> is_val(corpus.train_sessions.size(), 0);
  for (const auto& [user, idxs] : sessions_by_user) {
    const std::size_t n_val = idxs.size() / 10;
    for (std::size_t j = idxs.size() - n_val; j < idxs.size(); ++j) {
      is_val[idxs[j]] = 1;
    }
  }
  std::vector<Session> core_sessions, val_sessions;
  for (std::size_t i = 0; i < corpus.train_sessions.size(); ++i) {
    (is_val[i] ? val_sessions : core_sessions).push_back(corpus.train_sessions[i]);
  }

  std::vector<PrefixInstance> instances = make_prefix_instances(
      std::span<const Session>(core_sessions));
  if (instances.empty()) {
    throw PreconditionError("train: no prefix instances in the training split");
  }
  const bool has_val =
      !make_prefix_instances(std::span<const Session>(val_sessions)).empty();

  const GlobalHeteroGraph graph = build_global_graph(
      corpus.train_sessions, corpus.item_vocab.size(), corpus.user_vocab.size());

  ParameterStore params = ParameterStore::init(
      config.d, corpus.item_vocab.size(), corpus.user_vocab.size(), config.seed);
  AdamState adam;
  std::mt19937_64 rng_shuffle(mix_seed(config.seed, kShuffleSalt));
  std::mt19937_64 rng_neg(mix_seed(config.seed, kNegativeSalt));
  StepRunner runner(corpus, config, graph, params, rng_neg);

  TrainResult result;
  result.config = config;
  double best_mrr = -1.0;
  ParameterStore best_params;
  int best_epoch = -1;

  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = config.lr_at_epoch(epoch);
    std::shuffle(order.begin(), order.end(), rng_shuffle);

    double sum_total = 0.0, sum_recom = 0.0, sum_cont = 0.0;
    int n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<PrefixInstance> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(instances[order[i]]);
      const StepRunner::Outcome outcome = runner.run(batch, lr, adam);
      sum_total += outcome.total;
      sum_recom += outcome.recom;
      sum_cont += outcome.cont;
      ++n_batches;
    }

    EpochReport report;
    report.epoch = epoch;
    report.train_loss = sum_total / n_batches;
    report.recom_loss = sum_recom / n_batches;
    report.cont_loss = sum_cont / n_batches;
    if (has_val) {
      const RankingResult val = evaluate_model(params, config, graph,
                                               val_sessions, default_ks());
      report.val_hr = val.hr;
      report.val_mrr = val.mrr;
      const double mrr10 = val.mrr.at(10);
      if (mrr10 > best_mrr) {
        best_mrr = mrr10;
        best_epoch = epoch;
        best_params = params.clone();
      }
    }
    report.wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.reports.push_back(std::move(report));
  }

  if (best_epoch < 0) {
    best_epoch = config.epochs - 1;
    best_params = params.clone();
  }
  result.params = std::move(best_params);
  result.best_epoch = best_epoch;
  return result;
}

void save_run(const TrainResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path base(out_dir);

  nlohmann::json extra;
  extra["config"] = result.config.to_json();
  extra["config_hash"] = result.config.hash();
  extra["best_epoch"] = result.best_epoch;
  result.params.save((base / "checkpoint.bin").string(), extra);

  std::ofstream reports(base / "reports.jsonl", std::ios::binary | std::ios::trunc);
  if (!reports) throw IoError("cannot write reports.jsonl in '" + out_dir + "'");
  for (const EpochReport& r : result.reports) reports << r.to_json().dump() << '\n';

  std::ofstream cfg(base / "config.json", std::ios::binary | std::ios::trunc);
  if (!cfg) throw IoError("cannot write config.json in '" + out_dir + "'");
  cfg << result.config.to_json().dump(2) << '\n';
}

std::vector<SweepEntry> grid_search(const Corpus& corpus,
                                    const TrainConfig& base,
                                    const nlohmann::json& grid) {
  if (!grid.is_object() || grid.empty()) {
    throw ConfigError("grid: expected a non-empty JSON object of field lists");
  }
  std::vector<std::string> keys;
  std::vector<std::vector<nlohmann::json>> values;
  for (const auto& [key, list] : grid.items()) {
    if (!list.is_array() || list.empty()) {
      throw ConfigError("grid: '" + key + "' must be a non-empty array");
    }
    keys.push_back(key);
    values.emplace_back(list.begin(), list.end());
  }

  std::vector<SweepEntry> entries;
  std::vector<std::size_t> odometer(keys.size(), 0);
  while (true) {
    nlohmann::json overrides = nlohmann::json::object();
    for (std::size_t i = 0; i < keys.size(); ++i) {
      overrides[keys[i]] = values[i][odometer[i]];
    }
    const TrainConfig config = TrainConfig::from_json(
        apply_config_overrides(base.to_json(), overrides));
    TrainResult run = train(corpus, config);
    SweepEntry entry;
    entry.config = config;
    const EpochReport& best = run.reports.at(run.best_epoch);
    entry.validation.hr = best.val_hr;
    entry.validation.mrr = best.val_mrr;
    entries.push_back(std::move(entry));

    bool done = false;
    std::size_t pos = keys.size();
    for (;;) {
      if (pos == 0) {
        done = true;
        break;
      }
      --pos;
      if (++odometer[pos] < values[pos].size()) break;
      odometer[pos] = 0;
    }
    if (done) break;
  }

  auto metric = [](const SweepEntry& e, const std::map<int, double>& m) {
    auto it = m.find(10);
    return it == m.end() ? 0.0 : it->second;
  };
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const SweepEntry& a, const SweepEntry& b) {
                     const double am = metric(a, a.validation.mrr);
                     const double bm = metric(b, b.validation.mrr);
                     if (am != bm) return am > bm;
                     return metric(a, a.validation.hr) > metric(b, b.validation.hr);
                   });
  return entries;
}

void write_sweep_csv(const std::vector<SweepEntry>& entries,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "config_hash,lambda,neg_ratio,hr3,hr5,hr10,mrr3,mrr5,mrr10\n";
  auto pct = [](const std::map<int, double>& m, int k) {
    char buf[32];
    auto it = m.find(k);
    std::snprintf(buf, sizeof(buf), "%.2f", (it == m.end() ? 0.0 : it->second) * 100.0);
    return std::string(buf);
  };
  for (const SweepEntry& e : entries) {
    os << e.config.hash() << ',' << e.config.lambda << ',' << e.config.neg_ratio
       << ',' << pct(e.validation.hr, 3) << ',' << pct(e.validation.hr, 5) << ','
       << pct(e.validation.hr, 10) << ',' << pct(e.validation.mrr, 3) << ','
       << pct(e.validation.mrr, 5) << ',' << pct(e.validation.mrr, 10) << '\n';
  }
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace sessrec
