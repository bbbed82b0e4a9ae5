// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "config.hpp"

#include <cmath>

#include "error.hpp"

namespace sessrec {

namespace {

const char* const kFieldNames[] = {
    "d",        "batch_size", "lr",        "lr_step",
    "lr_gamma", "epochs",     "lambda",    "neg_ratio",
    "tau",      "K_local",    "K_global",  "seed",
    "ce_loss",  "simnet_literal_eq15",     "ggnn_shared_w",
    "no_contrastive", "no_simnet", "no_global", "no_local"};

void reject_unknown_keys(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* name : kFieldNames) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("config: unknown key '" + key + "'");
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* name, T& out) {
  if (auto it = j.find(name); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config: invalid value for '") + name + "'");
    }
  }
}

}  // namespace

double TrainConfig::lr_at_epoch(int epoch) const {
  return lr * std::pow(lr_gamma, epoch / lr_step);
}

void TrainConfig::validate() const {
  if (d <= 0) throw ConfigError("config: d must be positive");
  if (batch_size <= 0) throw ConfigError("config: batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("config: lr must be positive");
  if (lr_step < 1) throw ConfigError("config: lr_step must be >= 1");
  if (!(lr_gamma > 0.0) || lr_gamma > 1.0) {
    throw ConfigError("config: lr_gamma must be in (0, 1]");
  }
  if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("config: lambda must be in [0, 1]");
  }
  if (neg_ratio < 1) throw ConfigError("config: neg_ratio must be >= 1");
  if (!(tau > 0.0)) throw ConfigError("config: tau must be positive");
  if (K_local < 1) throw ConfigError("config: K_local must be >= 1");
  if (K_global < 1) throw ConfigError("config: K_global must be >= 1");
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j);
  TrainConfig c;
  read_field(j, "d", c.d);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "lr", c.lr);
  read_field(j, "lr_step", c.lr_step);
  read_field(j, "lr_gamma", c.lr_gamma);
  read_field(j, "epochs", c.epochs);
  read_field(j, "lambda", c.lambda);
  read_field(j, "neg_ratio", c.neg_ratio);
  read_field(j, "tau", c.tau);
  read_field(j, "K_local", c.K_local);
  read_field(j, "K_global", c.K_global);
  read_field(j, "seed", c.seed);
  read_field(j, "ce_loss", c.ce_loss);
  read_field(j, "simnet_literal_eq15", c.simnet_literal_eq15);
  read_field(j, "ggnn_shared_w", c.ggnn_shared_w);
  read_field(j, "no_contrastive", c.no_contrastive);
  read_field(j, "no_simnet", c.no_simnet);
  read_field(j, "no_global", c.no_global);
  read_field(j, "no_local", c.no_local);
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: invalid JSON");
  return from_json(j);
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["batch_size"] = batch_size;
  j["lr"] = lr;
  j["lr_step"] = lr_step;
  j["lr_gamma"] = lr_gamma;
  j["epochs"] = epochs;
  j["lambda"] = lambda;
  j["neg_ratio"] = neg_ratio;
  j["tau"] = tau;
  j["K_local"] = K_local;
  j["K_global"] = K_global;
  j["seed"] = seed;
  j["ce_loss"] = ce_loss;
  j["simnet_literal_eq15"] = simnet_literal_eq15;
  j["ggnn_shared_w"] = ggnn_shared_w;
  j["no_contrastive"] = no_contrastive;
  j["no_simnet"] = no_simnet;
  j["no_global"] = no_global;
  j["no_local"] = no_local;
  return j;
}

std::string TrainConfig::hash() const {
  const std::string text = canonical_text();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

nlohmann::json apply_config_overrides(nlohmann::json base,
                                      const nlohmann::json& overrides) {
  reject_unknown_keys(overrides);
  if (!base.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : overrides.items()) base[key] = value;
  return base;
}

}  // namespace sessrec
