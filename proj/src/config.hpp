// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace sessrec {

// Training and model configuration. JSON field names mirror the struct
// members one to one; unknown keys are rejected.
struct TrainConfig {
  int d = 128;
  int batch_size = 128;
  double lr = 1e-4;
  int lr_step = 3;        // epochs per learning-rate decay
  double lr_gamma = 0.1;  // decay factor
  int epochs = 10;
  double lambda = 0.3;    // contrastive share of the total loss
  int neg_ratio = 2;      // negatives per positive in the contrastive loss
  double tau = 0.5;       // contrastive temperature
  int K_local = 1;        // local GGNN propagation steps
  int K_global = 1;       // heterogeneous propagation steps
  std::uint64_t seed = 1;

  bool ce_loss = false;             // plain cross-entropy instead of summed BCE
  bool simnet_literal_eq15 = false; // value projection of the user, not the session
  bool ggnn_shared_w = false;       // one transform for both edge directions

  bool no_contrastive = false;
  bool no_simnet = false;
  bool no_global = false;
  bool no_local = false;

  // lambda with ablation switches applied.
  double effective_lambda() const { return no_contrastive ? 0.0 : lambda; }

  double lr_at_epoch(int epoch) const;

  void validate() const;

  static TrainConfig from_json(const nlohmann::json& j);
  static TrainConfig from_json_text(const std::string& text);
  nlohmann::json to_json() const;
  std::string canonical_text() const { return to_json().dump(); }

  // FNV-1a over the canonical JSON text, as a fixed-width hex string.
  std::string hash() const;
};

// Applies `{"field": value}` overrides onto a config JSON object, rejecting
// unknown field names.
nlohmann::json apply_config_overrides(nlohmann::json base,
                                      const nlohmann::json& overrides);

}  // namespace sessrec
