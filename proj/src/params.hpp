// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "autodiff.hpp"

namespace sessrec {

// Named trainable tensors for the whole model. Names are stable hierarchical
// strings ("ggnn.gru.w_z", "simnet.w_q", ...); shapes are fixed at init.
class ParameterStore {
 public:
  ParameterStore() = default;

  // All weight matrices and both embedding tables drawn uniform from
  // [-1/sqrt(d), 1/sqrt(d)]; bias vectors start at zero. Deterministic for a
  // given seed.
  static ParameterStore init(int d, int n_items, int n_users,
                             std::uint64_t seed);

  int d() const { return d_; }
  int n_items() const { return n_items_; }
  int n_users() const { return n_users_; }

  bool has(const std::string& name) const;
  ad::Tensor& at(const std::string& name);
  const ad::Tensor& at(const std::string& name) const;

  // Names in lexicographic order.
  std::vector<std::string> names() const;

  void zero_all_grads();

  // Deep copy (fresh storage, gradients cleared).
  ParameterStore clone() const;

  // Checkpoint layout: magic, format version, JSON header (d, vocab sizes,
  // plus whatever `extra` carries, e.g. config and its hash), then per
  // parameter in name order: name, rows, cols, raw little-endian f64 values.
  void save(const std::string& path, const nlohmann::json& extra) const;
  static std::pair<ParameterStore, nlohmann::json> load(const std::string& path);

  // The canonical name inventory for embedding size d and the given vocab
  // sizes, in initialization draw order.
  struct Spec {
    std::string name;
    int rows;
    int cols;
    bool is_bias;
  };
  static std::vector<Spec> layout(int d, int n_items, int n_users);

 private:
  int d_ = 0;
  int n_items_ = 0;
  int n_users_ = 0;
  std::map<std::string, ad::Tensor> tensors_;
};

}  // namespace sessrec
