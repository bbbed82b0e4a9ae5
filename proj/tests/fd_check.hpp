// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
//
// Central finite-difference gradient checking, independent of the tape's
// backward pass: the loss is re-evaluated from scratch around perturbed
// inputs and compared against the analytic gradients.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "autodiff.hpp"

namespace sessrec::testing {

struct FdReport {
  double max_rel_error = 0.0;
  std::string worst;  // "tensor#k[i]" of the worst element
};

// `loss_value` must rebuild the forward pass from the current input values
// and return the scalar loss. `inputs` are the tensors whose gradients are
// checked; their grad buffers must already hold the analytic gradients.
inline FdReport fd_compare(std::vector<ad::Tensor> inputs,
                           const std::function<double()>& loss_value,
                           double step = 1e-6) {
  FdReport report;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    ad::Tensor& x = inputs[t];
    auto values = x.values_mut();
    auto grad = x.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double keep = values[i];
      const double h = step * std::max(1.0, std::abs(keep));
      values[i] = keep + h;
      const double up = loss_value();
      values[i] = keep - h;
      const double down = loss_value();
      values[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
      const double rel = std::abs(fd - grad[i]) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = "tensor#" + std::to_string(t) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

}  // namespace sessrec::testing
