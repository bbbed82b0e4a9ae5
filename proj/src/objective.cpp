// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "objective.hpp"

#include <string>

#include "error.hpp"

namespace sessrec {

namespace {
constexpr double kProbEps = 1e-12;
}

ad::Tensor predict_scores(ad::Tape& tape, const ad::Tensor& s_final,
                          const ad::Tensor& item_table) {
  return tape.softmax_rows(tape.matmul_nt(s_final, item_table));
}

ad::Tensor recom_loss(ad::Tape& tape, const ad::Tensor& scores, int target,
                      bool ce) {
  const int n = scores.cols();
  if (scores.rows() != 1) {
    throw ShapeError("recom_loss: scores must be a single row");
  }
  if (target < 0 || target >= n) {
    throw PreconditionError("recom_loss: target " + std::to_string(target) +
                            " out of range for " + std::to_string(n) + " items");
  }
  std::vector<double> onehot(n, 0.0);
  onehot[target] = 1.0;
  ad::Tensor y = ad::Tensor::from(1, n, onehot);

  ad::Tensor log_p = tape.log_clamped(scores, kProbEps);
  ad::Tensor positive = tape.sum(tape.mul(log_p, y));
  if (ce) return tape.scale(positive, -1.0);

  std::vector<double> inv(n, 1.0);
  inv[target] = 0.0;
  ad::Tensor not_y = ad::Tensor::from(1, n, std::move(inv));
  ad::Tensor log_1p = tape.log_clamped(
      tape.add_const(tape.scale(scores, -1.0), 1.0), kProbEps);
  ad::Tensor negative = tape.sum(tape.mul(log_1p, not_y));
  return tape.scale(tape.add(positive, negative), -1.0);
}

ad::Tensor contrastive_loss(ad::Tape& tape, const ContrastiveBatch& batch) {
  if (!(batch.tau > 0.0)) {
    throw ConfigError("contrastive_loss: tau must be positive");
  }
  if (batch.anchors.empty()) {
    throw PreconditionError("contrastive_loss: no anchors");
  }
  if (batch.anchors.size() != batch.positives.size() ||
      batch.anchors.size() != batch.negatives.size()) {
    throw PreconditionError("contrastive_loss: mismatched batch lists");
  }

  std::vector<ad::Tensor> per_anchor;
  per_anchor.reserve(batch.anchors.size());
  for (std::size_t a = 0; a < batch.anchors.size(); ++a) {
    std::vector<ad::Tensor> sims;
    sims.reserve(1 + batch.negatives[a].size());
    sims.push_back(tape.cosine_sim(batch.anchors[a], batch.positives[a]));
    for (const ad::Tensor& neg : batch.negatives[a]) {
      sims.push_back(tape.cosine_sim(batch.anchors[a], neg));
    }
    ad::Tensor logits = tape.scale(tape.concat_cols(sims), 1.0 / batch.tau);
    ad::Tensor probs = tape.softmax_rows(logits);
    std::vector<double> first(sims.size(), 0.0);
    first[0] = 1.0;
    ad::Tensor picked = tape.sum(
        tape.mul(probs, ad::Tensor::from(1, static_cast<int>(sims.size()),
                                         std::move(first))));
    per_anchor.push_back(tape.scale(tape.log_clamped(picked, kProbEps), -1.0));
  }
  return tape.scale(tape.sum(tape.concat_cols(per_anchor)),
                    1.0 / static_cast<double>(per_anchor.size()));
}

ad::Tensor total_loss(ad::Tape& tape, const ad::Tensor& recom,
                      const ad::Tensor& cont, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("total_loss: lambda must be in [0, 1]");
  }
  if (lambda == 0.0) return recom;
  if (lambda == 1.0) return cont;
  return tape.add(tape.scale(recom, 1.0 - lambda), tape.scale(cont, lambda));
}

}  // namespace sessrec
