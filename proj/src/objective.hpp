// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <vector>

#include "autodiff.hpp"

namespace sessrec {

// Softmax over the dot products of the final session preference with every
// row of the initial item embedding table. 1 x |V|.
ad::Tensor predict_scores(ad::Tape& tape, const ad::Tensor& s_final,
                          const ad::Tensor& item_table);

// Binary cross-entropy summed over all items against the one-hot target,
// probabilities clamped to [1e-12, 1 - 1e-12]. With ce, plain cross-entropy
// -log p[target] instead.
ad::Tensor recom_loss(ad::Tape& tape, const ad::Tensor& scores, int target,
                      bool ce = false);

// Normalized-temperature contrastive loss over cosine similarities: each
// anchor is pulled toward its positive and pushed from the negatives; the
// result is the mean over anchors. An anchor with no negatives contributes
// zero.
struct ContrastiveBatch {
  std::vector<ad::Tensor> anchors;
  std::vector<ad::Tensor> positives;
  std::vector<std::vector<ad::Tensor>> negatives;  // per anchor
  double tau = 0.5;
};
ad::Tensor contrastive_loss(ad::Tape& tape, const ContrastiveBatch& batch);

// (1 - lambda) * recom + lambda * cont. The endpoints return the surviving
// term unchanged so that lambda = 0 is bitwise the recommendation loss.
ad::Tensor total_loss(ad::Tape& tape, const ad::Tensor& recom,
                      const ad::Tensor& cont, double lambda);

}  // namespace sessrec
