// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <vector>

#include "autodiff.hpp"
#include "graph.hpp"
#include "params.hpp"

namespace sessrec {

// Node states are n x d tensors whose rows align with a node ordering
// (unique_items for local graphs, vocabulary order for the global graph).

// One gated propagation step over the local session graph: neighbor states
// are linearly transformed per direction, mixed through the normalized
// adjacency blocks, and fed into a GRU-style update of each node state.
ad::Tensor ggnn_step(ad::Tape& tape, const LocalSessionGraph& graph,
                     const ad::Tensor& states, const ParameterStore& params,
                     bool shared_w = false);

// One typed propagation step over the global graph. Each edge type averages
// linearly transformed source states into its targets and proposes a tanh
// candidate; items average the i2i and u2i candidates over types with a
// nonempty neighborhood, users take the i2u candidate, and nodes without
// applicable in-edges keep their state.
struct HeteroStates {
  ad::Tensor items;
  ad::Tensor users;
};
HeteroStates hetero_step(ad::Tape& tape, const GlobalHeteroGraph& graph,
                         const ad::Tensor& item_states,
                         const ad::Tensor& user_states,
                         const ParameterStore& params);

// Attention pooling of a session graph's node states: the last item is the
// local preference, soft attention against it forms the graph preference,
// and a linear transform of their concatenation is the session embedding.
struct SessionEmbedding {
  ad::Tensor s_last;  // 1 x d, state of the chronologically last item
  ad::Tensor s_attn;  // 1 x d, attention-weighted sum
  ad::Tensor s;       // 1 x d, W3 [s_last || s_attn]
};
SessionEmbedding attention_readout(ad::Tape& tape,
                                   const LocalSessionGraph& graph,
                                   const ad::Tensor& states,
                                   const ParameterStore& params);

// Attention of one user's embedding over that user's session embeddings.
// With literal_value_projection the value projection takes the user
// embedding itself, which collapses to W_v u independent of the weights.
// An empty session list yields the user embedding unchanged.
ad::Tensor user_session_attention(ad::Tape& tape, const ad::Tensor& user_emb,
                                  const std::vector<ad::Tensor>& session_embs,
                                  const ParameterStore& params,
                                  bool literal_value_projection = false);

// Scalar sigmoid gate blending the global session and user embeddings,
// added onto the local preference.
struct FusionOutput {
  ad::Tensor beta;     // 1 x 1, in (0, 1)
  ad::Tensor s_final;  // 1 x d
};
FusionOutput fuse(ad::Tape& tape, const ad::Tensor& s_local,
                  const ad::Tensor& s_global, const ad::Tensor& u_global,
                  const ParameterStore& params);

}  // namespace sessrec
