// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "model.hpp"

#include <string>

#include "error.hpp"

namespace sessrec {

namespace {

using ad::Tensor;

// Constant (non-grad) tensors for the adjacency blocks.
Tensor adjacency_block(const LocalSessionGraph& g, bool outgoing) {
  const int n = g.n();
  std::vector<double> values(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      values[i * n + j] = outgoing ? g.out_at(i, j) : g.in_at(i, j);
  return Tensor::from(n, n, std::move(values));
}

Tensor one_minus(ad::Tape& tape, const Tensor& x) {
  return tape.add_const(tape.scale(x, -1.0), 1.0);
}

}  // namespace

ad::Tensor ggnn_step(ad::Tape& tape, const LocalSessionGraph& graph,
                     const ad::Tensor& states, const ParameterStore& params,
                     bool shared_w) {
  if (states.rows() != graph.n() || states.cols() != params.d()) {
    throw ShapeError("ggnn_step: states are " + std::to_string(states.rows()) +
                     "x" + std::to_string(states.cols()) + ", expected " +
                     std::to_string(graph.n()) + "x" + std::to_string(params.d()));
  }
  const Tensor a_out = adjacency_block(graph, true);
  const Tensor a_in = adjacency_block(graph, false);

  const Tensor& w_out = params.at("ggnn.w_out");
  const Tensor& b_out = params.at("ggnn.b_out");
  const Tensor& w_in = shared_w ? w_out : params.at("ggnn.w_in");
  const Tensor& b_in = shared_w ? b_out : params.at("ggnn.b_in");

  Tensor msg = tape.add(
      tape.matmul(a_out, tape.add(tape.matmul(states, w_out), b_out)),
      tape.matmul(a_in, tape.add(tape.matmul(states, w_in), b_in)));

  auto gate = [&](const char* name) {
    return tape.sigmoid(tape.add(
        tape.add(tape.matmul(msg, params.at(std::string("ggnn.gru.w_") + name)),
                 tape.matmul(states, params.at(std::string("ggnn.gru.u_") + name))),
        params.at(std::string("ggnn.gru.b_") + name)));
  };
  Tensor z = gate("z");
  Tensor r = gate("r");
  Tensor candidate = tape.tanh(tape.add(
      tape.add(tape.matmul(msg, params.at("ggnn.gru.w_h")),
               tape.matmul(tape.mul(r, states), params.at("ggnn.gru.u_h"))),
      params.at("ggnn.gru.b_h")));

  return tape.add(tape.mul(one_minus(tape, z), states),
                  tape.mul(z, candidate));
}

namespace {

// Mean of transformed source states per target, then the tanh candidate
// update for one edge type. Returns the candidate plus a 0/1 column mask of
// targets with at least one in-edge.
struct TypedCandidate {
  Tensor candidate;
  Tensor mask;  // n_targets x 1 constant
};

TypedCandidate typed_candidate(ad::Tape& tape,
                               const std::vector<std::vector<int>>& in_lists,
                               const Tensor& src_states,
                               const Tensor& tgt_states,
                               const ParameterStore& params,
                               const std::string& type) {
  const int n_targets = tgt_states.rows();
  std::vector<int> edge_src, edge_dst;
  std::vector<double> inv_deg(n_targets, 0.0), mask(n_targets, 0.0);
  for (int v = 0; v < n_targets; ++v) {
    const auto& sources = in_lists[v];
    if (sources.empty()) continue;
    mask[v] = 1.0;
    inv_deg[v] = 1.0 / static_cast<double>(sources.size());
    for (int u : sources) {
      edge_src.push_back(u);
      edge_dst.push_back(v);
    }
  }

  Tensor transformed =
      tape.matmul(src_states, params.at("hetero." + type + ".w_msg"));
  Tensor summed;
  if (edge_src.empty()) {
    summed = Tensor::zeros(n_targets, tgt_states.cols());
  } else {
    summed = tape.scatter_add_rows(
        tape.gather_rows(transformed, std::move(edge_src)),
        std::move(edge_dst), n_targets);
  }
  Tensor mean =
      tape.mul(summed, Tensor::from(n_targets, 1, std::move(inv_deg)));
  Tensor candidate = tape.tanh(
      tape.add(tape.matmul(tape.concat_cols({mean, tgt_states}),
                           params.at("hetero." + type + ".w_upd")),
               params.at("hetero." + type + ".b")));
  return {candidate, Tensor::from(n_targets, 1, std::move(mask))};
}

}  // namespace

HeteroStates hetero_step(ad::Tape& tape, const GlobalHeteroGraph& graph,
                         const ad::Tensor& item_states,
                         const ad::Tensor& user_states,
                         const ParameterStore& params) {
  if (item_states.rows() != graph.n_items ||
      user_states.rows() != graph.n_users) {
    throw ShapeError("hetero_step: state row counts do not match the graph");
  }

  TypedCandidate i2i =
      typed_candidate(tape, graph.i2i_in, item_states, item_states, params, "i2i");
  TypedCandidate u2i =
      typed_candidate(tape, graph.u2i_in, user_states, item_states, params, "u2i");
  TypedCandidate i2u =
      typed_candidate(tape, graph.i2u_in, item_states, user_states, params, "i2u");

  // Items: average the candidates over edge types with nonempty
  // neighborhoods; fall back to the previous state when there are none.
  const int n_items = graph.n_items;
  std::vector<double> inv_count(n_items, 0.0), any(n_items, 0.0);
  for (int v = 0; v < n_items; ++v) {
    const double count = i2i.mask.at(v, 0) + u2i.mask.at(v, 0);
    if (count > 0.0) {
      inv_count[v] = 1.0 / count;
      any[v] = 1.0;
    }
  }
  Tensor any_mask = Tensor::from(n_items, 1, std::move(any));
  Tensor item_avg = tape.mul(
      tape.add(tape.mul(i2i.candidate, i2i.mask),
               tape.mul(u2i.candidate, u2i.mask)),
      Tensor::from(n_items, 1, std::move(inv_count)));
  Tensor items_new = tape.add(tape.mul(item_avg, any_mask),
                              tape.mul(item_states, one_minus(tape, any_mask)));

  Tensor users_new =
      tape.add(tape.mul(i2u.candidate, i2u.mask),
               tape.mul(user_states, one_minus(tape, i2u.mask)));

  return {items_new, users_new};
}

SessionEmbedding attention_readout(ad::Tape& tape,
                                   const LocalSessionGraph& graph,
                                   const ad::Tensor& states,
                                   const ParameterStore& params) {
  SessionEmbedding out;
  out.s_last = tape.gather_rows(states, {graph.last_unique_pos});

  Tensor projected = tape.matmul(states, params.at("readout.w1"));
  Tensor last_term = tape.add(tape.matmul(out.s_last, params.at("readout.w2")),
                              params.at("readout.c"));
  Tensor activated = tape.sigmoid(tape.add(projected, last_term));
  Tensor alphas = tape.matmul(activated, params.at("readout.q"));  // n x 1
  out.s_attn = tape.sum_rows(tape.mul(states, alphas));
  out.s = tape.matmul(tape.concat_cols({out.s_last, out.s_attn}),
                      params.at("readout.w3"));
  return out;
}

ad::Tensor user_session_attention(ad::Tape& tape, const ad::Tensor& user_emb,
                                  const std::vector<ad::Tensor>& session_embs,
                                  const ParameterStore& params,
                                  bool literal_value_projection) {
  if (session_embs.empty()) return user_emb;
  if (literal_value_projection) {
    // The attention weights sum to one, so the weighted sum of a constant
    // value collapses to the projected user embedding.
    return tape.matmul(user_emb, params.at("simnet.w_v"));
  }
  Tensor stacked = tape.concat_rows(session_embs);  // m x d
  Tensor query = tape.matmul(user_emb, params.at("simnet.w_q"));
  Tensor keys = tape.matmul(stacked, params.at("simnet.w_k"));
  Tensor scores = tape.matmul_nt(query, keys);  // 1 x m
  Tensor weights = tape.softmax_rows(scores);
  Tensor values = tape.matmul(stacked, params.at("simnet.w_v"));
  return tape.matmul(weights, values);  // 1 x d
}

FusionOutput fuse(ad::Tape& tape, const ad::Tensor& s_local,
                  const ad::Tensor& s_global, const ad::Tensor& u_global,
                  const ParameterStore& params) {
  FusionOutput out;
  out.beta = tape.sigmoid(tape.matmul(tape.concat_cols({s_global, u_global}),
                                      params.at("fuse.w_s")));
  Tensor mix = tape.add(tape.mul(s_global, out.beta),
                        tape.mul(u_global, one_minus(tape, out.beta)));
  out.s_final = tape.add(s_local, mix);
  return out;
}

}  // namespace sessrec
