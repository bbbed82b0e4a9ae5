// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace sessrec {

// Directed graph over a session's unique items. adj is n x 2n row-major: the
// left block holds outgoing edges, the right block incoming, each nonzero row
// normalized by the node's count of distinct neighbors in that direction.
// Duplicate edges contribute once.
struct LocalSessionGraph {
  std::vector<int> unique_items;  // first-occurrence order
  std::vector<int> alias;         // session position -> unique position
  std::vector<double> adj;
  int last_unique_pos = 0;

  int n() const { return static_cast<int>(unique_items.size()); }
  double out_at(int i, int j) const { return adj[i * 2 * n() + j]; }
  double in_at(int i, int j) const { return adj[i * 2 * n() + n() + j]; }
};

LocalSessionGraph build_local_graph(std::span<const int> session_items);

// Static typed graph over all users and items, built once from the training
// sessions. Edges are stored as deduplicated, sorted in-neighbor lists per
// target node:
//   i2i: item a -> item b for consecutive pairs within a session
//   u2i: user u -> item v for every item in u's sessions
//   i2u: the exact transpose of u2i
struct GlobalHeteroGraph {
  int n_items = 0;
  int n_users = 0;
  std::vector<std::vector<int>> i2i_in;  // per item: predecessor items
  std::vector<std::vector<int>> u2i_in;  // per item: users
  std::vector<std::vector<int>> i2u_in;  // per user: items

  std::size_t i2i_edge_count() const;
  std::size_t u2i_edge_count() const;
  std::size_t i2u_edge_count() const;
};

GlobalHeteroGraph build_global_graph(std::span<const Session> train_sessions,
                                     int n_items, int n_users);

// In-degree histograms (degree -> node count) and edge totals per edge type.
struct NeighborStats {
  std::map<int, int> i2i_degrees;
  std::map<int, int> u2i_degrees;
  std::map<int, int> i2u_degrees;
  std::size_t i2i_edges = 0;
  std::size_t u2i_edges = 0;
  std::size_t i2u_edges = 0;
};

NeighborStats neighbor_stats(const GlobalHeteroGraph& graph);

// One edge per line: {"t":"i2i"|"u2i"|"i2u","src":int,"dst":int}, grouped by
// type, then ordered by (dst, src).
void dump_global_graph(const GlobalHeteroGraph& graph, const std::string& path);

}  // namespace sessrec
