// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "error.hpp"

namespace sessrec {

LocalSessionGraph build_local_graph(std::span<const int> session_items) {
  if (session_items.empty()) {
    throw PreconditionError("build_local_graph: empty session");
  }
  LocalSessionGraph g;
  std::map<int, int> position;
  for (int item : session_items) {
    auto it = position.find(item);
    if (it == position.end()) {
      const int pos = g.n();
      position.emplace(item, pos);
      g.unique_items.push_back(item);
      g.alias.push_back(pos);
    } else {
      g.alias.push_back(it->second);
    }
  }
  g.last_unique_pos = g.alias.back();

  const int n = g.n();
  std::vector<std::set<int>> out_edges(n), in_edges(n);
  for (std::size_t k = 0; k + 1 < session_items.size(); ++k) {
    const int src = g.alias[k];
    const int dst = g.alias[k + 1];
    out_edges[src].insert(dst);
    in_edges[dst].insert(src);
  }

  g.adj.assign(static_cast<std::size_t>(n) * 2 * n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!out_edges[i].empty()) {
      const double w = 1.0 / static_cast<double>(out_edges[i].size());
      for (int j : out_edges[i]) g.adj[i * 2 * n + j] = w;
    }
    if (!in_edges[i].empty()) {
      const double w = 1.0 / static_cast<double>(in_edges[i].size());
      for (int j : in_edges[i]) g.adj[i * 2 * n + n + j] = w;
    }
  }
  return g;
}

std::size_t GlobalHeteroGraph::i2i_edge_count() const {
  std::size_t total = 0;
  for (const auto& v : i2i_in) total += v.size();
  return total;
}

std::size_t GlobalHeteroGraph::u2i_edge_count() const {
  std::size_t total = 0;
  for (const auto& v : u2i_in) total += v.size();
  return total;
}

std::size_t GlobalHeteroGraph::i2u_edge_count() const {
  std::size_t total = 0;
  for (const auto& v : i2u_in) total += v.size();
  return total;
}

GlobalHeteroGraph build_global_graph(std::span<const Session> train_sessions,
                                     int n_items, int n_users) {
  if (train_sessions.empty()) {
    throw PreconditionError("build_global_graph: empty training set");
  }
  std::vector<std::set<int>> i2i(n_items), u2i(n_items), i2u(n_users);
  for (const Session& s : train_sessions) {
    if (s.user_index < 0 || s.user_index >= n_users) {
      throw PreconditionError("build_global_graph: user index out of range");
    }
    for (std::size_t k = 0; k < s.items.size(); ++k) {
      const int item = s.items[k];
      if (item < 0 || item >= n_items) {
        throw PreconditionError("build_global_graph: item index out of range");
      }
      u2i[item].insert(s.user_index);
      i2u[s.user_index].insert(item);
      if (k + 1 < s.items.size()) i2i[s.items[k + 1]].insert(item);
    }
  }

  GlobalHeteroGraph g;
  g.n_items = n_items;
  g.n_users = n_users;
  g.i2i_in.reserve(n_items);
  g.u2i_in.reserve(n_items);
  g.i2u_in.reserve(n_users);
  for (auto& s : i2i) g.i2i_in.emplace_back(s.begin(), s.end());
  for (auto& s : u2i) g.u2i_in.emplace_back(s.begin(), s.end());
  for (auto& s : i2u) g.i2u_in.emplace_back(s.begin(), s.end());
  return g;
}

NeighborStats neighbor_stats(const GlobalHeteroGraph& graph) {
  NeighborStats stats;
  for (const auto& v : graph.i2i_in) {
    ++stats.i2i_degrees[static_cast<int>(v.size())];
    stats.i2i_edges += v.size();
  }
  for (const auto& v : graph.u2i_in) {
    ++stats.u2i_degrees[static_cast<int>(v.size())];
    stats.u2i_edges += v.size();
  }
  for (const auto& v : graph.i2u_in) {
    ++stats.i2u_degrees[static_cast<int>(v.size())];
    stats.i2u_edges += v.size();
  }
  return stats;
}

void dump_global_graph(const GlobalHeteroGraph& graph, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  auto emit = [&os](const char* type, const std::vector<std::vector<int>>& in) {
    for (std::size_t dst = 0; dst < in.size(); ++dst) {
      for (int src : in[dst]) {
        os << "{\"t\":\"" << type << "\",\"src\":" << src << ",\"dst\":" << dst
           << "}\n";
      }
    }
  };
  emit("i2i", graph.i2i_in);
  emit("u2i", graph.u2i_in);
  emit("i2u", graph.i2u_in);
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace sessrec
