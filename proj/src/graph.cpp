// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "netmirror/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "netmirror/csv.hpp"
#include "netmirror/errors.hpp"

namespace netmirror {

namespace {

// Builds sorted, deduplicated adjacency from index pairs. Self-loops dropped.
std::vector<std::vector<NodeIndex>> make_adjacency(
    std::size_t n, std::span<const std::pair<NodeIndex, NodeIndex>> pairs,
    std::size_t& edge_count) {
  std::vector<std::vector<NodeIndex>> adj(n);
  for (const auto& [a, b] : pairs) {
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  edge_count = 0;
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    edge_count += list.size();
  }
  edge_count /= 2;
  return adj;
}

}  // namespace

MutualGraph MutualGraph::from_edges(std::span<const IdPair> edges) {
  std::vector<AccountId> nodes;
  nodes.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    nodes.push_back(a);
    nodes.push_back(b);
  }
  return from_nodes_and_edges(std::move(nodes), edges);
}

MutualGraph MutualGraph::from_nodes_and_edges(std::vector<AccountId> nodes,
                                              std::span<const IdPair> edges) {
  MutualGraph g;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.ids_ = std::move(nodes);
  g.index_.reserve(g.ids_.size());
  for (NodeIndex i = 0; i < g.ids_.size(); ++i) g.index_.emplace(g.ids_[i], i);

  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  pairs.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    pairs.emplace_back(g.index_of(a), g.index_of(b));
  }
  g.adjacency_ = make_adjacency(g.ids_.size(), pairs, g.edge_count_);
  return g;
}

std::optional<NodeIndex> MutualGraph::find(const AccountId& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex MutualGraph::index_of(const AccountId& id) const {
  const auto v = find(id);
  if (!v) throw NotFoundError("account '" + id.str() + "' is not in the graph");
  return *v;
}

bool MutualGraph::adjacent(NodeIndex a, NodeIndex b) const {
  const auto& list = adjacency_[a];
  return std::binary_search(list.begin(), list.end(), b);
}

std::vector<std::pair<NodeIndex, NodeIndex>> MutualGraph::edges() const {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  out.reserve(edge_count_);
  for (NodeIndex v = 0; v < adjacency_.size(); ++v) {
    for (NodeIndex u : adjacency_[v]) {
      if (v < u) out.emplace_back(v, u);
    }
  }
  return out;
}

MutualGraph MutualGraph::induced(std::span<const NodeIndex> members) const {
  std::vector<NodeIndex> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  // Node order is ascending id, so ascending index order is preserved.
  std::vector<NodeIndex> remap(ids_.size(), UINT32_MAX);
  MutualGraph g;
  g.ids_.reserve(sorted.size());
  for (NodeIndex v : sorted) {
    remap[v] = static_cast<NodeIndex>(g.ids_.size());
    g.ids_.push_back(ids_[v]);
  }
  g.index_.reserve(g.ids_.size());
  for (NodeIndex i = 0; i < g.ids_.size(); ++i) g.index_.emplace(g.ids_[i], i);
  g.adjacency_.resize(sorted.size());
  for (NodeIndex v : sorted) {
    auto& out = g.adjacency_[remap[v]];
    for (NodeIndex u : adjacency_[v]) {
      if (remap[u] != UINT32_MAX) out.push_back(remap[u]);
    }
    g.edge_count_ += out.size();
  }
  g.edge_count_ /= 2;
  return g;
}

std::vector<IdPair> read_edge_list(std::istream& in, const std::string& source) {
  std::vector<IdPair> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = csv::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto comma = stripped.find(',');
    if (comma == std::string::npos ||
        stripped.find(',', comma + 1) != std::string::npos) {
      throw InputError(source, lineno, "expected 'idA,idB'");
    }
    std::string a = csv::trim(std::string_view(stripped).substr(0, comma));
    std::string b = csv::trim(std::string_view(stripped).substr(comma + 1));
    if (a.empty() || b.empty()) {
      throw InputError(source, lineno, "empty account id");
    }
    edges.emplace_back(AccountId(std::move(a)), AccountId(std::move(b)));
  }
  return edges;
}

MutualGraph build_graph(std::span<const IdPair> edges) {
  return MutualGraph::from_edges(edges);
}

CoreSubgraph k_core(const MutualGraph& g, unsigned k) {
  if (k == 0) throw std::invalid_argument("k_core requires k >= 1");
  const std::size_t n = g.node_count();
  std::vector<std::size_t> degree(n);
  std::vector<char> removed(n, 0);
  std::deque<NodeIndex> queue;
  for (NodeIndex v = 0; v < n; ++v) {
    degree[v] = g.degree(v);
    if (degree[v] < k) {
      removed[v] = 1;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    const NodeIndex v = queue.front();
    queue.pop_front();
    for (NodeIndex u : g.neighbors(v)) {
      if (removed[u]) continue;
      if (--degree[u] < k) {
        removed[u] = 1;
        queue.push_back(u);
      }
    }
  }
  std::vector<NodeIndex> keep;
  for (NodeIndex v = 0; v < n; ++v) {
    if (!removed[v]) keep.push_back(v);
  }
  CoreSubgraph core;
  core.k = k;
  core.graph = g.induced(keep);
  core.members = core.graph.ids();
  return core;
}

MutualGraph top_degree_sample(const MutualGraph& g, std::size_t n) {
  if (n == 0) throw std::invalid_argument("top_degree_sample requires n >= 1");
  std::vector<NodeIndex> order(g.node_count());
  std::iota(order.begin(), order.end(), NodeIndex{0});
  if (order.size() > n) {
    // Index order equals id order, so the index is the id tie-break.
    const auto by_degree = [&](NodeIndex a, NodeIndex b) {
      if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
      return a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<long>(n),
                     order.end(), by_degree);
    order.resize(n);
  }
  return g.induced(order);
}

PageRankVector pagerank(const MutualGraph& g, double damping, double tol,
                        int max_iter) {
  if (g.empty()) throw std::invalid_argument("pagerank requires a non-empty graph");
  const std::size_t n = g.node_count();
  const double inv_n = 1.0 / static_cast<double>(n);

  PageRankVector pr;
  pr.damping = damping;
  pr.tolerance = tol;
  pr.scores.assign(n, inv_n);
  std::vector<double> next(n);

  for (int iter = 1; iter <= max_iter; ++iter) {
    double dangling = 0.0;
    for (NodeIndex v = 0; v < n; ++v) {
      if (g.degree(v) == 0) dangling += pr.scores[v];
    }
    const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
    for (NodeIndex v = 0; v < n; ++v) {
      double inflow = 0.0;
      for (NodeIndex u : g.neighbors(v)) {
        inflow += pr.scores[u] / static_cast<double>(g.degree(u));
      }
      next[v] = base + damping * inflow;
    }
    double delta = 0.0;
    for (NodeIndex v = 0; v < n; ++v) delta += std::abs(next[v] - pr.scores[v]);
    pr.scores.swap(next);
    pr.iterations = iter;
    pr.final_delta = delta;
    if (delta <= tol) {
      // Renormalise away accumulated rounding.
      double total = 0.0;
      for (double s : pr.scores) total += s;
      for (double& s : pr.scores) s /= total;
      return pr;
    }
  }
  throw PageRankConvergenceError(
      pr, "pagerank did not converge within " + std::to_string(max_iter) +
              " iterations (last L1 change " + std::to_string(pr.final_delta) + ")");
}

std::vector<int> bfs_distances(const MutualGraph& g, NodeIndex source) {
  std::vector<int> dist(g.node_count(), -1);
  std::deque<NodeIndex> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeIndex v = queue.front();
    queue.pop_front();
    for (NodeIndex u : g.neighbors(v)) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

std::optional<int> hop_distance(const MutualGraph& g, const AccountId& a,
                                const AccountId& b) {
  const NodeIndex from = g.index_of(a);
  const NodeIndex to = g.index_of(b);
  if (from == to) return 0;
  // Early-exit BFS.
  std::vector<int> dist(g.node_count(), -1);
  std::deque<NodeIndex> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const NodeIndex v = queue.front();
    queue.pop_front();
    for (NodeIndex u : g.neighbors(v)) {
      if (dist[u] >= 0) continue;
      dist[u] = dist[v] + 1;
      if (u == to) return dist[u];
      queue.push_back(u);
    }
  }
  return std::nullopt;
}

void write_node_table(std::ostream& os, const MutualGraph& g,
                      std::span<const AccountId> core_members) {
  os << "id,degree,in_4core\n";
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const bool in_core =
        std::binary_search(core_members.begin(), core_members.end(), g.id(v));
    csv::write_row(os, {g.id(v).str(), std::to_string(g.degree(v)),
                        in_core ? "1" : "0"});
  }
}

}  // namespace netmirror
