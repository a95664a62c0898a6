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
#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "netmirror/account_id.hpp"

namespace netmirror {

using NodeIndex = std::uint32_t;
using IdPair = std::pair<AccountId, AccountId>;

// Undirected mutual-follow graph. Nodes are stored in ascending id order and
// every adjacency list is sorted; both properties are relied on for
// deterministic iteration everywhere downstream. Immutable after construction.
class MutualGraph {
 public:
  MutualGraph() = default;

  // Drops self-loops and duplicate pairs (in either orientation).
  static MutualGraph from_edges(std::span<const IdPair> edges);

  // Builds a graph with an explicit node set, so isolated nodes survive.
  // Edge endpoints must be members of nodes.
  static MutualGraph from_nodes_and_edges(std::vector<AccountId> nodes,
                                          std::span<const IdPair> edges);

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool empty() const { return ids_.empty(); }

  const std::vector<AccountId>& ids() const { return ids_; }
  const AccountId& id(NodeIndex v) const { return ids_[v]; }
  std::optional<NodeIndex> find(const AccountId& id) const;
  bool contains(const AccountId& id) const { return find(id).has_value(); }
  // Throws NotFoundError.
  NodeIndex index_of(const AccountId& id) const;

  std::span<const NodeIndex> neighbors(NodeIndex v) const { return adjacency_[v]; }
  std::size_t degree(NodeIndex v) const { return adjacency_[v].size(); }
  bool adjacent(NodeIndex a, NodeIndex b) const;

  // Each undirected edge once, as (lower index, higher index), sorted.
  std::vector<std::pair<NodeIndex, NodeIndex>> edges() const;

  // Subgraph induced by the given nodes (indices into this graph).
  MutualGraph induced(std::span<const NodeIndex> members) const;

 private:
  std::vector<AccountId> ids_;
  std::unordered_map<AccountId, NodeIndex> index_;
  std::vector<std::vector<NodeIndex>> adjacency_;
  std::size_t edge_count_ = 0;
};

// Parses "idA,idB" lines; '#' lines and blank lines are skipped.
// Throws InputError naming the offending line.
std::vector<IdPair> read_edge_list(std::istream& in, const std::string& source);

MutualGraph build_graph(std::span<const IdPair> edges);

struct CoreSubgraph {
  unsigned k = 0;
  std::vector<AccountId> members;  // ascending
  MutualGraph graph;               // induced on members
};

// Maximal subgraph in which every node has at least k neighbours inside it.
CoreSubgraph k_core(const MutualGraph& g, unsigned k);

// Induced subgraph on the n highest-degree nodes; ties broken by ascending id.
MutualGraph top_degree_sample(const MutualGraph& g, std::size_t n);

struct PageRankVector {
  std::vector<double> scores;  // aligned with the graph's node order
  double damping = 0.85;
  double tolerance = 0.0;
  int iterations = 0;
  double final_delta = 0.0;

  double at(const MutualGraph& g, const AccountId& id) const {
    return scores[g.index_of(id)];
  }
};

class PageRankConvergenceError : public std::runtime_error {
 public:
  PageRankConvergenceError(PageRankVector last, const std::string& what)
      : std::runtime_error(what), last_(std::move(last)) {}
  const PageRankVector& last_iterate() const { return last_; }

 private:
  PageRankVector last_;
};

PageRankVector pagerank(const MutualGraph& g, double damping = 0.85,
                        double tol = 1e-10, int max_iter = 200);

// Breadth-first hop count; nullopt when the nodes are in different components.
// Throws NotFoundError for ids outside the graph.
std::optional<int> hop_distance(const MutualGraph& g, const AccountId& a,
                                const AccountId& b);

// Single-source BFS distances (-1 for unreachable).
std::vector<int> bfs_distances(const MutualGraph& g, NodeIndex source);

// "id,degree,in_4core" export. core_members must be sorted ascending.
void write_node_table(std::ostream& os, const MutualGraph& g,
                      std::span<const AccountId> core_members);

}  // namespace netmirror
