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
#include "netmirror/recommender.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "netmirror/errors.hpp"

namespace netmirror {

namespace {

LabelMass neighbourhood_mass(NodeIndex u, const MutualGraph& sample,
                             const PageRankVector& pr, const LabelMap& labels) {
  LabelMass mass;
  for (NodeIndex v : sample.neighbors(u)) {
    mass.add(lookup_label(labels, sample.id(v)), pr.scores[v]);
  }
  return mass;
}

bool is_labelled(const LabelMap& labels, const AccountId& id) {
  const auto l = lookup_label(labels, id);
  return l == IdeologyLabel::Left || l == IdeologyLabel::Right;
}

double score_with(LabelMass mass, const AccountId& id, NodeIndex v,
                  const PageRankVector& pr, const LabelMap& labels) {
  mass.add(lookup_label(labels, id), pr.scores[v]);
  return mass.breakdown().score;
}

}  // namespace

std::vector<AccountId> candidate_set(const AccountId& user, const MutualGraph& sample,
                                     const LabelMap& labels) {
  const NodeIndex u = sample.index_of(user);
  std::vector<AccountId> out;
  for (NodeIndex v = 0; v < sample.node_count(); ++v) {
    if (v == u || sample.adjacent(u, v)) continue;
    if (is_labelled(labels, sample.id(v))) out.push_back(sample.id(v));
  }
  return out;
}

double marginal_gain(const AccountId& user, std::span<const AccountId> hypothetical_follows,
                     const AccountId& candidate, const MutualGraph& sample,
                     const PageRankVector& pr, const LabelMap& labels) {
  const NodeIndex u = sample.index_of(user);
  const NodeIndex c = sample.index_of(candidate);
  if (c == u || sample.adjacent(u, c) || !is_labelled(labels, candidate) ||
      std::find(hypothetical_follows.begin(), hypothetical_follows.end(), candidate) !=
          hypothetical_follows.end()) {
    throw std::invalid_argument("'" + candidate.str() + "' is not an eligible candidate");
  }
  LabelMass mass = neighbourhood_mass(u, sample, pr, labels);
  std::unordered_set<NodeIndex> added;
  for (const auto& h : hypothetical_follows) {
    const NodeIndex v = sample.index_of(h);
    if (v == u || sample.adjacent(u, v) || !added.insert(v).second) continue;
    mass.add(lookup_label(labels, h), pr.scores[v]);
  }
  const double before = mass.breakdown().score;
  return score_with(mass, candidate, c, pr, labels) - before;
}

std::vector<Recommendation> recommend(const AccountId& user, const MutualGraph& sample,
                                      const PageRankVector& pr, const LabelMap& labels,
                                      std::size_t max_n) {
  const NodeIndex u = sample.index_of(user);
  std::vector<NodeIndex> pool;
  for (const auto& id : candidate_set(user, sample, labels)) {
    pool.push_back(sample.index_of(id));
  }

  LabelMass mass = neighbourhood_mass(u, sample, pr, labels);
  double current = mass.breakdown().score;
  std::vector<Recommendation> out;

  while (out.size() < max_n && !pool.empty()) {
    std::size_t best = pool.size();
    double best_gain = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const NodeIndex v = pool[i];
      const double gain = score_with(mass, sample.id(v), v, pr, labels) - current;
      if (!(gain > 0.0)) continue;
      bool better = best == pool.size() || gain > best_gain;
      if (!better && gain == best_gain) {
        const NodeIndex b = pool[best];
        // Pool is in ascending id order, so an equal-PageRank tie keeps the
        // earlier (lower id) candidate.
        better = pr.scores[v] > pr.scores[b];
      }
      if (better) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == pool.size()) break;

    const NodeIndex pick = pool[best];
    mass.add(lookup_label(labels, sample.id(pick)), pr.scores[pick]);
    current = mass.breakdown().score;
    out.push_back({sample.id(pick), best_gain, static_cast<int>(out.size() + 1), current});
    pool.erase(pool.begin() + static_cast<long>(best));
  }
  return out;
}

WhatIfState what_if(const AccountId& user, std::span<const AccountId> selected,
                    std::span<const Recommendation> issued, const MutualGraph& sample,
                    const PageRankVector& pr, const LabelMap& labels) {
  const NodeIndex u = sample.index_of(user);
  for (const auto& s : selected) {
    const bool known = std::any_of(issued.begin(), issued.end(),
                                   [&](const Recommendation& r) { return r.account == s; });
    if (!known) {
      throw ValidationError("'" + s.str() + "' was not among the issued recommendations");
    }
  }
  WhatIfState state;
  state.user = user;
  LabelMass mass = neighbourhood_mass(u, sample, pr, labels);
  for (const auto& r : issued) {
    if (std::find(selected.begin(), selected.end(), r.account) == selected.end()) continue;
    const NodeIndex v = sample.index_of(r.account);
    mass.add(lookup_label(labels, r.account), pr.scores[v]);
    state.selected.push_back(r.account);
  }
  state.current_score = mass.breakdown().score;
  return state;
}

}  // namespace netmirror
