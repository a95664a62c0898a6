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

#include <cstddef>
#include <span>
#include <vector>

#include "netmirror/graph.hpp"
#include "netmirror/ideology.hpp"

namespace netmirror {

inline constexpr std::size_t kDefaultMaxRecommendations = 5;

struct Recommendation {
  AccountId account;
  double marginal_gain = 0.0;
  int rank = 0;                   // 1-based
  double cumulative_score = 0.0;  // displayed score once ranks 1..rank are followed
};

struct WhatIfState {
  AccountId user;
  std::vector<AccountId> selected;  // in issued rank order
  double current_score = 0.0;
};

// Labelled (Left/Right) sample nodes that are neither the user nor already
// neighbours, ascending by id. Throws NotFoundError when the user is absent.
std::vector<AccountId> candidate_set(const AccountId& user, const MutualGraph& sample,
                                     const LabelMap& labels);

// Change in displayed score when candidate is followed on top of the user's
// neighbours plus hypothetical_follows. May be negative.
double marginal_gain(const AccountId& user, std::span<const AccountId> hypothetical_follows,
                     const AccountId& candidate, const MutualGraph& sample,
                     const PageRankVector& pr, const LabelMap& labels);

// Greedy sequential selection: every pick maximises the gain given the
// previous picks, and only strictly positive gains are accepted. Ties go to
// the higher PageRank, then the lower id.
std::vector<Recommendation> recommend(const AccountId& user, const MutualGraph& sample,
                                      const PageRankVector& pr, const LabelMap& labels,
                                      std::size_t max_n = kDefaultMaxRecommendations);

// Displayed score with the selected accounts added as neighbours. Selection
// order is irrelevant: accounts are applied in issued rank order. Throws
// ValidationError for accounts that were not issued.
WhatIfState what_if(const AccountId& user, std::span<const AccountId> selected,
                    std::span<const Recommendation> issued, const MutualGraph& sample,
                    const PageRankVector& pr, const LabelMap& labels);

}  // namespace netmirror
