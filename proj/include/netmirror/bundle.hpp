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

#include <string>
#include <unordered_map>
#include <vector>

#include "netmirror/config.hpp"
#include "netmirror/graph.hpp"
#include "netmirror/ideology.hpp"
#include "netmirror/layout.hpp"

namespace netmirror {

using TweetCorpus = std::unordered_map<AccountId, std::vector<std::string>>;

// Everything the service reads at request time. Immutable once built.
struct DatasetBundle {
  std::size_t graph_nodes = 0;
  std::size_t graph_edges = 0;
  unsigned core_k = 0;
  std::size_t core_edges = 0;
  std::vector<AccountId> core_members;  // ascending
  MutualGraph sample;
  std::vector<LayoutPosition> layout;   // sample order
  PageRankVector pagerank;              // sample order
  std::vector<IdeologyScore> ideology;
  LabelMap labels;  // every scored account plus every sample node (Unsure when unscored)
  AlignmentTable alignment;
  TweetCorpus tweets;
  std::vector<ShareRecord> shares;  // URL share log for the alignment outcome

  std::string cache_key;
  bool from_cache = false;
};

// build_graph -> k_core(core_k) -> top_degree_sample(sample_size) -> pagerank
// -> compute_layout. Structural results are cached under
// cache_dir/<content hash>; an unchanged rerun loads them instead of
// recomputing. Throws InputError for unreadable inputs and an empty core.
DatasetBundle ingest(const ServiceConfig& cfg);

// "id,text" rows, several per account allowed.
TweetCorpus read_tweets(std::istream& in, const std::string& source);

}  // namespace netmirror
