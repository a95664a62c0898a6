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
#include "netmirror/bundle.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "netmirror/csv.hpp"
#include "netmirror/errors.hpp"
#include "netmirror/hashing.hpp"

namespace netmirror {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kCacheVersion = "bundle/v1";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open file");
  return in;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_cache(const fs::path& dir, const DatasetBundle& b, const MutualGraph& graph,
                 const LayoutConfig& layout_cfg) {
  const fs::path tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  {
    std::ofstream out(tmp / "nodes.csv");
    write_node_table(out, graph, b.core_members);
  }
  {
    std::ofstream out(tmp / "sample_nodes.csv");
    out << "id,pagerank\n";
    for (NodeIndex v = 0; v < b.sample.node_count(); ++v) {
      csv::write_row(out, {b.sample.id(v).str(), fmt(b.pagerank.scores[v])});
    }
  }
  {
    std::ofstream out(tmp / "sample_edges.csv");
    for (const auto& [a, c] : b.sample.edges()) {
      csv::write_row(out, {b.sample.id(a).str(), b.sample.id(c).str()});
    }
  }
  {
    std::ofstream out(tmp / "layout.csv");
    write_layout_csv(out, b.layout, layout_cfg);
  }
  {
    std::ofstream out(tmp / "manifest.json");
    out << json{{"version", kCacheVersion},
                {"graph_nodes", b.graph_nodes},
                {"graph_edges", b.graph_edges},
                {"core_k", b.core_k},
                {"core_edges", b.core_edges},
                {"pagerank_iterations", b.pagerank.iterations},
                {"pagerank_delta", b.pagerank.final_delta},
                {"layout_config", layout_cfg.hash()}}
               .dump(2)
        << '\n';
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

bool load_cache(const fs::path& dir, DatasetBundle& b, const LayoutConfig& layout_cfg) {
  if (!fs::exists(dir / "manifest.json")) return false;
  const json manifest = json::parse(read_file(dir / "manifest.json"));
  if (manifest.value("version", "") != kCacheVersion) return false;
  b.graph_nodes = manifest.at("graph_nodes").get<std::size_t>();
  b.graph_edges = manifest.at("graph_edges").get<std::size_t>();
  b.core_k = manifest.at("core_k").get<unsigned>();
  b.core_edges = manifest.at("core_edges").get<std::size_t>();

  {
    auto in = open_input(dir / "nodes.csv");
    for (const auto& rec : csv::read_records(in, (dir / "nodes.csv").string(), 3,
                                             {"id", "degree", "in_4core"})) {
      if (rec.fields[2] == "1") b.core_members.emplace_back(rec.fields[0]);
    }
    std::sort(b.core_members.begin(), b.core_members.end());
  }
  std::vector<AccountId> nodes;
  std::unordered_map<AccountId, double> scores;
  {
    auto in = open_input(dir / "sample_nodes.csv");
    for (const auto& rec : csv::read_records(in, (dir / "sample_nodes.csv").string(), 2,
                                             {"id", "pagerank"})) {
      nodes.emplace_back(rec.fields[0]);
      scores[nodes.back()] = std::stod(rec.fields[1]);
    }
  }
  {
    auto in = open_input(dir / "sample_edges.csv");
    const auto edges = read_edge_list(in, (dir / "sample_edges.csv").string());
    b.sample = MutualGraph::from_nodes_and_edges(nodes, edges);
  }
  b.pagerank.scores.resize(b.sample.node_count());
  for (NodeIndex v = 0; v < b.sample.node_count(); ++v) {
    b.pagerank.scores[v] = scores.at(b.sample.id(v));
  }
  b.pagerank.iterations = manifest.at("pagerank_iterations").get<int>();
  b.pagerank.final_delta = manifest.at("pagerank_delta").get<double>();
  {
    auto in = open_input(dir / "layout.csv");
    std::string hash;
    b.layout = read_layout_csv(in, (dir / "layout.csv").string(), &hash);
    if (hash != layout_cfg.hash() || b.layout.size() != b.sample.node_count()) return false;
    for (NodeIndex v = 0; v < b.sample.node_count(); ++v) {
      if (b.layout[v].node != b.sample.id(v)) return false;
    }
  }
  return true;
}

}  // namespace

TweetCorpus read_tweets(std::istream& in, const std::string& source) {
  TweetCorpus corpus;
  for (auto& rec : csv::read_records(in, source, 2, {"id", "text"})) {
    if (rec.fields[0].empty()) throw InputError(source, rec.line, "empty account id");
    corpus[AccountId(rec.fields[0])].push_back(std::move(rec.fields[1]));
  }
  return corpus;
}

DatasetBundle ingest(const ServiceConfig& cfg) {
  if (cfg.edges_path.empty()) throw InputError("config", 0, "edges_path is required");
  if (cfg.ideology_path.empty()) throw InputError("config", 0, "ideology_path is required");

  const std::string edge_bytes = read_file(cfg.edges_path);
  Fnv1a64 key;
  key.update(kCacheVersion)
      .update(";")
      .update(edge_bytes)
      .update(";k=")
      .update(std::to_string(cfg.core_k))
      .update(";n=")
      .update(std::to_string(cfg.sample_size))
      .update(";layout=")
      .update(cfg.layout.hash());

  DatasetBundle b;
  b.cache_key = key.hex();
  const fs::path cache = cfg.cache_dir / b.cache_key;

  bool cached = false;
  try {
    cached = load_cache(cache, b, cfg.layout);
  } catch (const std::exception&) {
    cached = false;
  }
  if (cached) {
    b.from_cache = true;
  } else {
    b = DatasetBundle{};
    b.cache_key = key.hex();
    std::istringstream edge_stream(edge_bytes);
    const auto edges = read_edge_list(edge_stream, cfg.edges_path.string());
    const MutualGraph graph = build_graph(edges);
    b.graph_nodes = graph.node_count();
    b.graph_edges = graph.edge_count();
    CoreSubgraph core = k_core(graph, cfg.core_k);
    if (core.members.empty()) {
      throw InputError(cfg.edges_path.string(), 0,
                       "the " + std::to_string(cfg.core_k) + "-core of the network is empty");
    }
    b.core_k = cfg.core_k;
    b.core_edges = core.graph.edge_count();
    b.core_members = core.members;
    b.sample = top_degree_sample(core.graph, cfg.sample_size);
    b.pagerank = pagerank(b.sample);
    b.layout = compute_layout(b.sample, cfg.layout);
    write_cache(cache, b, graph, cfg.layout);
  }

  {
    auto in = open_input(cfg.ideology_path);
    b.ideology = read_ideology_scores(in, cfg.ideology_path.string());
  }
  b.labels = label_all(b.ideology, cfg.ideology_threshold);
  for (const auto& id : b.sample.ids()) b.labels.try_emplace(id, IdeologyLabel::Unsure);

  if (!cfg.alignment_path.empty()) {
    auto in = open_input(cfg.alignment_path);
    b.alignment = read_alignment_table(in, cfg.alignment_path.string());
  }
  if (!cfg.tweets_path.empty()) {
    auto in = open_input(cfg.tweets_path);
    b.tweets = read_tweets(in, cfg.tweets_path.string());
  }
  if (!cfg.shares_path.empty()) {
    auto in = open_input(cfg.shares_path);
    b.shares = read_share_log(in, cfg.shares_path.string());
  }
  return b;
}

}  // namespace netmirror
