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
#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "doctest.h"
#include "netmirror/errors.hpp"
#include "netmirror/layout.hpp"
#include "synthetic.hpp"

using namespace netmirror;

namespace {

double dist(const LayoutPosition& a, const LayoutPosition& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

}  // namespace

TEST_CASE("single node gets one finite position") {
  const auto g = MutualGraph::from_nodes_and_edges({AccountId("solo")}, {});
  const auto pos = compute_layout(g, LayoutConfig{});
  REQUIRE(pos.size() == 1);
  CHECK(pos[0].node == AccountId("solo"));
  CHECK(std::isfinite(pos[0].x));
  CHECK(std::isfinite(pos[0].y));
  CHECK(std::isfinite(pos[0].z));
}

TEST_CASE("identical graph and config give bit-identical output") {
  std::mt19937_64 rng(4);
  const auto g = nmtest::random_graph(120, 0.05, rng);
  LayoutConfig cfg;
  cfg.seed = 99;
  const auto a = compute_layout(g, cfg);
  const auto b = compute_layout(g, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].node == b[i].node);
    CHECK(std::memcmp(&a[i].x, &b[i].x, sizeof(double)) == 0);
    CHECK(std::memcmp(&a[i].y, &b[i].y, sizeof(double)) == 0);
    CHECK(std::memcmp(&a[i].z, &b[i].z, sizeof(double)) == 0);
  }
  cfg.seed = 100;
  const auto c = compute_layout(g, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].x != c[i].x;
  CHECK(differs);
}

TEST_CASE("coordinates are finite and inside [-1, 1]") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = nmtest::random_graph(80, 0.06, rng);
    for (const auto& p : compute_layout(g, LayoutConfig{})) {
      for (double c : {p.x, p.y, p.z}) {
        CHECK(std::isfinite(c));
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
      }
    }
  }
}

TEST_CASE("two cliques separate for at least 95 of 100 seeds") {
  const auto g = nmtest::two_cliques(20);
  int separated = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    LayoutConfig cfg;
    cfg.seed = seed;
    const auto pos = compute_layout(g, cfg);
    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (std::size_t j = i + 1; j < pos.size(); ++j) {
        if ((i < 20) == (j < 20)) {
          intra += dist(pos[i], pos[j]);
          ++n_intra;
        } else {
          inter += dist(pos[i], pos[j]);
          ++n_inter;
        }
      }
    }
    if (intra / n_intra < inter / n_inter) ++separated;
  }
  CHECK(separated >= 95);
}

TEST_CASE("adjacent pairs sit closer than non-adjacent pairs") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = nmtest::random_graph(100, 0.04, rng);
    const auto pos = compute_layout(g, LayoutConfig{});
    std::vector<double> adj, non;
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
      for (NodeIndex j = i + 1; j < g.node_count(); ++j) {
        (g.adjacent(i, j) ? adj : non).push_back(dist(pos[i], pos[j]));
      }
    }
    CHECK(median(adj) < median(non));
  }
}

TEST_CASE("config validation") {
  LayoutConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.cooling = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.repulsion = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS(compute_layout(MutualGraph{}, LayoutConfig{}));
}

TEST_CASE("config hash covers every field") {
  const LayoutConfig base;
  auto changed = [&](auto mutate) {
    LayoutConfig c = base;
    mutate(c);
    return c.hash() != base.hash();
  };
  CHECK(base.hash() == LayoutConfig{}.hash());
  CHECK(changed([](LayoutConfig& c) { c.seed = 43; }));
  CHECK(changed([](LayoutConfig& c) { c.iterations = 499; }));
  CHECK(changed([](LayoutConfig& c) { c.repulsion = 1.5; }));
  CHECK(changed([](LayoutConfig& c) { c.attraction = 0.5; }));
  CHECK(changed([](LayoutConfig& c) { c.initial_temperature = 0.2; }));
  CHECK(changed([](LayoutConfig& c) { c.cooling = 0.98; }));
}

TEST_CASE("layout CSV round-trips exactly and records seed and hash") {
  std::mt19937_64 rng(2);
  const auto g = nmtest::random_graph(30, 0.1, rng);
  LayoutConfig cfg;
  cfg.seed = 7;
  const auto pos = compute_layout(g, cfg);
  std::stringstream ss;
  write_layout_csv(ss, pos, cfg);
  const std::string text = ss.str();
  CHECK(text.rfind("# seed=7 config=" + cfg.hash() + "\nid,x,y,z\n", 0) == 0);
  std::string hash;
  const auto back = read_layout_csv(ss, "layout.csv", &hash);
  CHECK(hash == cfg.hash());
  REQUIRE(back.size() == pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    CHECK(back[i].node == pos[i].node);
    CHECK(back[i].x == pos[i].x);
    CHECK(back[i].y == pos[i].y);
    CHECK(back[i].z == pos[i].z);
  }
  std::istringstream bad("id,x,y,z\na,1,2\n");
  CHECK_THROWS_AS(read_layout_csv(bad, "bad.csv"), InputError);
}
