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
#include "netmirror/layout.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "netmirror/csv.hpp"
#include "netmirror/errors.hpp"
#include "netmirror/hashing.hpp"

namespace netmirror {

namespace {

using Vec3 = std::array<double, 3>;

// Uniform in [0, 1) from the top 53 bits; avoids library-defined distributions
// so layouts are identical across standard library implementations.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void LayoutConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("layout iterations must be >= 1");
  if (!(cooling > 0.0 && cooling < 1.0)) {
    throw std::invalid_argument("layout cooling factor must be in (0, 1)");
  }
  if (!(repulsion > 0.0) || !(attraction > 0.0) || !(initial_temperature > 0.0)) {
    throw std::invalid_argument("layout force constants must be positive");
  }
}

std::string LayoutConfig::hash() const {
  Fnv1a64 h;
  h.update("fr3d/v1;")
      .update(std::to_string(seed))
      .update(";")
      .update(std::to_string(iterations))
      .update(";")
      .update(format_double(repulsion))
      .update(";")
      .update(format_double(attraction))
      .update(";")
      .update(format_double(initial_temperature))
      .update(";")
      .update(format_double(cooling));
  return h.hex();
}

std::vector<LayoutPosition> compute_layout(const MutualGraph& g,
                                           const LayoutConfig& cfg) {
  if (g.empty()) throw std::invalid_argument("compute_layout requires a non-empty graph");
  cfg.validate();
  const std::size_t n = g.node_count();

  std::mt19937_64 rng(cfg.seed);
  std::vector<Vec3> pos(n);
  for (auto& p : pos) {
    for (double& c : p) c = unit_draw(rng);
  }

  // Ideal spacing for n nodes sharing the unit cube.
  const double k = std::cbrt(1.0 / static_cast<double>(n));
  const double k2 = k * k;
  const double min_dist = 1e-9;
  const auto edges = g.edges();
  std::vector<Vec3> disp(n);
  double temperature = cfg.initial_temperature;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (auto& d : disp) d = {0.0, 0.0, 0.0};

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Vec3 delta{pos[i][0] - pos[j][0], pos[i][1] - pos[j][1],
                   pos[i][2] - pos[j][2]};
        double dist = std::sqrt(delta[0] * delta[0] + delta[1] * delta[1] +
                                delta[2] * delta[2]);
        if (dist < min_dist) {
          // Coincident points: push apart along a fixed axis.
          delta = {min_dist, 0.0, 0.0};
          dist = min_dist;
        }
        const double f = cfg.repulsion * k2 / dist / dist;
        for (int c = 0; c < 3; ++c) {
          disp[i][c] += delta[c] * f;
          disp[j][c] -= delta[c] * f;
        }
      }
    }

    for (const auto& [a, b] : edges) {
      Vec3 delta{pos[a][0] - pos[b][0], pos[a][1] - pos[b][1],
                 pos[a][2] - pos[b][2]};
      const double dist = std::sqrt(delta[0] * delta[0] + delta[1] * delta[1] +
                                    delta[2] * delta[2]);
      if (dist < min_dist) continue;
      // |F| = d^2 / k, applied along the unit vector.
      const double f = cfg.attraction * dist / k;
      for (int c = 0; c < 3; ++c) {
        disp[a][c] -= delta[c] * f;
        disp[b][c] += delta[c] * f;
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double len = std::sqrt(disp[i][0] * disp[i][0] +
                                   disp[i][1] * disp[i][1] +
                                   disp[i][2] * disp[i][2]);
      if (len > 0.0) {
        const double step = std::min(len, temperature) / len;
        for (int c = 0; c < 3; ++c) {
          pos[i][c] = std::clamp(pos[i][c] + disp[i][c] * step, 0.0, 1.0);
        }
      }
    }
    temperature *= cfg.cooling;
  }

  // Uniform rescale into [-1, 1]^3 around the bounding-box centre.
  Vec3 lo = pos[0];
  Vec3 hi = pos[0];
  for (const auto& p : pos) {
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  double half = 0.0;
  for (int c = 0; c < 3; ++c) half = std::max(half, (hi[c] - lo[c]) / 2.0);

  std::vector<LayoutPosition> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 q{};
    for (int c = 0; c < 3; ++c) {
      const double centred = pos[i][c] - (lo[c] + hi[c]) / 2.0;
      q[c] = half > 0.0 ? std::clamp(centred / half, -1.0, 1.0) : 0.0;
    }
    out[i] = {g.id(static_cast<NodeIndex>(i)), q[0], q[1], q[2]};
  }
  return out;
}

void write_layout_csv(std::ostream& os, const std::vector<LayoutPosition>& layout,
                      const LayoutConfig& cfg) {
  os << "# seed=" << cfg.seed << " config=" << cfg.hash() << '\n';
  os << "id,x,y,z\n";
  for (const auto& p : layout) {
    csv::write_row(os, {p.node.str(), format_double(p.x), format_double(p.y),
                        format_double(p.z)});
  }
}

std::vector<LayoutPosition> read_layout_csv(std::istream& in,
                                            const std::string& source,
                                            std::string* config_hash) {
  std::string first;
  std::getline(in, first);
  const auto at = first.find("config=");
  if (first.rfind("# seed=", 0) != 0 || at == std::string::npos) {
    throw InputError(source, 1, "missing layout header line");
  }
  if (config_hash) *config_hash = csv::trim(first.substr(at + 7));

  std::vector<LayoutPosition> out;
  for (auto& rec : csv::read_records(in, source, 4, {"id", "x", "y", "z"})) {
    LayoutPosition p;
    p.node = AccountId(rec.fields[0]);
    double* coords[3] = {&p.x, &p.y, &p.z};
    for (int c = 0; c < 3; ++c) {
      try {
        std::size_t used = 0;
        *coords[c] = std::stod(rec.fields[c + 1], &used);
        if (used != rec.fields[c + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError(source, rec.line + 1, "bad coordinate '" + rec.fields[c + 1] + "'");
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace netmirror
