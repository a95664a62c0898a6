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
#include <ostream>
#include <string>
#include <vector>

#include "netmirror/graph.hpp"

namespace netmirror {

struct LayoutConfig {
  std::uint64_t seed = 42;
  int iterations = 500;
  double repulsion = 1.0;
  double attraction = 1.0;
  double initial_temperature = 0.1;  // fraction of the unit cube
  double cooling = 0.99;

  // Throws std::invalid_argument for out-of-range values.
  void validate() const;
  // Stable fingerprint of every field.
  std::string hash() const;
};

struct LayoutPosition {
  AccountId node;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// 3D Fruchterman-Reingold embedding, one position per node in graph order,
// rescaled to fit [-1, 1]^3. Bit-identical for identical (graph, config).
std::vector<LayoutPosition> compute_layout(const MutualGraph& g,
                                           const LayoutConfig& cfg);

// "# seed=<seed> config=<hash>" header line, then "id,x,y,z" rows.
void write_layout_csv(std::ostream& os, const std::vector<LayoutPosition>& layout,
                      const LayoutConfig& cfg);
// Returns the positions and the config hash found in the header line.
std::vector<LayoutPosition> read_layout_csv(std::istream& in,
                                            const std::string& source,
                                            std::string* config_hash = nullptr);

}  // namespace netmirror
