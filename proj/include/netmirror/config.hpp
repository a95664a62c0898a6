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
#include <cstdint>
#include <filesystem>
#include <string>

#include "netmirror/layout.hpp"

namespace netmirror {

struct ServiceConfig {
  std::filesystem::path edges_path;      // idA,idB
  std::filesystem::path ideology_path;   // id,p_left
  std::filesystem::path alignment_path;  // domain,alignment (optional)
  std::filesystem::path tweets_path;     // id,text (optional)
  std::filesystem::path shares_path;     // user_id,timestamp_iso8601,url,phase (optional)
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path event_log = "data/events.ndjson";
  std::filesystem::path state_snapshot = "data/state.json";
  std::size_t snapshot_every = 500;  // events between snapshot files; 0 disables

  std::size_t sample_size = 900;
  unsigned core_k = 4;
  double ideology_threshold = 0.6;
  std::uint64_t rng_seed = 1;
  LayoutConfig layout;

  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::string token_secret;
  std::string admin_token;
};

// Reads a JSON config file. Relative paths resolve against the file's
// directory. Every scalar key may be overridden by NETMIRROR_<KEY> in the
// environment (e.g. NETMIRROR_SAMPLE_SIZE=500, NETMIRROR_PORT=9000).
// Throws InputError on unknown keys or wrongly typed values.
ServiceConfig load_config(const std::filesystem::path& path);

}  // namespace netmirror
