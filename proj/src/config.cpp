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
#include "netmirror/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>

#include "json.hpp"
#include "netmirror/errors.hpp"

namespace netmirror {

namespace {

using nlohmann::json;

enum class Kind { Path, String, Unsigned, Integer, Real };

struct Key {
  const char* name;
  Kind kind;
};

constexpr Key kKeys[] = {
    {"edges_path", Kind::Path},        {"ideology_path", Kind::Path},
    {"alignment_path", Kind::Path},    {"tweets_path", Kind::Path},
    {"shares_path", Kind::Path},       {"cache_dir", Kind::Path},
    {"event_log", Kind::Path},         {"state_snapshot", Kind::Path},
    {"snapshot_every", Kind::Unsigned}, {"sample_size", Kind::Unsigned},
    {"core_k", Kind::Unsigned},        {"ideology_threshold", Kind::Real},
    {"rng_seed", Kind::Unsigned},      {"layout_seed", Kind::Unsigned},
    {"layout_iterations", Kind::Unsigned}, {"layout_repulsion", Kind::Real},
    {"layout_attraction", Kind::Real}, {"layout_temperature", Kind::Real},
    {"layout_cooling", Kind::Real},    {"bind_address", Kind::String},
    {"port", Kind::Integer},           {"token_secret", Kind::String},
    {"admin_token", Kind::String},
};

std::string env_name(const char* key) {
  std::string out = "NETMIRROR_";
  for (const char* c = key; *c; ++c) {
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(*c))));
  }
  return out;
}

json parse_env(const std::string& raw, Kind kind, const std::string& name) {
  try {
    switch (kind) {
      case Kind::Path:
      case Kind::String: return raw;
      case Kind::Unsigned: return std::stoull(raw);
      case Kind::Integer: return std::stoll(raw);
      case Kind::Real: return std::stod(raw);
    }
  } catch (const std::exception&) {
  }
  throw InputError(name, 1, "cannot parse value '" + raw + "'");
}

}  // namespace

ServiceConfig load_config(const std::filesystem::path& path) {
  json j = json::object();
  std::filesystem::path base = std::filesystem::current_path();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InputError(path.string(), 0, "cannot open config file");
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw InputError(path.string(), 1, e.what());
    }
    if (!j.is_object()) throw InputError(path.string(), 1, "config must be a JSON object");
    base = std::filesystem::absolute(path).parent_path();
  }
  const std::string source = path.empty() ? "<defaults>" : path.string();

  std::set<std::string> known;
  for (const auto& k : kKeys) known.insert(k.name);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw InputError(source, 1, "unknown config key '" + key + "'");
  }
  for (const auto& k : kKeys) {
    if (const char* raw = std::getenv(env_name(k.name).c_str())) {
      j[k.name] = parse_env(raw, k.kind, env_name(k.name));
    }
  }

  ServiceConfig cfg;
  auto get = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<std::decay_t<decltype(out)>>();
    } catch (const json::exception&) {
      throw InputError(source, 1, std::string("wrong type for config key '") + key + "'");
    }
  };
  auto get_path = [&](const char* key, std::filesystem::path& out) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    std::filesystem::path p(s);
    out = p.is_absolute() ? p : base / p;
  };
  get_path("edges_path", cfg.edges_path);
  get_path("ideology_path", cfg.ideology_path);
  get_path("alignment_path", cfg.alignment_path);
  get_path("tweets_path", cfg.tweets_path);
  get_path("shares_path", cfg.shares_path);
  cfg.cache_dir = base / cfg.cache_dir;
  cfg.event_log = base / cfg.event_log;
  cfg.state_snapshot = base / cfg.state_snapshot;
  get_path("cache_dir", cfg.cache_dir);
  get_path("event_log", cfg.event_log);
  get_path("state_snapshot", cfg.state_snapshot);
  get("snapshot_every", cfg.snapshot_every);
  get("sample_size", cfg.sample_size);
  get("core_k", cfg.core_k);
  get("ideology_threshold", cfg.ideology_threshold);
  get("rng_seed", cfg.rng_seed);
  get("layout_seed", cfg.layout.seed);
  get("layout_iterations", cfg.layout.iterations);
  get("layout_repulsion", cfg.layout.repulsion);
  get("layout_attraction", cfg.layout.attraction);
  get("layout_temperature", cfg.layout.initial_temperature);
  get("layout_cooling", cfg.layout.cooling);
  get("bind_address", cfg.bind_address);
  get("port", cfg.port);
  get("token_secret", cfg.token_secret);
  get("admin_token", cfg.admin_token);

  if (cfg.sample_size == 0) throw InputError(source, 1, "sample_size must be >= 1");
  if (cfg.core_k == 0) throw InputError(source, 1, "core_k must be >= 1");
  if (!(cfg.ideology_threshold > 0.5 && cfg.ideology_threshold <= 1.0)) {
    throw InputError(source, 1, "ideology_threshold must be in (0.5, 1]");
  }
  try {
    cfg.layout.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(source, 1, e.what());
  }
  return cfg;
}

}  // namespace netmirror
