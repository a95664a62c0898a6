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
// Command-line front end: ingest, serve, snapshot-import, export, analyze.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "CLI11.hpp"
#include "netmirror/bundle.hpp"
#include "netmirror/config.hpp"
#include "netmirror/csv.hpp"
#include "netmirror/effects.hpp"
#include "netmirror/errors.hpp"
#include "netmirror/experiment.hpp"
#include "netmirror/service.hpp"
#include "netmirror/stats.hpp"
#include "netmirror/tables.hpp"

namespace nm = netmirror;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

using Columns = std::vector<std::pair<std::string, nm::stats::RegressionResult>>;

std::unique_ptr<nm::ExperimentStore> open_store(const nm::ServiceConfig& cfg) {
  if (!cfg.event_log.parent_path().empty()) {
    std::filesystem::create_directories(cfg.event_log.parent_path());
  }
  return nm::ExperimentStore::open(cfg.rng_seed, cfg.event_log, cfg.state_snapshot);
}

int run_ingest(const std::string& config_path) {
  const auto cfg = nm::load_config(config_path);
  const auto start = std::chrono::steady_clock::now();
  const auto bundle = nm::ingest(cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("graph: %zu nodes, %zu edges\n", bundle.graph_nodes, bundle.graph_edges);
  std::printf("%u-core: %zu nodes, %zu edges\n", bundle.core_k, bundle.core_members.size(),
              bundle.core_edges);
  std::printf("sample: %zu nodes, %zu edges\n", bundle.sample.node_count(),
              bundle.sample.edge_count());
  std::printf("cache: %s (%s), %.2f s\n", bundle.cache_key.c_str(),
              bundle.from_cache ? "hit" : "built", secs);
  return 0;
}

int run_serve(const std::string& config_path, int port_override) {
  const auto cfg = nm::load_config(config_path);
  const auto bundle = nm::ingest(cfg);
  auto store = open_store(cfg);
  nm::Service service(bundle, *store,
                      {cfg.token_secret, cfg.admin_token, cfg.state_snapshot, cfg.snapshot_every});
  nm::HttpServer server(service);
  const int port = server.bind(cfg.bind_address, port_override >= 0 ? port_override : cfg.port);
  std::printf("serving %zu-node sample on http://%s:%d\n", bundle.sample.node_count(),
              cfg.bind_address.c_str(), port);
  std::fflush(stdout);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::jthread watcher([&](std::stop_token st) {
    while (!st.stop_requested() && !g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  const bool ok = server.listen();
  watcher.request_stop();
  if (!cfg.state_snapshot.empty()) store->write_snapshot(cfg.state_snapshot);
  return ok || g_stop ? 0 : 1;
}

// Bulk snapshot rows "user_id,offset,followee_id"; a user with an empty
// followee set appears once with an empty third field.
int run_snapshot_import(const std::string& config_path, const std::string& snapshots,
                        const std::string& controls) {
  const auto cfg = nm::load_config(config_path);
  auto store = open_store(cfg);

  if (!controls.empty()) {
    std::ifstream in(controls);
    if (!in) throw nm::InputError(controls, 0, "cannot open file");
    std::size_t n = 0;
    for (const auto& rec : nm::csv::read_records(in, controls, 1, {"user_id"})) {
      const nm::AccountId user(rec.fields[0]);
      if (store->is_control(user)) continue;
      store->register_control(user);
      ++n;
    }
    std::printf("registered %zu control units\n", n);
  }
  if (!snapshots.empty()) {
    std::ifstream in(snapshots);
    if (!in) throw nm::InputError(snapshots, 0, "cannot open file");
    std::map<std::pair<nm::AccountId, nm::SnapshotOffset>, std::vector<nm::AccountId>> groups;
    for (const auto& rec :
         nm::csv::read_records(in, snapshots, 3, {"user_id", "offset", "followee_id"})) {
      const auto offset = nm::parse_snapshot_offset(rec.fields[1]);
      if (!offset) throw nm::InputError(snapshots, rec.line, "unknown offset '" + rec.fields[1] + "'");
      auto& list = groups[{nm::AccountId(rec.fields[0]), *offset}];
      if (!rec.fields[2].empty()) list.emplace_back(rec.fields[2]);
    }
    for (auto& [key, followees] : groups) {
      store->snapshot_followees(key.first, key.second, std::move(followees));
    }
    std::printf("imported %zu followee snapshots\n", groups.size());
  }
  if (!cfg.state_snapshot.empty()) store->write_snapshot(cfg.state_snapshot);
  return 0;
}

int run_export(const std::string& config_path, const std::string& out_dir, bool complete_only) {
  const auto cfg = nm::load_config(config_path);
  const auto bundle = nm::ingest(cfg);
  auto store = open_store(cfg);
  nm::ExportOptions opts;
  opts.require_complete_surveys = complete_only;
  const auto tables =
      nm::export_analysis_tables(*store, bundle.labels, bundle.shares, bundle.alignment, opts);
  nm::write_tables(out_dir, tables);
  {
    std::ofstream audit(std::filesystem::path(out_dir) / "recommendations.csv");
    nm::write_recommendation_audit(audit, *store);
  }
  std::printf("wrote %zu survey, %zu diversity, %zu alignment, %zu covariate rows to %s\n",
              tables.survey.size(), tables.diversity.size(), tables.alignment.size(),
              tables.covariates.users.size(), out_dir.c_str());
  return 0;
}

struct AnalyzeArgs {
  std::string what;
  std::string input = "tables";
  std::string baseline;
  std::string arms = "four";
  std::string pair;
  std::string csv_out;
  int week = 0;
  bool filter_acceptors = false;
  std::size_t permutations = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

nm::Arm require_arm(const std::string& name) {
  const auto arm = nm::parse_arm(name);
  if (!arm) throw std::invalid_argument("unknown arm '" + name + "'");
  return *arm;
}

std::pair<nm::Arm, nm::Arm> parse_pair(const std::string& pair) {
  const auto comma = pair.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("--pair expects A,B");
  return {require_arm(pair.substr(0, comma)), require_arm(pair.substr(comma + 1))};
}

void emit(const AnalyzeArgs& a, const std::string& title, const Columns& cols) {
  std::cout << nm::format_effects_table(title, cols);
  for (const auto& [name, r] : cols) {
    std::printf("%s: n=%zu (dropped %zu), R^2=%.4f, overall p=%.4g%s\n", name.c_str(), r.n_units,
                r.n_dropped, r.r_squared, r.overall_p_value, r.degenerate ? " [exact fit]" : "");
  }
  if (!a.csv_out.empty()) {
    std::ofstream out(a.csv_out);
    if (!out) throw std::runtime_error("cannot write " + a.csv_out);
    out << nm::effects_csv(cols);
  }
}

int analyze_balance(const AnalyzeArgs& a, const nm::AnalysisTables& t) {
  const auto& cov = t.covariates;
  // Covariates nobody has (e.g. no share log ingested) are left out.
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < cov.names.size(); ++c) {
    bool any = false;
    for (std::size_t i = 0; i < cov.users.size(); ++i) {
      any = any || (cov.arms[i] != nm::Arm::Control && cov.values[i][c].has_value());
    }
    if (any) {
      cols.push_back(c);
    } else {
      std::fprintf(stderr, "note: covariate %s is missing for every unit; skipped\n",
                   cov.names[c].c_str());
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < cov.users.size(); ++i) {
    if (cov.arms[i] == nm::Arm::Control) continue;
    bool complete = true;
    for (std::size_t c : cols) complete = complete && cov.values[i][c].has_value();
    if (complete) rows.push_back(i);
  }
  if (rows.empty() || cols.empty()) throw nm::ModelError("no treated unit has every covariate");
  Eigen::MatrixXd x(rows.size(), cols.size());
  std::vector<int> labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) x(r, c) = *cov.values[rows[r]][cols[c]];
    labels.push_back(static_cast<int>(cov.arms[rows[r]]));
  }
  const auto res = nm::stats::randomization_check(x, labels, a.permutations, a.seed, a.threads);
  std::printf("Randomization check: multinomial logit of arm on %zu covariates, %zu units\n",
              cols.size(), rows.size());
  std::printf("  observed log-likelihood   %.6f\n", res.observed_log_likelihood);
  std::printf("  permutations              %zu (failed %zu, seed %llu)\n", res.n_permutations,
              res.n_failed, static_cast<unsigned long long>(res.seed));
  std::printf("  permuted LL mean          %.6f\n", res.permuted_mean);
  std::printf("  permuted LL 5/50/95%%      %.6f / %.6f / %.6f\n", res.permuted_q05,
              res.permuted_q50, res.permuted_q95);
  std::printf("  p-value                   %.6g\n", res.p_value);
  if (!a.csv_out.empty()) {
    std::ofstream out(a.csv_out);
    out << "observed_ll,n_permutations,n_failed,n_at_least,p_value,seed\n";
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%zu,%zu,%zu,%.17g,%llu\n", res.observed_log_likelihood,
                  res.n_permutations, res.n_failed, res.n_at_least, res.p_value,
                  static_cast<unsigned long long>(res.seed));
    out << line;
  }
  return 0;
}

int run_analyze(const AnalyzeArgs& a) {
  const auto t = nm::read_tables(a.input);
  if (a.what == "balance") return analyze_balance(a, t);

  const nm::ArmModel model = a.arms == "three" ? nm::ArmModel::ThreeArm : nm::ArmModel::FourArm;
  const bool paired = !a.pair.empty();
  Columns cols;

  if (a.what == "survey") {
    for (int q = 1; q <= nm::kSurveyQuestions; ++q) {
      const auto units = nm::survey_units(t.survey, q, a.filter_acceptors);
      const std::string name = "Q" + std::to_string(q);
      if (paired) {
        const auto [x, y] = parse_pair(a.pair);
        cols.emplace_back(name, nm::pairwise_effects(units, x, y));
      } else {
        const nm::Arm base = a.baseline.empty() ? nm::Arm::Viz : require_arm(a.baseline);
        cols.emplace_back(name, nm::fit_arm_model(units, base, nm::kTreatmentArms));
      }
    }
    emit(a, "Survey deltas (post - pre)", cols);
    return 0;
  }

  auto fit = [&](const std::vector<nm::EffectUnit>& units) {
    if (paired) {
      const auto [x, y] = parse_pair(a.pair);
      return nm::pairwise_effects(units, x, y);
    }
    const auto arms = nm::model_arms(model);
    const nm::Arm base = a.baseline.empty() ? nm::baseline_arm(model) : require_arm(a.baseline);
    return nm::fit_arm_model(units, base, arms);
  };

  if (a.what == "diversity") {
    std::vector<int> weeks;
    if (a.week > 0) weeks.push_back(a.week);
    else weeks = {1, 2, 3};
    for (int w : weeks) {
      cols.emplace_back("Week " + std::to_string(w),
                        fit(nm::diversity_units(t.diversity, w, model, a.filter_acceptors)));
    }
    emit(a, "Connection diversity change", cols);
    return 0;
  }
  if (a.what == "alignment") {
    cols.emplace_back("Alignment", fit(nm::alignment_units(t.alignment, model, a.filter_acceptors)));
    emit(a, "URL alignment change (|after| - |before|)", cols);
    return 0;
  }
  throw std::invalid_argument("unknown analysis '" + a.what + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-mirror experiment toolkit"};
  app.require_subcommand(1);
  std::string config = "netmirror.json";

  auto* ingest = app.add_subcommand("ingest", "Build (or load) the cached dataset bundle");
  ingest->add_option("-c,--config", config, "Config file")->check(CLI::ExistingFile);

  int port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("-c,--config", config, "Config file")->check(CLI::ExistingFile);
  serve->add_option("-p,--port", port, "Override the configured port (0 = any)");

  std::string snapshots, controls;
  auto* import = app.add_subcommand("snapshot-import", "Load followee snapshots and control units");
  import->add_option("-c,--config", config, "Config file")->check(CLI::ExistingFile);
  import->add_option("--snapshots", snapshots, "CSV user_id,offset,followee_id")
      ->check(CLI::ExistingFile);
  import->add_option("--controls", controls, "CSV of control user ids")->check(CLI::ExistingFile);

  std::string out_dir = "tables";
  bool complete_only = false;
  auto* exp = app.add_subcommand("export", "Write analysis tables as CSV");
  exp->add_option("-c,--config", config, "Config file")->check(CLI::ExistingFile);
  exp->add_option("-o,--out", out_dir, "Output directory");
  exp->add_flag("--require-complete", complete_only,
                "Drop participants without both surveys from all tables");

  AnalyzeArgs a;
  auto* analyze = app.add_subcommand("analyze", "Fit treatment-effect or balance models");
  analyze->add_option("what", a.what, "survey | diversity | alignment | balance")
      ->required()
      ->check(CLI::IsMember({"survey", "diversity", "alignment", "balance"}));
  analyze->add_option("-i,--input", a.input, "Directory of exported tables");
  analyze->add_option("--baseline", a.baseline, "Baseline arm");
  analyze->add_option("--arms", a.arms, "four (control baseline) | three (treated completers)")
      ->check(CLI::IsMember({"four", "three"}));
  analyze->add_option("--week", a.week, "Diversity week 1..3 (default all)")
      ->check(CLI::Range(1, 3));
  analyze->add_flag("--filter-acceptors", a.filter_acceptors,
                    "Drop IdeoRec units that followed a recommendation");
  analyze->add_option("--pair", a.pair, "Two-arm contrast A,B");
  analyze->add_option("--permutations", a.permutations, "Balance-check permutations");
  analyze->add_option("--seed", a.seed, "Balance-check seed");
  analyze->add_option("--threads", a.threads, "Balance-check worker threads (0 = auto)");
  analyze->add_option("--csv", a.csv_out, "Also write results as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return run_ingest(config);
    if (*serve) return run_serve(config, port);
    if (*import) return run_snapshot_import(config, snapshots, controls);
    if (*exp) return run_export(config, out_dir, complete_only);
    if (*analyze) return run_analyze(a);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
