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
#include "netmirror/service.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string_view>
#include <vector>

#include "netmirror/effects.hpp"
#include "netmirror/errors.hpp"
#include "netmirror/recommender.hpp"
#include "netmirror/tables.hpp"

namespace netmirror {

namespace {

using nlohmann::json;

class Unauthorized : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MethodNotAllowed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body);  // json::parse_error maps to 400
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

std::string require_string(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw ValidationError(std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string_view class_color(IdeologyLabel label) {
  switch (label) {
    case IdeologyLabel::Left: return "blue";
    case IdeologyLabel::Right: return "red";
    case IdeologyLabel::Unsure: break;
  }
  return "gray";
}

bool shows_classes(Arm arm) { return arm == Arm::VizIdeo || arm == Arm::IdeoRec; }

json error_body(int status, const std::string& message) {
  return json{{"status", status}, {"error", message}};
}

std::string bearer(const std::string& header) {
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) {
    throw Unauthorized("missing bearer token");
  }
  return header.substr(prefix.size());
}

std::string csv_of(auto&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

}  // namespace

std::string session_stage(const Session& s) {
  if (!s.pre_survey) return "pre_survey";
  if (!s.guess) return "guess";
  if (s.arm == Arm::IdeoRec && !s.recommendations_issued) return "recommend";
  if (!s.post_survey) return "post_survey";
  if (!s.demographics) return "demographics";
  return "done";
}

Service::Service(const DatasetBundle& bundle, ExperimentStore& store, ServiceOptions options,
                 std::unique_ptr<LoginProvider> login)
    : bundle_(bundle),
      store_(store),
      options_(std::move(options)),
      login_(std::move(login)),
      signer_(options_.token_secret) {
  for (double p : bundle_.pagerank.scores) max_pagerank_ = std::max(max_pagerank_, p);
  last_snapshot_seq_ = store_.last_sequence();
}

HttpResponse Service::handle(const HttpRequest& request) {
  HttpResponse res;
  int status = 200;
  std::string message;
  try {
    res = dispatch(request);
    if (request.method == "POST" || request.method == "GET") maybe_snapshot();
    return res;
  } catch (const json::exception& e) {
    status = 400;
    message = std::string("malformed JSON: ") + e.what();
  } catch (const InputError& e) {
    status = 400;
    message = e.what();
  } catch (const ValidationError& e) {
    status = 400;
    message = e.what();
  } catch (const std::invalid_argument& e) {
    status = 400;
    message = e.what();
  } catch (const Unauthorized& e) {
    status = 401;
    message = e.what();
  } catch (const ForbiddenError& e) {
    status = 403;
    message = e.what();
  } catch (const NotFoundError& e) {
    status = 404;
    message = e.what();
  } catch (const MethodNotAllowed& e) {
    status = 405;
    message = e.what();
  } catch (const OrderingError& e) {
    status = 409;
    message = e.what();
  } catch (const std::exception& e) {
    status = 500;
    message = e.what();
  }
  res.status = status;
  res.content_type = "application/json";
  res.body = error_body(status, message).dump();
  return res;
}

HttpResponse Service::dispatch(const HttpRequest& req) {
  const auto parts = split_path(req.path);
  const auto n = parts.size();
  auto expect = [&](const char* method) {
    if (req.method != method) throw MethodNotAllowed(req.method + " not allowed on " + req.path);
  };
  auto ok = [](const json& j) { return HttpResponse{200, j.dump(), "application/json"}; };

  if (n < 2 || parts[0] != "api") throw NotFoundError("no route for " + req.path);

  if (parts[1] == "admin" && n == 3) {
    expect("GET");
    authorize_admin(req);
    if (parts[2] == "export") return ok(json::parse(export_payload()));
    if (parts[2] == "report") return HttpResponse{200, report(), "text/plain; charset=utf-8"};
    throw NotFoundError("no route for " + req.path);
  }
  if (parts[1] != "session") throw NotFoundError("no route for " + req.path);

  if (n == 2) {
    expect("POST");
    return login(parse_body(req.body));
  }
  const std::string& id = parts[2];
  if (n == 3) {
    expect("GET");
    return ok(session_view(authorize(req, id)));
  }
  const std::string& action = parts[3];

  if (action == "network" && n == 4) {
    expect("GET");
    return ok(network_payload(authorize(req, id)));
  }
  if (action == "survey" && n == 5) {
    expect("POST");
    authorize(req, id);
    const auto phase = parse_survey_phase(parts[4]);
    if (!phase) throw NotFoundError("unknown survey phase '" + parts[4] + "'");
    const json body = parse_body(req.body);
    SurveyResponse response;
    response.phase = *phase;
    const json& answers = body.at("answers");
    if (!answers.is_array() || answers.size() != kSurveyQuestions) {
      throw ValidationError("'answers' must be an array of 4 integers");
    }
    for (int q = 0; q < kSurveyQuestions; ++q) {
      if (!answers[q].is_number_integer()) throw ValidationError("answers must be integers");
      response.answers[q] = answers[q].get<int>();
    }
    return ok(session_view(store_.record_survey(id, response)));
  }
  if (action == "guess" && n == 4) {
    expect("POST");
    authorize(req, id);
    const json body = parse_body(req.body);
    const AccountId guessed(require_string(body, "node_id"));
    const GuessOutcome outcome = store_.submit_guess(id, guessed, bundle_.sample);
    return ok(guess_payload(store_.session(id), outcome));
  }
  if (action == "recommendations" && n == 4) {
    expect("GET");
    Session s = authorize(req, id);
    return ok(recommendations_payload(s));
  }
  if (action == "whatif" && n == 4) {
    expect("POST");
    Session s = authorize(req, id);
    return ok(whatif_payload(s, parse_body(req.body)));
  }
  if (action == "demographics" && n == 4) {
    expect("POST");
    authorize(req, id);
    const json body = parse_body(req.body);
    DemographicsResponse d;
    d.politics = parse_political_ideology(require_string(body, "politics"));
    d.gender = parse_gender(require_string(body, "gender"));
    d.age = parse_age_band(require_string(body, "age"));
    return ok(session_view(store_.record_demographics(id, d)));
  }
  throw NotFoundError("no route for " + req.path);
}

HttpResponse Service::login(const json& body) {
  const auto user = login_->authenticate(require_string(body, "user_id"));
  if (!user) throw Unauthorized("login rejected");
  const Session s = store_.create_session(*user, bundle_.sample);
  json j = session_view(s);
  j["token"] = signer_.issue(s.id);
  return HttpResponse{200, j.dump(), "application/json"};
}

Session Service::authorize(const HttpRequest& request, const std::string& session_id) const {
  const auto id = signer_.verify(bearer(request.authorization));
  if (!id || *id != session_id) throw Unauthorized("token does not grant this session");
  return store_.session(session_id);
}

void Service::authorize_admin(const HttpRequest& request) const {
  if (options_.admin_token.empty()) throw Unauthorized("admin endpoints are disabled");
  const std::string token = bearer(request.authorization);
  // Length-independent comparison of the two tokens.
  unsigned diff = token.size() != options_.admin_token.size();
  for (std::size_t i = 0; i < token.size(); ++i) {
    diff |= static_cast<unsigned char>(token[i]) ^
            static_cast<unsigned char>(options_.admin_token[i % options_.admin_token.size()]);
  }
  if (diff != 0) throw Unauthorized("bad admin token");
}

json Service::session_view(const Session& s) const {
  json features{{"node_classes", shows_classes(s.arm)},
                {"recommendations", s.arm == Arm::IdeoRec}};
  return json{{"session_id", s.id},
              {"user_id", s.user.str()},
              {"arm", to_string(s.arm)},
              {"first_session", s.first_session},
              {"stage", session_stage(s)},
              {"features", std::move(features)}};
}

json Service::network_payload(const Session& s) const {
  const bool classes = shows_classes(s.arm);
  const MutualGraph& g = bundle_.sample;
  json nodes = json::array();
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const LayoutPosition& p = bundle_.layout[v];
    json node{{"id", g.id(v).str()},
              {"x", p.x},
              {"y", p.y},
              {"z", p.z},
              {"size", max_pagerank_ > 0 ? bundle_.pagerank.scores[v] / max_pagerank_ : 0.0}};
    const auto tweets = bundle_.tweets.find(g.id(v));
    node["tweets"] = tweets == bundle_.tweets.end() ? json::array() : json(tweets->second);
    if (classes) {
      const IdeologyLabel label =
          lookup_label(bundle_.labels, g.id(v)).value_or(IdeologyLabel::Unsure);
      node["class"] = to_string(label);
      node["color"] = class_color(label);
    }
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({g.id(a).str(), g.id(b).str()});
  json j{{"session_id", s.id},
         {"arm", to_string(s.arm)},
         {"features",
          {{"node_classes", classes}, {"recommendations", s.arm == Arm::IdeoRec}}},
         {"nodes", std::move(nodes)},
         {"edges", std::move(edges)}};
  if (s.arm == Arm::IdeoRec) {
    j["recommendations_endpoint"] = "/api/session/" + s.id + "/recommendations";
  }
  return j;
}

json Service::guess_payload(const Session& s, const GuessOutcome& outcome) const {
  const DiversityBreakdown d =
      displayed_diversity(s.user, bundle_.sample, bundle_.pagerank, bundle_.labels);
  json j{{"guessed", outcome.guessed.str()},
         {"true_node", outcome.true_node.str()},
         {"connected", outcome.hops.has_value()},
         {"hops", outcome.hops ? json(*outcome.hops) : json(nullptr)},
         {"diversity_score", d.score},
         {"stage", session_stage(s)}};
  if (s.arm == Arm::IdeoRec) {
    j["recommendations_endpoint"] = "/api/session/" + s.id + "/recommendations";
  }
  return j;
}

json Service::recommendations_payload(const Session& current) {
  if (current.arm != Arm::IdeoRec) {
    throw ForbiddenError("recommendations are not part of this session");
  }
  Session s = current;
  if (!s.recommendations_issued) {
    if (!s.guess) throw OrderingError("recommendations follow the network guess");
    auto recs = recommend(s.user, bundle_.sample, bundle_.pagerank, bundle_.labels);
    s = store_.issue_recommendations(s.id, std::move(recs));
  }
  const double baseline =
      displayed_diversity(s.user, bundle_.sample, bundle_.pagerank, bundle_.labels).score;
  json items = json::array();
  for (const auto& r : s.recommendations_shown) {
    const IdeologyLabel label =
        lookup_label(bundle_.labels, r.account).value_or(IdeologyLabel::Unsure);
    items.push_back({{"id", r.account.str()},
                     {"rank", r.rank},
                     {"marginal_gain", r.marginal_gain},
                     {"cumulative_score", r.cumulative_score},
                     {"class", to_string(label)},
                     {"color", class_color(label)}});
  }
  return json{{"session_id", s.id},
              {"baseline_score", baseline},
              {"items", std::move(items)},
              {"stage", session_stage(s)}};
}

json Service::whatif_payload(const Session& s, const json& body) {
  if (s.arm != Arm::IdeoRec) throw ForbiddenError("recommendations are not part of this session");
  if (!s.recommendations_issued) throw OrderingError("no recommendations issued yet");
  const json& sel = body.at("selected");
  if (!sel.is_array()) throw ValidationError("'selected' must be an array of account ids");
  std::vector<AccountId> selected;
  for (const auto& v : sel) {
    if (!v.is_string()) throw ValidationError("'selected' must be an array of account ids");
    selected.emplace_back(v.get<std::string>());
  }
  const WhatIfState state = what_if(s.user, selected, s.recommendations_shown, bundle_.sample,
                                    bundle_.pagerank, bundle_.labels);
  const bool commit = body.value("commit", false);
  Session after = s;
  if (commit) after = store_.select_recommendations(s.id, selected);
  json ids = json::array();
  for (const auto& a : state.selected) ids.push_back(a.str());
  return json{{"session_id", s.id},
              {"selected", std::move(ids)},
              {"score", state.current_score},
              {"committed", commit},
              {"stage", session_stage(after)}};
}

std::string Service::export_payload() const {
  const AnalysisTables t =
      export_analysis_tables(store_, bundle_.labels, bundle_.shares, bundle_.alignment);
  json j{
      {"survey", csv_of([&](std::ostream& os) { write_survey_table(os, t.survey); })},
      {"diversity", csv_of([&](std::ostream& os) { write_diversity_table(os, t.diversity); })},
      {"alignment", csv_of([&](std::ostream& os) { write_alignment_table(os, t.alignment); })},
      {"covariates",
       csv_of([&](std::ostream& os) { write_covariate_table(os, t.covariates); })},
      {"recommendations",
       csv_of([&](std::ostream& os) { write_recommendation_audit(os, store_); })}};
  return j.dump();
}

std::string Service::report() const {
  const auto sessions = store_.sessions();
  std::map<Arm, std::size_t> first, completed;
  for (const auto& s : sessions) {
    if (!s.first_session) continue;
    ++first[s.arm];
    if (s.pre_survey && s.post_survey) ++completed[s.arm];
  }
  std::ostringstream os;
  os << "sessions: " << sessions.size() << "\n"
     << "events: " << store_.last_sequence() << "\n"
     << "control units: " << store_.control_units().size() << "\n\n"
     << "arm          participants  completed surveys\n";
  for (Arm arm : kTreatmentArms) {
    char line[96];
    std::snprintf(line, sizeof line, "%-12s %12zu  %17zu\n", std::string(display_name(arm)).c_str(),
                  first[arm], completed[arm]);
    os << line;
  }

  const AnalysisTables t =
      export_analysis_tables(store_, bundle_.labels, bundle_.shares, bundle_.alignment);
  os << '\n';
  try {
    const auto fits = survey_effects(t.survey);
    std::vector<std::pair<std::string, stats::RegressionResult>> cols;
    for (int q = 0; q < kSurveyQuestions; ++q) cols.emplace_back("Q" + std::to_string(q + 1), fits[q]);
    os << format_effects_table("Survey deltas (baseline Viz)", cols);
  } catch (const ModelError& e) {
    os << "Survey deltas: not estimable (" << e.what() << ")\n";
  }
  os << '\n';
  try {
    std::vector<std::pair<std::string, stats::RegressionResult>> cols;
    for (int week = 1; week <= 3; ++week) {
      cols.emplace_back("Week " + std::to_string(week),
                        diversity_effects(t.diversity, week, ArmModel::FourArm));
    }
    os << format_effects_table("Connection diversity change (baseline Control)", cols);
  } catch (const ModelError& e) {
    os << "Connection diversity: not estimable (" << e.what() << ")\n";
  }
  return os.str();
}

void Service::maybe_snapshot() {
  if (options_.snapshot_every == 0 || options_.state_snapshot.empty()) return;
  std::lock_guard lock(snapshot_mu_);
  const std::uint64_t seq = store_.last_sequence();
  if (seq < last_snapshot_seq_ + options_.snapshot_every) return;
  store_.write_snapshot(options_.state_snapshot);
  last_snapshot_seq_ = seq;
}

}  // namespace netmirror
