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
#include "netmirror/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "netmirror/errors.hpp"

namespace netmirror {

using nlohmann::json;

std::string_view to_string(SurveyPhase phase) {
  return phase == SurveyPhase::Pre ? "pre" : "post";
}

std::optional<SurveyPhase> parse_survey_phase(std::string_view s) {
  if (s == "pre") return SurveyPhase::Pre;
  if (s == "post") return SurveyPhase::Post;
  return std::nullopt;
}

void SurveyResponse::validate() const {
  for (int i = 0; i < kSurveyQuestions; ++i) {
    if (answers[static_cast<std::size_t>(i)] < 1 || answers[static_cast<std::size_t>(i)] > 5) {
      throw ValidationError("answer to q" + std::to_string(i + 1) +
                            " must be an integer from 1 to 5");
    }
  }
}

std::array<int, kSurveyQuestions> survey_delta(const SurveyResponse& pre,
                                               const SurveyResponse& post) {
  std::array<int, kSurveyQuestions> d{};
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = post.answers[i] - pre.answers[i];
  return d;
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& names,
             std::string_view what) {
  for (const auto& [value, name] : names) {
    if (s == name) return value;
  }
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::pair<E, std::string_view>, N>& names) {
  for (const auto& [value, name] : names) {
    if (v == value) return name;
  }
  return "declined";
}

constexpr std::array<std::pair<PoliticalIdeology, std::string_view>, 4> kPolitics{{
    {PoliticalIdeology::Liberal, "liberal"},
    {PoliticalIdeology::Conservative, "conservative"},
    {PoliticalIdeology::Moderate, "moderate"},
    {PoliticalIdeology::Declined, "declined"},
}};
constexpr std::array<std::pair<Gender, std::string_view>, 4> kGenders{{
    {Gender::Female, "female"},
    {Gender::Male, "male"},
    {Gender::Other, "other"},
    {Gender::Declined, "declined"},
}};
constexpr std::array<std::pair<AgeBand, std::string_view>, 7> kAges{{
    {AgeBand::Age18To24, "18-24"},
    {AgeBand::Age25To34, "25-34"},
    {AgeBand::Age35To44, "35-44"},
    {AgeBand::Age45To54, "45-54"},
    {AgeBand::Age55To64, "55-64"},
    {AgeBand::Age65Plus, "65+"},
    {AgeBand::Declined, "declined"},
}};
constexpr std::array<std::pair<SnapshotOffset, std::string_view>, 5> kOffsets{{
    {SnapshotOffset::Week0, "week0"},
    {SnapshotOffset::Day1, "day1"},
    {SnapshotOffset::Week1, "week1"},
    {SnapshotOffset::Week2, "week2"},
    {SnapshotOffset::Week3, "week3"},
}};

std::string session_name(std::uint64_t number) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(number));
  return buf;
}

std::vector<AccountId> sorted_unique(std::vector<AccountId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

json ids_to_json(const std::vector<AccountId>& ids) {
  json out = json::array();
  for (const auto& id : ids) out.push_back(id.str());
  return out;
}

std::vector<AccountId> ids_from_json(const json& j) {
  std::vector<AccountId> out;
  for (const auto& v : j) out.emplace_back(v.get<std::string>());
  return out;
}

json survey_to_json(const SurveyResponse& s) {
  return {{"phase", to_string(s.phase)}, {"answers", s.answers}};
}

SurveyResponse survey_from_json(const json& j) {
  SurveyResponse s;
  s.phase = parse_survey_phase(j.at("phase").get<std::string>()).value();
  s.answers = j.at("answers").get<std::array<int, kSurveyQuestions>>();
  return s;
}

json demographics_to_json(const DemographicsResponse& d) {
  return {{"politics", to_string(d.politics)},
          {"gender", to_string(d.gender)},
          {"age", to_string(d.age)}};
}

DemographicsResponse demographics_from_json(const json& j) {
  return {parse_political_ideology(j.at("politics").get<std::string>()),
          parse_gender(j.at("gender").get<std::string>()),
          parse_age_band(j.at("age").get<std::string>())};
}

json guess_to_json(const GuessOutcome& g) {
  return {{"guessed", g.guessed.str()},
          {"true_node", g.true_node.str()},
          {"hops", g.hops ? json(*g.hops) : json(nullptr)}};
}

GuessOutcome guess_from_json(const json& j) {
  GuessOutcome g;
  g.guessed = AccountId(j.at("guessed").get<std::string>());
  g.true_node = AccountId(j.at("true_node").get<std::string>());
  if (!j.at("hops").is_null()) g.hops = j.at("hops").get<int>();
  return g;
}

json recs_to_json(const std::vector<Recommendation>& recs) {
  json out = json::array();
  for (const auto& r : recs) {
    out.push_back({{"account", r.account.str()},
                   {"marginal_gain", r.marginal_gain},
                   {"rank", r.rank},
                   {"cumulative_score", r.cumulative_score}});
  }
  return out;
}

std::vector<Recommendation> recs_from_json(const json& j) {
  std::vector<Recommendation> out;
  for (const auto& r : j) {
    out.push_back({AccountId(r.at("account").get<std::string>()),
                   r.at("marginal_gain").get<double>(), r.at("rank").get<int>(),
                   r.at("cumulative_score").get<double>()});
  }
  return out;
}

template <typename T, typename F>
json optional_json(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : json(nullptr);
}

json session_to_json(const Session& s) {
  return {{"id", s.id},
          {"user", s.user.str()},
          {"arm", to_string(s.arm)},
          {"created_at", s.created_at},
          {"first_session", s.first_session},
          {"pre_survey", optional_json(s.pre_survey, survey_to_json)},
          {"post_survey", optional_json(s.post_survey, survey_to_json)},
          {"demographics", optional_json(s.demographics, demographics_to_json)},
          {"guess", optional_json(s.guess, guess_to_json)},
          {"recommendations_issued", s.recommendations_issued},
          {"recommendations_issued_at", s.recommendations_issued_at},
          {"recommendations_shown", recs_to_json(s.recommendations_shown)},
          {"selected_recommendations", ids_to_json(s.selected_recommendations)},
          {"completed", s.completed},
          {"completed_at", s.completed_at}};
}

Session session_from_json(const json& j) {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.user = AccountId(j.at("user").get<std::string>());
  s.arm = parse_arm(j.at("arm").get<std::string>()).value();
  s.created_at = j.at("created_at").get<std::int64_t>();
  s.first_session = j.at("first_session").get<bool>();
  if (!j.at("pre_survey").is_null()) s.pre_survey = survey_from_json(j.at("pre_survey"));
  if (!j.at("post_survey").is_null()) s.post_survey = survey_from_json(j.at("post_survey"));
  if (!j.at("demographics").is_null()) {
    s.demographics = demographics_from_json(j.at("demographics"));
  }
  if (!j.at("guess").is_null()) s.guess = guess_from_json(j.at("guess"));
  s.recommendations_issued = j.at("recommendations_issued").get<bool>();
  s.recommendations_issued_at = j.at("recommendations_issued_at").get<std::int64_t>();
  s.recommendations_shown = recs_from_json(j.at("recommendations_shown"));
  s.selected_recommendations = ids_from_json(j.at("selected_recommendations"));
  s.completed = j.at("completed").get<bool>();
  s.completed_at = j.at("completed_at").get<std::int64_t>();
  return s;
}

json snapshot_to_json(const FolloweeSnapshot& s) {
  return {{"user", s.user.str()},
          {"offset", to_string(s.offset)},
          {"followees", ids_to_json(s.followees)},
          {"captured_at", s.captured_at}};
}

FolloweeSnapshot snapshot_from_json(const json& j) {
  FolloweeSnapshot s;
  s.user = AccountId(j.at("user").get<std::string>());
  s.offset = parse_snapshot_offset(j.at("offset").get<std::string>()).value();
  s.followees = ids_from_json(j.at("followees"));
  s.captured_at = j.at("captured_at").get<std::int64_t>();
  return s;
}

}  // namespace

std::string_view to_string(PoliticalIdeology v) { return enum_name(v, kPolitics); }
std::string_view to_string(Gender v) { return enum_name(v, kGenders); }
std::string_view to_string(AgeBand v) { return enum_name(v, kAges); }
std::string_view to_string(SnapshotOffset v) { return enum_name(v, kOffsets); }

PoliticalIdeology parse_political_ideology(std::string_view s) {
  return parse_enum(s, kPolitics, "political ideology");
}
Gender parse_gender(std::string_view s) { return parse_enum(s, kGenders, "gender"); }
AgeBand parse_age_band(std::string_view s) { return parse_enum(s, kAges, "age band"); }

std::optional<SnapshotOffset> parse_snapshot_offset(std::string_view s) {
  for (const auto& [value, name] : kOffsets) {
    if (s == name) return value;
  }
  return std::nullopt;
}

bool detect_acceptance(const Session& session, const FolloweeSnapshot& day1) {
  if (session.arm != Arm::IdeoRec) {
    throw ForbiddenError("acceptance is only defined for sessions that were shown recommendations");
  }
  if (day1.offset != SnapshotOffset::Day1) {
    throw std::invalid_argument("acceptance needs the day-1 followee snapshot");
  }
  for (const auto& r : session.recommendations_shown) {
    if (std::binary_search(day1.followees.begin(), day1.followees.end(), r.account)) {
      return true;
    }
  }
  return false;
}

// ---- ExperimentStore ----

ExperimentStore::ExperimentStore(std::uint64_t seed, Clock clock)
    : seed_(seed), clock_(std::move(clock)) {}

void ExperimentStore::attach_log(const std::filesystem::path& path) {
  std::lock_guard lock(mu_);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto file = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*file) throw std::runtime_error("cannot open event log " + path.string());
  log_file_ = std::move(file);
}

void ExperimentStore::attach_log(std::ostream& sink) {
  std::lock_guard lock(mu_);
  log_sink_ = &sink;
}

std::unique_ptr<ExperimentStore> ExperimentStore::open(std::uint64_t seed,
                                                       const std::filesystem::path& log_path,
                                                       const std::filesystem::path& snapshot_path,
                                                       Clock clock) {
  auto store = std::make_unique<ExperimentStore>(seed, std::move(clock));
  if (!snapshot_path.empty() && std::filesystem::exists(snapshot_path)) {
    std::ifstream in(snapshot_path);
    json snap;
    try {
      snap = json::parse(in);
    } catch (const json::exception& e) {
      throw InputError(snapshot_path.string(), 1, std::string("bad snapshot: ") + e.what());
    }
    store->load_state(snap.at("state"));
  }
  if (std::filesystem::exists(log_path)) {
    std::ifstream in(log_path);
    store->replay(in, log_path.string());
  }
  store->attach_log(log_path);
  return store;
}

std::int64_t ExperimentStore::now() const {
  if (clock_) return clock_();
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Arm ExperimentStore::draw_arm(std::uint64_t assignment_index) const {
  // Counter-based: the i-th new user's arm depends only on (seed, i), so
  // replay never needs generator state.
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(assignment_index),
                    static_cast<std::uint32_t>(assignment_index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(kTreatmentArms.size()) - 1);
  return kTreatmentArms[static_cast<std::size_t>(pick(rng))];
}

void ExperimentStore::commit(const std::string& type, const std::string& session_id,
                             json payload) {
  json record = {{"seq", seq_ + 1},
                 {"type", type},
                 {"session", session_id},
                 {"at", now()},
                 {"payload", std::move(payload)}};
  const std::string line = record.dump();
  if (log_file_) {
    *log_file_ << line << '\n';
    log_file_->flush();
    if (!*log_file_) throw std::runtime_error("event log write failed");
  }
  if (log_sink_) *log_sink_ << line << '\n';
  apply(record);
}

Session& ExperimentStore::mutable_session(const std::string& session_id) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

void ExperimentStore::apply(const json& record) {
  const auto seq = record.at("seq").get<std::uint64_t>();
  if (seq != seq_ + 1) {
    throw std::runtime_error("event sequence gap: expected " + std::to_string(seq_ + 1) +
                             ", got " + std::to_string(seq));
  }
  const auto type = record.at("type").get<std::string>();
  const auto session_id = record.at("session").get<std::string>();
  const auto at = record.at("at").get<std::int64_t>();
  const json& p = record.at("payload");

  if (type == "session_created") {
    Session s;
    s.id = session_id;
    s.user = AccountId(p.at("user").get<std::string>());
    s.arm = parse_arm(p.at("arm").get<std::string>()).value();
    s.created_at = at;
    s.first_session = p.at("first").get<bool>();
    if (s.first_session) {
      first_session_[s.user] = s.id;
      ++assignments_;
    }
    next_session_ = std::max(next_session_, p.at("number").get<std::uint64_t>() + 1);
    sessions_[s.id] = std::move(s);
  } else if (type == "survey_recorded") {
    Session& s = mutable_session(session_id);
    SurveyResponse r = survey_from_json(p);
    if (r.phase == SurveyPhase::Pre) {
      s.pre_survey = r;
    } else {
      s.post_survey = r;
      s.completed = true;
      s.completed_at = at;
    }
  } else if (type == "guess_submitted") {
    mutable_session(session_id).guess = guess_from_json(p);
  } else if (type == "recommendations_issued") {
    Session& s = mutable_session(session_id);
    s.recommendations_issued = true;
    s.recommendations_issued_at = at;
    s.recommendations_shown = recs_from_json(p.at("items"));
  } else if (type == "recommendations_selected") {
    mutable_session(session_id).selected_recommendations = ids_from_json(p.at("selected"));
  } else if (type == "demographics_recorded") {
    mutable_session(session_id).demographics = demographics_from_json(p);
  } else if (type == "snapshot_recorded") {
    FolloweeSnapshot snap = snapshot_from_json(p);
    SnapshotKey key{snap.user, snap.offset};
    snapshots_[key] = std::move(snap);
  } else if (type == "control_registered") {
    controls_.insert(AccountId(p.at("user").get<std::string>()));
  } else {
    throw std::runtime_error("unknown event type '" + type + "'");
  }
  seq_ = seq;
}

void ExperimentStore::replay(std::istream& log, const std::string& source) {
  std::lock_guard lock(mu_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(log, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json record = json::parse(line);
      if (record.at("seq").get<std::uint64_t>() <= seq_) continue;  // covered by snapshot
      apply(record);
    } catch (const std::exception& e) {
      throw InputError(source, lineno, e.what());
    }
  }
}

Session ExperimentStore::create_session(const AccountId& user, const MutualGraph& sample) {
  std::lock_guard lock(mu_);
  if (!sample.contains(user)) {
    throw NotFoundError("account '" + user.str() +
                        "' is not part of the network sample and cannot take part");
  }
  if (controls_.contains(user)) {
    throw ForbiddenError("account '" + user.str() + "' is an observational control unit");
  }
  const auto first = first_session_.find(user);
  const bool is_first = first == first_session_.end();
  const Arm arm = is_first ? draw_arm(assignments_) : sessions_.at(first->second).arm;
  const std::uint64_t number = next_session_;
  const std::string id = session_name(number);
  commit("session_created", id,
         {{"user", user.str()}, {"arm", to_string(arm)}, {"first", is_first}, {"number", number}});
  return sessions_.at(id);
}

Session ExperimentStore::record_survey(const std::string& session_id,
                                       const SurveyResponse& response) {
  std::lock_guard lock(mu_);
  Session& s = mutable_session(session_id);
  response.validate();
  if (response.phase == SurveyPhase::Pre) {
    if (s.pre_survey) throw OrderingError("pre-survey already recorded");
  } else {
    if (s.post_survey) throw OrderingError("post-survey already recorded");
    if (!s.pre_survey) throw OrderingError("post-survey requires the pre-survey first");
    if (!s.guess) throw OrderingError("post-survey requires the network guess first");
  }
  commit("survey_recorded", session_id, survey_to_json(response));
  return s;
}

GuessOutcome ExperimentStore::submit_guess(const std::string& session_id,
                                           const AccountId& guessed,
                                           const MutualGraph& sample) {
  std::lock_guard lock(mu_);
  Session& s = mutable_session(session_id);
  if (!s.pre_survey) throw OrderingError("the pre-survey must be completed before guessing");
  if (s.guess) throw OrderingError("a guess was already submitted for this session");
  if (!sample.contains(guessed)) {
    throw ValidationError("node '" + guessed.str() + "' is not in the network");
  }
  GuessOutcome g{guessed, s.user, hop_distance(sample, guessed, s.user)};
  commit("guess_submitted", session_id, guess_to_json(g));
  return g;
}

Session ExperimentStore::issue_recommendations(const std::string& session_id,
                                               std::vector<Recommendation> recommendations) {
  std::lock_guard lock(mu_);
  Session& s = mutable_session(session_id);
  if (s.arm != Arm::IdeoRec) {
    throw ForbiddenError("recommendations are not part of this session");
  }
  if (!s.guess) throw OrderingError("recommendations follow the network guess");
  if (s.completed) throw OrderingError("session already completed");
  if (s.recommendations_issued) return s;
  commit("recommendations_issued", session_id, {{"items", recs_to_json(recommendations)}});
  return s;
}

Session ExperimentStore::select_recommendations(const std::string& session_id,
                                                std::vector<AccountId> selected) {
  std::lock_guard lock(mu_);
  Session& s = mutable_session(session_id);
  if (s.arm != Arm::IdeoRec) {
    throw ForbiddenError("recommendations are not part of this session");
  }
  if (!s.recommendations_issued) throw OrderingError("no recommendations issued yet");
  if (s.completed) throw OrderingError("session already completed");
  selected = sorted_unique(std::move(selected));
  for (const auto& a : selected) {
    const bool shown = std::any_of(s.recommendations_shown.begin(), s.recommendations_shown.end(),
                                   [&](const Recommendation& r) { return r.account == a; });
    if (!shown) throw ValidationError("'" + a.str() + "' was not recommended in this session");
  }
  // Stored in issued rank order.
  std::vector<AccountId> ordered;
  for (const auto& r : s.recommendations_shown) {
    if (std::binary_search(selected.begin(), selected.end(), r.account)) {
      ordered.push_back(r.account);
    }
  }
  commit("recommendations_selected", session_id, {{"selected", ids_to_json(ordered)}});
  return s;
}

Session ExperimentStore::record_demographics(const std::string& session_id,
                                             const DemographicsResponse& response) {
  std::lock_guard lock(mu_);
  Session& s = mutable_session(session_id);
  if (!s.post_survey) throw OrderingError("demographics follow the post-survey");
  if (s.demographics) throw OrderingError("demographics already recorded");
  commit("demographics_recorded", session_id, demographics_to_json(response));
  return s;
}

FolloweeSnapshot ExperimentStore::snapshot_followees(const AccountId& user,
                                                     SnapshotOffset offset,
                                                     std::vector<AccountId> followees,
                                                     std::optional<std::int64_t> captured_at) {
  std::lock_guard lock(mu_);
  if (user.empty()) throw ValidationError("snapshot user id is empty");
  if (snapshots_.contains(SnapshotKey{user, offset})) {
    throw OrderingError("snapshot " + std::string(to_string(offset)) + " for '" + user.str() +
                        "' already recorded");
  }
  FolloweeSnapshot snap{user, offset, sorted_unique(std::move(followees)),
                        captured_at.value_or(now())};
  commit("snapshot_recorded", "", snapshot_to_json(snap));
  return snapshots_.at(SnapshotKey{user, offset});
}

void ExperimentStore::register_control(const AccountId& user) {
  std::lock_guard lock(mu_);
  if (user.empty()) throw ValidationError("control user id is empty");
  if (first_session_.contains(user)) {
    throw OrderingError("'" + user.str() + "' already took part and cannot be a control unit");
  }
  if (controls_.contains(user)) return;
  commit("control_registered", "", {{"user", user.str()}});
}

Session ExperimentStore::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

std::vector<Session> ExperimentStore::sessions() const {
  std::lock_guard lock(mu_);
  std::vector<Session> out;
  out.reserve(sessions_.size());
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::optional<Session> ExperimentStore::first_session(const AccountId& user) const {
  std::lock_guard lock(mu_);
  const auto it = first_session_.find(user);
  if (it == first_session_.end()) return std::nullopt;
  return sessions_.at(it->second);
}

std::optional<Arm> ExperimentStore::assigned_arm(const AccountId& user) const {
  std::lock_guard lock(mu_);
  const auto it = first_session_.find(user);
  if (it == first_session_.end()) return std::nullopt;
  return sessions_.at(it->second).arm;
}

std::optional<FolloweeSnapshot> ExperimentStore::snapshot(const AccountId& user,
                                                          SnapshotOffset offset) const {
  std::lock_guard lock(mu_);
  const auto it = snapshots_.find(SnapshotKey{user, offset});
  if (it == snapshots_.end()) return std::nullopt;
  return it->second;
}

std::vector<AccountId> ExperimentStore::control_units() const {
  std::lock_guard lock(mu_);
  return {controls_.begin(), controls_.end()};
}

bool ExperimentStore::is_control(const AccountId& user) const {
  std::lock_guard lock(mu_);
  return controls_.contains(user);
}

std::uint64_t ExperimentStore::last_sequence() const {
  std::lock_guard lock(mu_);
  return seq_;
}

json ExperimentStore::state_json() const {
  std::lock_guard lock(mu_);
  json sessions = json::array();
  for (const auto& [id, s] : sessions_) sessions.push_back(session_to_json(s));
  json snaps = json::array();
  for (const auto& [key, s] : snapshots_) snaps.push_back(snapshot_to_json(s));
  json controls = json::array();
  for (const auto& c : controls_) controls.push_back(c.str());
  return {{"seq", seq_},
          {"assignments", assignments_},
          {"next_session", next_session_},
          {"sessions", std::move(sessions)},
          {"snapshots", std::move(snaps)},
          {"controls", std::move(controls)}};
}

void ExperimentStore::load_state(const json& state) {
  std::lock_guard lock(mu_);
  seq_ = state.at("seq").get<std::uint64_t>();
  assignments_ = state.at("assignments").get<std::uint64_t>();
  next_session_ = state.at("next_session").get<std::uint64_t>();
  sessions_.clear();
  first_session_.clear();
  for (const auto& j : state.at("sessions")) {
    Session s = session_from_json(j);
    if (s.first_session) first_session_[s.user] = s.id;
    sessions_[s.id] = std::move(s);
  }
  snapshots_.clear();
  for (const auto& j : state.at("snapshots")) {
    FolloweeSnapshot s = snapshot_from_json(j);
    SnapshotKey key{s.user, s.offset};
    snapshots_[key] = std::move(s);
  }
  controls_.clear();
  for (const auto& c : state.at("controls")) controls_.insert(AccountId(c.get<std::string>()));
}

void ExperimentStore::write_snapshot(const std::filesystem::path& path) const {
  const json state = state_json();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << json{{"seq", state.at("seq")}, {"state", state}}.dump() << '\n';
    if (!out) throw std::runtime_error("cannot write snapshot " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace netmirror
