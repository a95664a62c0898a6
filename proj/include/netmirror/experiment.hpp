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

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "netmirror/account_id.hpp"
#include "netmirror/arm.hpp"
#include "netmirror/graph.hpp"
#include "netmirror/recommender.hpp"

namespace netmirror {

inline constexpr int kSurveyQuestions = 4;

enum class SurveyPhase { Pre, Post };
std::string_view to_string(SurveyPhase phase);
std::optional<SurveyPhase> parse_survey_phase(std::string_view s);

// Four answers on a 1..5 agreement scale.
struct SurveyResponse {
  SurveyPhase phase = SurveyPhase::Pre;
  std::array<int, kSurveyQuestions> answers{};

  // Throws ValidationError for answers outside 1..5.
  void validate() const;
};

// post - pre per question, each in [-4, 4].
std::array<int, kSurveyQuestions> survey_delta(const SurveyResponse& pre,
                                               const SurveyResponse& post);

enum class PoliticalIdeology { Liberal, Conservative, Moderate, Declined };
enum class Gender { Female, Male, Other, Declined };
enum class AgeBand { Age18To24, Age25To34, Age35To44, Age45To54, Age55To64, Age65Plus, Declined };

struct DemographicsResponse {
  PoliticalIdeology politics = PoliticalIdeology::Declined;
  Gender gender = Gender::Declined;
  AgeBand age = AgeBand::Declined;
};

std::string_view to_string(PoliticalIdeology v);
std::string_view to_string(Gender v);
std::string_view to_string(AgeBand v);
// Throw ValidationError for unknown names.
PoliticalIdeology parse_political_ideology(std::string_view s);
Gender parse_gender(std::string_view s);
AgeBand parse_age_band(std::string_view s);

struct GuessOutcome {
  AccountId guessed;
  AccountId true_node;
  std::optional<int> hops;  // nullopt: not connected
};

struct Session {
  std::string id;
  AccountId user;
  Arm arm = Arm::Viz;
  std::int64_t created_at = 0;
  bool first_session = false;  // the only analysis-eligible session per user
  std::optional<SurveyResponse> pre_survey;
  std::optional<SurveyResponse> post_survey;
  std::optional<DemographicsResponse> demographics;
  std::optional<GuessOutcome> guess;
  bool recommendations_issued = false;
  std::int64_t recommendations_issued_at = 0;
  std::vector<Recommendation> recommendations_shown;
  std::vector<AccountId> selected_recommendations;
  bool completed = false;
  std::int64_t completed_at = 0;
};

enum class SnapshotOffset { Week0, Day1, Week1, Week2, Week3 };
std::string_view to_string(SnapshotOffset offset);
std::optional<SnapshotOffset> parse_snapshot_offset(std::string_view s);

struct FolloweeSnapshot {
  AccountId user;
  SnapshotOffset offset = SnapshotOffset::Week0;
  std::vector<AccountId> followees;  // ascending, unique
  std::int64_t captured_at = 0;
};

// True iff any account shown during treatment appears in the day-1 followees.
// Throws ForbiddenError unless the session is IdeoRec, std::invalid_argument
// unless the snapshot is the day-1 capture.
bool detect_acceptance(const Session& session, const FolloweeSnapshot& day1);

// Session and snapshot state, mutated only by appending events. Every command
// validates, appends one record to the log, then applies it; replaying the log
// into a fresh store reproduces the state exactly. All members are serialised
// by one mutex, so per-session transitions and log appends are totally ordered.
class ExperimentStore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit ExperimentStore(std::uint64_t seed, Clock clock = {});

  // Future events are appended to the file (created if missing).
  void attach_log(const std::filesystem::path& path);
  // Future events are also written to the stream (tests, mirroring).
  void attach_log(std::ostream& sink);

  // Restores a snapshot (if present) and then replays log records with a
  // higher sequence number. The log is then attached for appends.
  static std::unique_ptr<ExperimentStore> open(std::uint64_t seed,
                                               const std::filesystem::path& log_path,
                                               const std::filesystem::path& snapshot_path,
                                               Clock clock = {});

  // ---- commands ----
  // Reuses the user's arm on repeat logins. Throws NotFoundError when the user
  // is not in the sample, ForbiddenError for registered control units.
  Session create_session(const AccountId& user, const MutualGraph& sample);
  Session record_survey(const std::string& session_id, const SurveyResponse& response);
  GuessOutcome submit_guess(const std::string& session_id, const AccountId& guessed,
                            const MutualGraph& sample);
  Session issue_recommendations(const std::string& session_id,
                                std::vector<Recommendation> recommendations);
  Session select_recommendations(const std::string& session_id,
                                 std::vector<AccountId> selected);
  Session record_demographics(const std::string& session_id,
                              const DemographicsResponse& response);
  FolloweeSnapshot snapshot_followees(const AccountId& user, SnapshotOffset offset,
                                      std::vector<AccountId> followees,
                                      std::optional<std::int64_t> captured_at = {});
  void register_control(const AccountId& user);

  // ---- queries ----
  Session session(const std::string& session_id) const;  // throws NotFoundError
  std::vector<Session> sessions() const;                  // ascending id
  std::optional<Session> first_session(const AccountId& user) const;
  std::optional<Arm> assigned_arm(const AccountId& user) const;
  std::optional<FolloweeSnapshot> snapshot(const AccountId& user, SnapshotOffset offset) const;
  std::vector<AccountId> control_units() const;
  bool is_control(const AccountId& user) const;
  std::uint64_t last_sequence() const;

  // Canonical state serialisation; identical states give identical bytes.
  nlohmann::json state_json() const;
  std::string state_dump() const { return state_json().dump(); }

  // Applies records from an event log. Throws InputError on malformed lines
  // or sequence gaps.
  void replay(std::istream& log, const std::string& source = "event log");

  void write_snapshot(const std::filesystem::path& path) const;

 private:
  struct SnapshotKey {
    AccountId user;
    SnapshotOffset offset;
    auto operator<=>(const SnapshotKey&) const = default;
  };

  void commit(const std::string& type, const std::string& session_id,
              nlohmann::json payload);
  void apply(const nlohmann::json& record);
  Session& mutable_session(const std::string& session_id);
  std::int64_t now() const;
  Arm draw_arm(std::uint64_t assignment_index) const;
  void load_state(const nlohmann::json& state);

  mutable std::mutex mu_;
  std::uint64_t seed_;
  Clock clock_;
  std::uint64_t seq_ = 0;
  std::uint64_t assignments_ = 0;
  std::uint64_t next_session_ = 1;
  std::map<std::string, Session> sessions_;
  std::map<AccountId, std::string> first_session_;
  std::map<SnapshotKey, FolloweeSnapshot> snapshots_;
  std::set<AccountId> controls_;
  std::unique_ptr<std::ofstream> log_file_;
  std::ostream* log_sink_ = nullptr;
};

}  // namespace netmirror
