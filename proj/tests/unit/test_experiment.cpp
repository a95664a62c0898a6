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
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "netmirror/errors.hpp"
#include "netmirror/experiment.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace netmirror;
using nmtest::node_id;

namespace {

ExperimentStore::Clock counter_clock() {
  auto t = std::make_shared<std::int64_t>(1500000000);
  return [t] { return (*t)++; };
}

SurveyResponse survey(SurveyPhase phase, std::array<int, 4> answers) {
  SurveyResponse r;
  r.phase = phase;
  r.answers = answers;
  return r;
}

MutualGraph path_graph(std::size_t n) {
  std::vector<IdPair> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(node_id(i), node_id(i + 1));
  return build_graph(edges);
}

// Creates sessions for consecutive users until one lands in the wanted arm.
Session session_in_arm(ExperimentStore& store, const MutualGraph& g, Arm arm,
                       std::size_t& next_user) {
  while (next_user < g.node_count()) {
    Session s = store.create_session(g.id(static_cast<NodeIndex>(next_user++)), g);
    if (s.arm == arm) return s;
  }
  throw std::runtime_error("ran out of users");
}

}  // namespace

TEST_CASE("assignment is uniform over the three treatment arms") {
  std::vector<AccountId> nodes;
  for (std::size_t i = 0; i < 9000; ++i) nodes.push_back(node_id(i));
  const auto g = MutualGraph::from_nodes_and_edges(nodes, {});
  ExperimentStore store(2024, counter_clock());
  std::map<Arm, int> counts;
  for (const auto& id : nodes) ++counts[store.create_session(id, g).arm];
  CHECK(counts.size() == 3);
  for (Arm arm : kTreatmentArms) {
    CHECK(std::abs(counts[arm] / 9000.0 - 1.0 / 3.0) <= 0.02);
  }
}

TEST_CASE("assignment depends only on seed and arrival order") {
  const auto g = path_graph(50);
  ExperimentStore a(7, counter_clock()), b(7, counter_clock()), c(8, counter_clock());
  std::vector<Arm> arms_a, arms_b, arms_c;
  for (NodeIndex v = 0; v < 50; ++v) {
    arms_a.push_back(a.create_session(g.id(v), g).arm);
    arms_b.push_back(b.create_session(g.id(v), g).arm);
    arms_c.push_back(c.create_session(g.id(v), g).arm);
  }
  CHECK(arms_a == arms_b);
  CHECK(arms_a != arms_c);
}

TEST_CASE("repeat logins reuse the arm and only the first session counts") {
  const auto g = path_graph(5);
  ExperimentStore store(1, counter_clock());
  const Session first = store.create_session(node_id(2), g);
  const Session second = store.create_session(node_id(2), g);
  CHECK(first.first_session);
  CHECK_FALSE(second.first_session);
  CHECK(second.arm == first.arm);
  CHECK(second.id != first.id);
  CHECK(store.first_session(node_id(2))->id == first.id);
  CHECK(store.assigned_arm(node_id(2)) == first.arm);
  CHECK_FALSE(store.assigned_arm(node_id(3)).has_value());
}

TEST_CASE("unknown users are rejected") {
  const auto g = path_graph(3);
  ExperimentStore store(1, counter_clock());
  CHECK_THROWS_AS(store.create_session(AccountId("stranger"), g), NotFoundError);
  CHECK(store.sessions().empty());
  CHECK(store.last_sequence() == 0);
}

TEST_CASE("survey rules") {
  const auto g = path_graph(4);
  ExperimentStore store(1, counter_clock());
  const Session s = store.create_session(node_id(0), g);

  CHECK_THROWS_AS(store.record_survey(s.id, survey(SurveyPhase::Pre, {1, 6, 3, 3})),
                  ValidationError);
  CHECK_THROWS_AS(store.record_survey(s.id, survey(SurveyPhase::Pre, {0, 2, 3, 3})),
                  ValidationError);
  CHECK_THROWS_AS(store.record_survey(s.id, survey(SurveyPhase::Post, {1, 2, 3, 3})),
                  OrderingError);
  store.record_survey(s.id, survey(SurveyPhase::Pre, {2, 3, 4, 5}));
  CHECK_THROWS_AS(store.record_survey(s.id, survey(SurveyPhase::Pre, {2, 3, 4, 5})),
                  OrderingError);
  // Post-survey follows the guess.
  CHECK_THROWS_AS(store.record_survey(s.id, survey(SurveyPhase::Post, {2, 4, 4, 5})),
                  OrderingError);
  store.submit_guess(s.id, node_id(0), g);
  const Session done = store.record_survey(s.id, survey(SurveyPhase::Post, {2, 4, 4, 1}));
  CHECK(done.completed);
  const auto delta = survey_delta(*done.pre_survey, *done.post_survey);
  CHECK(delta == std::array<int, 4>{0, 1, 0, -4});
  CHECK(survey_delta(*done.pre_survey, *done.pre_survey) == std::array<int, 4>{0, 0, 0, 0});
  CHECK_THROWS_AS(store.record_survey("s999999", survey(SurveyPhase::Pre, {1, 1, 1, 1})),
                  NotFoundError);
}

TEST_CASE("survey deltas stay within [-4, 4]") {
  for (int pre = 1; pre <= 5; ++pre) {
    for (int post = 1; post <= 5; ++post) {
      const auto d = survey_delta(survey(SurveyPhase::Pre, {pre, pre, pre, pre}),
                                  survey(SurveyPhase::Post, {post, post, post, post}));
      for (int v : d) {
        CHECK(v >= -4);
        CHECK(v <= 4);
      }
    }
  }
}

TEST_CASE("guess rules") {
  const auto g = path_graph(6);
  ExperimentStore store(1, counter_clock());
  const Session s = store.create_session(node_id(2), g);
  CHECK_THROWS_AS(store.submit_guess(s.id, node_id(2), g), OrderingError);
  store.record_survey(s.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
  CHECK_THROWS_AS(store.submit_guess(s.id, AccountId("outside"), g), ValidationError);
  const auto own = store.submit_guess(s.id, node_id(2), g);
  CHECK(own.hops == 0);
  CHECK(own.true_node == node_id(2));
  CHECK_THROWS_AS(store.submit_guess(s.id, node_id(3), g), OrderingError);

  const Session t = store.create_session(node_id(4), g);
  store.record_survey(t.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
  CHECK(store.submit_guess(t.id, node_id(5), g).hops == 1);
}

TEST_CASE("unreachable guesses are reported distinctly") {
  const auto g = build_graph(std::vector<IdPair>{{node_id(0), node_id(1)}, {node_id(2), node_id(3)}});
  ExperimentStore store(1, counter_clock());
  const Session s = store.create_session(node_id(0), g);
  store.record_survey(s.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
  const auto out = store.submit_guess(s.id, node_id(3), g);
  CHECK_FALSE(out.hops.has_value());
  CHECK(store.session(s.id).guess->guessed == node_id(3));
}

TEST_CASE("guess hops match an independent shortest-path oracle") {
  std::mt19937_64 rng(131);
  const auto g = nmtest::random_graph(80, 0.04, rng);
  const auto fw = nmtest::oracle::floyd_warshall(g);
  ExperimentStore store(3, counter_clock());
  std::uniform_int_distribution<NodeIndex> pick(0, 79);
  for (NodeIndex v = 0; v < 80; ++v) {
    const Session s = store.create_session(g.id(v), g);
    store.record_survey(s.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
    const NodeIndex guess = pick(rng);
    const auto out = store.submit_guess(s.id, g.id(guess), g);
    CHECK(out.hops.value_or(-1) == fw[guess][v]);
  }
}

TEST_CASE("recommendations are gated to IdeoRec and ordered after the guess") {
  const auto g = path_graph(60);
  ExperimentStore store(5, counter_clock());
  std::size_t next = 0;
  const Session viz = session_in_arm(store, g, Arm::Viz, next);
  const Session rec = session_in_arm(store, g, Arm::IdeoRec, next);
  const std::vector<Recommendation> items{{node_id(50), 0.2, 1, 0.2}, {node_id(51), 0.1, 2, 0.3}};

  CHECK_THROWS_AS(store.issue_recommendations(viz.id, items), ForbiddenError);
  CHECK_THROWS_AS(store.issue_recommendations(rec.id, items), OrderingError);
  store.record_survey(rec.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
  store.submit_guess(rec.id, rec.user, g);
  CHECK_THROWS_AS(store.select_recommendations(rec.id, {node_id(50)}), OrderingError);
  const Session issued = store.issue_recommendations(rec.id, items);
  CHECK(issued.recommendations_issued);
  CHECK(issued.recommendations_shown.size() == 2);
  const auto seq = store.last_sequence();
  store.issue_recommendations(rec.id, {});  // idempotent, no new event
  CHECK(store.last_sequence() == seq);
  CHECK(store.session(rec.id).recommendations_shown.size() == 2);

  CHECK_THROWS_AS(store.select_recommendations(rec.id, {node_id(7)}), ValidationError);
  const Session sel = store.select_recommendations(rec.id, {node_id(51), node_id(50)});
  CHECK(sel.selected_recommendations == std::vector<AccountId>{node_id(50), node_id(51)});
}

TEST_CASE("demographics follow the post-survey and are optional") {
  const auto g = path_graph(3);
  ExperimentStore store(1, counter_clock());
  const Session s = store.create_session(node_id(0), g);
  DemographicsResponse d{PoliticalIdeology::Moderate, Gender::Declined, AgeBand::Age25To34};
  CHECK_THROWS_AS(store.record_demographics(s.id, d), OrderingError);
  store.record_survey(s.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
  store.submit_guess(s.id, node_id(1), g);
  CHECK(store.record_survey(s.id, survey(SurveyPhase::Post, {3, 3, 3, 3})).completed);
  const Session done = store.record_demographics(s.id, d);
  CHECK(done.demographics->age == AgeBand::Age25To34);
  CHECK_THROWS_AS(store.record_demographics(s.id, d), OrderingError);
}

TEST_CASE("demographic names round-trip and reject unknown values") {
  for (auto v : {PoliticalIdeology::Liberal, PoliticalIdeology::Conservative,
                 PoliticalIdeology::Moderate, PoliticalIdeology::Declined}) {
    CHECK(parse_political_ideology(to_string(v)) == v);
  }
  for (auto v : {Gender::Female, Gender::Male, Gender::Other, Gender::Declined}) {
    CHECK(parse_gender(to_string(v)) == v);
  }
  for (auto v : {AgeBand::Age18To24, AgeBand::Age25To34, AgeBand::Age35To44, AgeBand::Age45To54,
                 AgeBand::Age55To64, AgeBand::Age65Plus, AgeBand::Declined}) {
    CHECK(parse_age_band(to_string(v)) == v);
  }
  CHECK(to_string(AgeBand::Age65Plus) == "65+");
  CHECK_THROWS_AS(parse_gender("robot"), ValidationError);
  CHECK_THROWS_AS(parse_age_band("12-17"), ValidationError);
  CHECK_THROWS_AS(parse_political_ideology("green"), ValidationError);
}

TEST_CASE("followee snapshots and diversity deltas") {
  const auto g = path_graph(3);
  ExperimentStore store(1, counter_clock());
  const LabelMap labels{{node_id(10), IdeologyLabel::Left},
                        {node_id(11), IdeologyLabel::Left},
                        {node_id(12), IdeologyLabel::Right}};
  const auto w0 = store.snapshot_followees(node_id(0), SnapshotOffset::Week0,
                                           {node_id(11), node_id(10), node_id(10)});
  CHECK(w0.followees == std::vector<AccountId>{node_id(10), node_id(11)});
  CHECK_THROWS_AS(
      store.snapshot_followees(node_id(0), SnapshotOffset::Week0, {node_id(10)}), OrderingError);
  const auto w1 = store.snapshot_followees(node_id(0), SnapshotOffset::Week1,
                                           {node_id(10), node_id(11)});
  CHECK(connection_diversity(w1.followees, labels).score -
            connection_diversity(w0.followees, labels).score ==
        0.0);
  const auto w2 = store.snapshot_followees(node_id(0), SnapshotOffset::Week2,
                                           {node_id(10), node_id(11), node_id(12)});
  CHECK(connection_diversity(w2.followees, labels).score >
        connection_diversity(w0.followees, labels).score);
  CHECK(store.snapshot(node_id(0), SnapshotOffset::Week2)->followees.size() == 3);
  CHECK_FALSE(store.snapshot(node_id(0), SnapshotOffset::Week3).has_value());
}

TEST_CASE("snapshot diversity deltas match a recomputation oracle") {
  std::mt19937_64 rng(137);
  const auto g = nmtest::random_graph(200, 0.0, rng);
  const auto labels = nmtest::random_labels(g, rng, 0.2, 0.1);
  ExperimentStore store(1, counter_clock());
  std::uniform_int_distribution<NodeIndex> pick(0, 199);
  for (int u = 0; u < 40; ++u) {
    const AccountId user("user" + std::to_string(u));
    std::vector<AccountId> a, b;
    for (int k = 0; k < 25; ++k) a.push_back(g.id(pick(rng)));
    for (int k = 0; k < 25; ++k) b.push_back(g.id(pick(rng)));
    const auto s0 = store.snapshot_followees(user, SnapshotOffset::Week0, a);
    const auto s1 = store.snapshot_followees(user, SnapshotOffset::Week1, b);
    auto entropy_of = [&](const std::vector<AccountId>& f) {
      std::set<AccountId> uniq(f.begin(), f.end());
      double l = 0, r = 0;
      for (const auto& x : uniq) {
        const auto it = labels.find(x);
        if (it == labels.end()) continue;
        l += it->second == IdeologyLabel::Left;
        r += it->second == IdeologyLabel::Right;
      }
      return nmtest::oracle::entropy_bits(l, r);
    };
    const double got = connection_diversity(s1.followees, labels).score -
                       connection_diversity(s0.followees, labels).score;
    CHECK(std::abs(got - (entropy_of(b) - entropy_of(a))) <= 1e-12);
  }
}

TEST_CASE("detect_acceptance") {
  Session s;
  s.arm = Arm::IdeoRec;
  s.recommendations_shown = {{node_id(1), 0.1, 1, 0.5}, {node_id(2), 0.05, 2, 0.55}};
  FolloweeSnapshot day1;
  day1.offset = SnapshotOffset::Day1;
  day1.followees = {node_id(2), node_id(9)};
  CHECK(detect_acceptance(s, day1));
  day1.followees = {node_id(8), node_id(9)};
  CHECK_FALSE(detect_acceptance(s, day1));
  // Monotone: growing the set never flips true to false.
  day1.followees = {node_id(1)};
  for (int extra = 20; extra < 40; ++extra) {
    day1.followees.push_back(node_id(extra));
    CHECK(detect_acceptance(s, day1));
  }
  FolloweeSnapshot week1 = day1;
  week1.offset = SnapshotOffset::Week1;
  CHECK_THROWS_AS(detect_acceptance(s, week1), std::invalid_argument);
  s.arm = Arm::VizIdeo;
  CHECK_THROWS_AS(detect_acceptance(s, day1), ForbiddenError);
}

TEST_CASE("35 IdeoRec sessions with 7 planted acceptors") {
  std::vector<AccountId> nodes;
  for (std::size_t i = 0; i < 400; ++i) nodes.push_back(node_id(i));
  const auto g = MutualGraph::from_nodes_and_edges(nodes, {});
  ExperimentStore store(11, counter_clock());
  std::size_t next = 0;
  int accepted = 0;
  for (int k = 0; k < 35; ++k) {
    const Session s = session_in_arm(store, g, Arm::IdeoRec, next);
    store.record_survey(s.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
    store.submit_guess(s.id, s.user, g);
    const AccountId r1("rec" + std::to_string(2 * k)), r2("rec" + std::to_string(2 * k + 1));
    store.issue_recommendations(s.id, {{r1, 0.2, 1, 0.4}, {r2, 0.1, 2, 0.5}});
    std::vector<AccountId> day1{AccountId("someone"), AccountId("else")};
    if (k % 5 == 0) day1.push_back(k % 2 ? r1 : r2);
    store.snapshot_followees(s.user, SnapshotOffset::Day1, day1);
    accepted += detect_acceptance(store.session(s.id), *store.snapshot(s.user, SnapshotOffset::Day1));
  }
  CHECK(accepted == 7);
}

TEST_CASE("control units never get sessions and participants cannot become controls") {
  const auto g = path_graph(4);
  ExperimentStore store(1, counter_clock());
  store.register_control(node_id(0));
  CHECK(store.is_control(node_id(0)));
  CHECK_THROWS_AS(store.create_session(node_id(0), g), ForbiddenError);
  store.create_session(node_id(1), g);
  CHECK_THROWS_AS(store.register_control(node_id(1)), OrderingError);
  CHECK(store.control_units() == std::vector<AccountId>{node_id(0)});
}

TEST_CASE("replaying the event log reproduces the state byte for byte") {
  const auto g = path_graph(30);
  std::ostringstream log;
  ExperimentStore store(17, counter_clock());
  store.attach_log(log);
  std::size_t next = 0;
  for (int k = 0; k < 6; ++k) {
    const Session s = store.create_session(g.id(static_cast<NodeIndex>(next++)), g);
    store.record_survey(s.id, survey(SurveyPhase::Pre, {1, 2, 3, 4}));
    store.submit_guess(s.id, g.id(3), g);
    if (s.arm == Arm::IdeoRec) {
      store.issue_recommendations(s.id, {{g.id(20), 0.3, 1, 0.3}});
      store.select_recommendations(s.id, {g.id(20)});
    }
    if (k % 2 == 0) store.record_survey(s.id, survey(SurveyPhase::Post, {2, 2, 3, 4}));
    store.snapshot_followees(s.user, SnapshotOffset::Week0, {g.id(1), g.id(2)});
  }
  store.register_control(g.id(29));
  store.create_session(g.id(0), g);  // repeat login

  ExperimentStore fresh(17);
  std::istringstream in(log.str());
  fresh.replay(in);
  CHECK(fresh.state_dump() == store.state_dump());
  CHECK(fresh.last_sequence() == store.last_sequence());

  // Replay continues assignment where the original left off.
  const Session a = store.create_session(g.id(25), g);
  const Session b = fresh.create_session(g.id(25), g);
  CHECK(a.arm == b.arm);
  CHECK(a.id == b.id);
}

TEST_CASE("replay rejects gaps and malformed lines") {
  ExperimentStore store(1);
  std::istringstream gap(
      R"({"seq":2,"type":"control_registered","session":"","at":0,"payload":{"user":"x"}})"
      "\n");
  CHECK_THROWS_AS(store.replay(gap, "log"), InputError);
  std::istringstream junk("{not json\n");
  CHECK_THROWS_AS(store.replay(junk, "log"), InputError);
}

TEST_CASE("open() restores snapshot plus newer log records") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "netmirror_store_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto g = path_graph(20);
  std::string expected;
  {
    auto store = ExperimentStore::open(9, dir / "events.ndjson", dir / "state.json", counter_clock());
    for (NodeIndex v = 0; v < 5; ++v) store->create_session(g.id(v), g);
    store->write_snapshot(dir / "state.json");
    for (NodeIndex v = 5; v < 9; ++v) {
      const Session s = store->create_session(g.id(v), g);
      store->record_survey(s.id, survey(SurveyPhase::Pre, {5, 4, 3, 2}));
    }
    expected = store->state_dump();
  }
  auto reopened = ExperimentStore::open(9, dir / "events.ndjson", dir / "state.json");
  CHECK(reopened->state_dump() == expected);
  // Without the snapshot the full log gives the same state.
  fs::remove(dir / "state.json");
  auto from_log = ExperimentStore::open(9, dir / "events.ndjson", dir / "state.json");
  CHECK(from_log->state_dump() == expected);
  fs::remove_all(dir);
}

TEST_CASE("concurrent commands are serialised and replayable") {
  std::vector<AccountId> nodes;
  for (std::size_t i = 0; i < 400; ++i) nodes.push_back(node_id(i));
  const auto g = MutualGraph::from_nodes_and_edges(nodes, {});
  std::ostringstream log;
  ExperimentStore store(23);
  store.attach_log(log);
  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < 4; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < 400; i += 4) {
          const Session s = store.create_session(nodes[i], g);
          store.record_survey(s.id, survey(SurveyPhase::Pre, {3, 3, 3, 3}));
        }
      });
    }
  }
  CHECK(store.sessions().size() == 400);
  CHECK(store.last_sequence() == 800);
  ExperimentStore fresh(23);
  std::istringstream in(log.str());
  fresh.replay(in);
  CHECK(fresh.state_dump() == store.state_dump());
}
