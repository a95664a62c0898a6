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
#include <sstream>

#include "doctest.h"
#include "netmirror/csv.hpp"
#include "netmirror/errors.hpp"
#include "netmirror/tables.hpp"
#include "synthetic.hpp"

using namespace netmirror;
using nmtest::node_id;

namespace {

struct Fixture {
  std::int64_t now = 1600000000;
  ExperimentStore store{4, [this] { return now++; }};
  MutualGraph graph;
  LabelMap labels;
  AlignmentTable alignment;
  std::vector<ShareRecord> shares;

  explicit Fixture(std::size_t n) {
    std::vector<AccountId> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(node_id(i));
    graph = MutualGraph::from_nodes_and_edges(nodes, {});
    labels = {{node_id(0), IdeologyLabel::Left},
              {node_id(1), IdeologyLabel::Right},
              {node_id(2), IdeologyLabel::Left}};
    alignment.set("left.example", -0.8);
    alignment.set("right.example", 0.6);
  }

  Session run(std::size_t user, bool post) {
    const Session s = store.create_session(node_id(user), graph);
    store.record_survey(s.id, {SurveyPhase::Pre, {1, 2, 3, 4}});
    store.submit_guess(s.id, node_id(user), graph);
    if (post) store.record_survey(s.id, {SurveyPhase::Post, {2, 2, 3, 5}});
    return store.session(s.id);
  }
};

}  // namespace

TEST_CASE("a user with two sessions yields one row from the first session") {
  Fixture f(10);
  const Session first = f.run(5, true);
  const Session second = f.store.create_session(node_id(5), f.graph);
  f.store.record_survey(second.id, {SurveyPhase::Pre, {5, 5, 5, 5}});
  f.store.submit_guess(second.id, node_id(5), f.graph);
  f.store.record_survey(second.id, {SurveyPhase::Post, {5, 5, 5, 5}});

  const auto t = export_analysis_tables(f.store, f.labels, f.shares, f.alignment);
  REQUIRE(t.survey.size() == 1);
  CHECK(t.survey[0].session_id == first.id);
  CHECK(t.survey[0].pre == std::array<int, 4>{1, 2, 3, 4});
  CHECK(t.diversity.size() == 1);
  CHECK(t.covariates.users.size() == 1);
}

TEST_CASE("sessions without a post-survey leave the survey table only") {
  Fixture f(10);
  f.run(1, true);
  f.run(2, false);
  const auto all = export_analysis_tables(f.store, f.labels, f.shares, f.alignment);
  CHECK(all.survey.size() == 1);
  CHECK(all.diversity.size() == 2);
  CHECK(all.alignment.size() == 2);
  int complete = 0;
  for (const auto& r : all.diversity) complete += r.survey_complete;
  CHECK(complete == 1);

  const auto strict =
      export_analysis_tables(f.store, f.labels, f.shares, f.alignment, {.require_complete_surveys = true});
  CHECK(strict.survey.size() == 1);
  CHECK(strict.diversity.size() == 1);
  CHECK(strict.diversity[0].user == node_id(1));
}

TEST_CASE("81 control and 93 treated units") {
  Fixture f(200);
  for (std::size_t i = 0; i < 93; ++i) f.run(i, i % 7 != 0);
  for (std::size_t i = 0; i < 81; ++i) f.store.register_control(AccountId("c" + std::to_string(i)));
  const auto t = export_analysis_tables(f.store, f.labels, f.shares, f.alignment);
  CHECK(t.diversity.size() == 174);
  CHECK(t.alignment.size() == 174);
  CHECK(t.covariates.users.size() == 93);
  std::size_t controls = 0;
  for (const auto& r : t.diversity) controls += r.arm == Arm::Control;
  CHECK(controls == 81);
  CHECK(t.survey.size() == 93 - 14);

  // Controls stay even when incomplete participants are dropped.
  const auto strict =
      export_analysis_tables(f.store, f.labels, f.shares, f.alignment, {.require_complete_surveys = true});
  CHECK(strict.diversity.size() == 81 + 93 - 14);
}

TEST_CASE("diversity, alignment and covariates are filled from snapshots and shares") {
  Fixture f(10);
  f.run(3, true);
  f.store.snapshot_followees(node_id(3), SnapshotOffset::Week0, {node_id(0), node_id(2)});
  f.store.snapshot_followees(node_id(3), SnapshotOffset::Week2,
                             {node_id(0), node_id(1), node_id(2), node_id(9)});
  f.shares = {{node_id(3), "2020-01-01T00:00:00Z", "https://left.example/a", SharePhase::Before},
              {node_id(3), "2020-01-02T00:00:00Z", "https://www.right.example/b", SharePhase::Before},
              {node_id(3), "2020-02-01T00:00:00Z", "https://right.example/c", SharePhase::After},
              {node_id(3), "2020-02-02T00:00:00Z", "https://unknown.example/", SharePhase::After}};
  const auto t = export_analysis_tables(f.store, f.labels, f.shares, f.alignment);
  const auto& d = t.diversity.at(0);
  CHECK(d.diversity[0] == doctest::Approx(0.0));
  CHECK_FALSE(d.diversity[1].has_value());
  CHECK(*d.diversity[2] == doctest::Approx(0.918295834054489).epsilon(1e-12));
  CHECK_FALSE(d.diversity[3].has_value());

  const auto& a = t.alignment.at(0);
  CHECK(*a.before_mean == doctest::Approx(-0.1));
  CHECK(*a.after_mean == doctest::Approx(0.6));
  CHECK(a.before_urls == 2);
  CHECK(a.after_urls == 1);

  const auto& row = t.covariates.values.at(0);
  CHECK(*row[0] == 1);
  CHECK(*row[3] == 4);
  CHECK(*row[4] == doctest::Approx(0.0));
  CHECK(*row[5] == doctest::Approx(0.1));
  CHECK(*row[6] == 2);
}

TEST_CASE("acceptance is set only for IdeoRec units with a day-1 snapshot") {
  Fixture f(300);
  int with_flag = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    const Session s = f.run(i, false);
    if (s.arm == Arm::IdeoRec) {
      f.store.issue_recommendations(s.id, {{node_id(299), 0.1, 1, 0.5}});
    }
    f.store.record_survey(s.id, {SurveyPhase::Post, {3, 3, 3, 3}});
    if (i % 2 == 0) f.store.snapshot_followees(s.user, SnapshotOffset::Day1, {node_id(299)});
  }
  const auto t = export_analysis_tables(f.store, f.labels, f.shares, f.alignment);
  for (const auto& r : t.survey) {
    const bool expect = r.arm == Arm::IdeoRec &&
                        f.store.snapshot(r.user, SnapshotOffset::Day1).has_value();
    CHECK(r.accepted.has_value() == expect);
    if (r.accepted) {
      CHECK(*r.accepted);
      ++with_flag;
    }
  }
  CHECK(with_flag > 0);
}

TEST_CASE("tables round-trip through CSV") {
  Fixture f(40);
  for (std::size_t i = 0; i < 20; ++i) {
    const Session s = f.run(i, i % 3 != 0);
    f.store.snapshot_followees(s.user, SnapshotOffset::Week0, {node_id(0), node_id(1)});
    if (i % 2) f.store.snapshot_followees(s.user, SnapshotOffset::Week1, {node_id(0)});
  }
  f.store.register_control(AccountId("ctl,with\"comma"));
  f.shares = {{node_id(4), "t", "https://left.example/x", SharePhase::Before}};
  const auto t = export_analysis_tables(f.store, f.labels, f.shares, f.alignment);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "netmirror_tables_test";
  fs::remove_all(dir);
  write_tables(dir, t);
  const auto back = read_tables(dir);
  fs::remove_all(dir);

  REQUIRE(back.survey.size() == t.survey.size());
  for (std::size_t i = 0; i < t.survey.size(); ++i) {
    CHECK(back.survey[i].session_id == t.survey[i].session_id);
    CHECK(back.survey[i].arm == t.survey[i].arm);
    CHECK(back.survey[i].accepted == t.survey[i].accepted);
    CHECK(back.survey[i].post == t.survey[i].post);
  }
  REQUIRE(back.diversity.size() == t.diversity.size());
  for (std::size_t i = 0; i < t.diversity.size(); ++i) {
    CHECK(back.diversity[i].user == t.diversity[i].user);
    CHECK(back.diversity[i].survey_complete == t.diversity[i].survey_complete);
    CHECK(back.diversity[i].diversity == t.diversity[i].diversity);
  }
  REQUIRE(back.alignment.size() == t.alignment.size());
  for (std::size_t i = 0; i < t.alignment.size(); ++i) {
    CHECK(back.alignment[i].before_mean == t.alignment[i].before_mean);
    CHECK(back.alignment[i].before_urls == t.alignment[i].before_urls);
  }
  CHECK(back.covariates.names == t.covariates.names);
  CHECK(back.covariates.values == t.covariates.values);
  CHECK(back.covariates.arms == t.covariates.arms);
}

TEST_CASE("malformed table rows are reported with their line") {
  std::istringstream bad(
      "user_id,arm,survey_complete,accepted,d_week0,d_week1,d_week2,d_week3\n"
      "u1,Control,0,,0.5,,,\n"
      "u2,martian,0,,0.5,,,\n");
  try {
    read_diversity_table(bad, "diversity.csv");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream nan_cell(
      "user_id,arm,survey_complete,accepted,d_week0,d_week1,d_week2,d_week3\n"
      "u1,Control,0,,nan,,,\n");
  CHECK_THROWS_AS(read_diversity_table(nan_cell, "d"), InputError);
}

TEST_CASE("recommendation audit lists every issued item") {
  Fixture f(300);
  std::size_t issued = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    const Session s = f.run(i, false);
    if (s.arm != Arm::IdeoRec) continue;
    f.store.issue_recommendations(s.id, {{node_id(298), 0.25, 1, 0.25}, {node_id(299), 0.125, 2, 0.375}});
    issued += 2;
  }
  std::ostringstream os;
  write_recommendation_audit(os, f.store);
  std::istringstream in(os.str());
  const auto rows = csv::read_records(in, "audit", 5,
                                      {"session_id", "rank", "account_id", "marginal_gain", "timestamp"});
  CHECK(rows.size() == issued);
  for (const auto& r : rows) {
    CHECK((r.fields[1] == "1" || r.fields[1] == "2"));
    CHECK(std::stoll(r.fields[4]) >= 1600000000);
  }
}
