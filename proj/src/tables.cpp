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
#include "netmirror/tables.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "netmirror/csv.hpp"
#include "netmirror/errors.hpp"

namespace netmirror {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string fmt(const std::optional<bool>& v) {
  if (!v) return {};
  return *v ? "1" : "0";
}

std::vector<std::string> header_cells(std::initializer_list<const char*> names) {
  return {names.begin(), names.end()};
}

std::optional<double> parse_opt_double(const csv::Record& rec, std::size_t i,
                                       const std::string& source) {
  const auto& s = rec.fields[i];
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw InputError(source, rec.line, "bad number '" + s + "'");
}

int parse_int(const csv::Record& rec, std::size_t i, const std::string& source) {
  const auto v = parse_opt_double(rec, i, source);
  if (!v || std::floor(*v) != *v) {
    throw InputError(source, rec.line, "expected an integer in column " + std::to_string(i + 1));
  }
  return static_cast<int>(*v);
}

std::optional<bool> parse_opt_bool(const csv::Record& rec, std::size_t i,
                                   const std::string& source) {
  const auto& s = rec.fields[i];
  if (s.empty()) return std::nullopt;
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw InputError(source, rec.line, "expected 0/1 in column " + std::to_string(i + 1));
}

Arm parse_arm_field(const csv::Record& rec, std::size_t i, const std::string& source) {
  const auto arm = parse_arm(rec.fields[i]);
  if (!arm) throw InputError(source, rec.line, "unknown arm '" + rec.fields[i] + "'");
  return *arm;
}

const std::vector<std::string> kSurveyHeader = header_cells(
    {"session_id", "user_id", "arm", "accepted", "pre_q1", "pre_q2", "pre_q3", "pre_q4",
     "post_q1", "post_q2", "post_q3", "post_q4"});
const std::vector<std::string> kDiversityHeader = header_cells(
    {"user_id", "arm", "survey_complete", "accepted", "d_week0", "d_week1", "d_week2", "d_week3"});
const std::vector<std::string> kAlignmentHeader = header_cells(
    {"user_id", "arm", "survey_complete", "accepted", "before_mean", "after_mean",
     "before_urls", "after_urls"});

constexpr std::array<SnapshotOffset, 4> kWeeks = {SnapshotOffset::Week0, SnapshotOffset::Week1,
                                                  SnapshotOffset::Week2, SnapshotOffset::Week3};

}  // namespace

AnalysisTables export_analysis_tables(const ExperimentStore& store, const LabelMap& labels,
                                      std::span<const ShareRecord> shares,
                                      const AlignmentTable& alignment,
                                      const ExportOptions& options) {
  std::map<AccountId, std::array<std::vector<std::string>, 2>> urls;
  for (const auto& s : shares) {
    urls[s.user][s.phase == SharePhase::Before ? 0 : 1].push_back(s.url);
  }

  struct Unit {
    AccountId user;
    Arm arm;
    bool complete;
    std::optional<bool> accepted;
    const Session* session;
  };
  std::vector<Session> sessions = store.sessions();
  std::vector<Unit> units;
  AnalysisTables t;

  for (const auto& s : sessions) {
    if (!s.first_session) continue;
    std::optional<bool> accepted;
    if (s.arm == Arm::IdeoRec) {
      if (auto day1 = store.snapshot(s.user, SnapshotOffset::Day1)) {
        accepted = detect_acceptance(s, *day1);
      }
    }
    const bool complete = s.pre_survey && s.post_survey;
    if (complete) {
      t.survey.push_back({s.id, s.user, s.arm, accepted, s.pre_survey->answers,
                          s.post_survey->answers});
    }
    units.push_back({s.user, s.arm, complete, accepted, &s});
  }
  const std::size_t participants = units.size();
  for (const auto& c : store.control_units()) {
    units.push_back({c, Arm::Control, false, std::nullopt, nullptr});
  }

  for (const auto& u : units) {
    if (u.arm != Arm::Control && options.require_complete_surveys && !u.complete) continue;
    DiversityRow d{u.user, u.arm, u.complete, u.accepted, {}};
    for (std::size_t w = 0; w < kWeeks.size(); ++w) {
      if (auto snap = store.snapshot(u.user, kWeeks[w])) {
        d.diversity[w] = connection_diversity(snap->followees, labels).score;
      }
    }
    t.diversity.push_back(d);

    AlignmentRow a{u.user, u.arm, u.complete, u.accepted, {}, {}, 0, 0};
    if (const auto it = urls.find(u.user); it != urls.end()) {
      const auto before = url_alignment_avg(it->second[0], alignment);
      const auto after = url_alignment_avg(it->second[1], alignment);
      a.before_mean = before.mean;
      a.after_mean = after.mean;
      a.before_urls = before.urls_counted;
      a.after_urls = after.urls_counted;
    }
    t.alignment.push_back(a);
  }

  t.covariates.names = {"pre_q1", "pre_q2", "pre_q3", "pre_q4",
                        "pre_diversity", "abs_pre_alignment", "followee_count"};
  for (std::size_t i = 0; i < participants; ++i) {
    const Unit& u = units[i];
    std::vector<std::optional<double>> row(t.covariates.names.size());
    if (u.session->pre_survey) {
      for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
        row[q] = u.session->pre_survey->answers[q];
      }
    }
    if (auto week0 = store.snapshot(u.user, SnapshotOffset::Week0)) {
      row[4] = connection_diversity(week0->followees, labels).score;
      row[6] = static_cast<double>(week0->followees.size());
    }
    if (const auto it = urls.find(u.user); it != urls.end()) {
      if (auto m = url_alignment_avg(it->second[0], alignment).mean) row[5] = std::abs(*m);
    }
    t.covariates.users.push_back(u.user);
    t.covariates.arms.push_back(u.arm);
    t.covariates.values.push_back(std::move(row));
  }
  return t;
}

void write_survey_table(std::ostream& os, std::span<const SurveyRow> rows) {
  csv::write_row(os, kSurveyHeader);
  for (const auto& r : rows) {
    std::vector<std::string> f{r.session_id, r.user.str(), std::string(to_string(r.arm)),
                               fmt(r.accepted)};
    for (int v : r.pre) f.push_back(std::to_string(v));
    for (int v : r.post) f.push_back(std::to_string(v));
    csv::write_row(os, f);
  }
}

void write_diversity_table(std::ostream& os, std::span<const DiversityRow> rows) {
  csv::write_row(os, kDiversityHeader);
  for (const auto& r : rows) {
    std::vector<std::string> f{r.user.str(), std::string(to_string(r.arm)),
                               r.survey_complete ? "1" : "0", fmt(r.accepted)};
    for (const auto& d : r.diversity) f.push_back(fmt(d));
    csv::write_row(os, f);
  }
}

void write_alignment_table(std::ostream& os, std::span<const AlignmentRow> rows) {
  csv::write_row(os, kAlignmentHeader);
  for (const auto& r : rows) {
    csv::write_row(os, {r.user.str(), std::string(to_string(r.arm)),
                        r.survey_complete ? "1" : "0", fmt(r.accepted), fmt(r.before_mean),
                        fmt(r.after_mean), std::to_string(r.before_urls),
                        std::to_string(r.after_urls)});
  }
}

void write_recommendation_audit(std::ostream& os, const ExperimentStore& store) {
  csv::write_row(os, {"session_id", "rank", "account_id", "marginal_gain", "timestamp"});
  for (const auto& s : store.sessions()) {
    for (const auto& r : s.recommendations_shown) {
      csv::write_row(os, {s.id, std::to_string(r.rank), r.account.str(), fmt(r.marginal_gain),
                          std::to_string(s.recommendations_issued_at)});
    }
  }
}

void write_covariate_table(std::ostream& os, const CovariateTable& table) {
  std::vector<std::string> header{"user_id", "arm"};
  header.insert(header.end(), table.names.begin(), table.names.end());
  csv::write_row(os, header);
  for (std::size_t i = 0; i < table.users.size(); ++i) {
    std::vector<std::string> f{table.users[i].str(), std::string(to_string(table.arms[i]))};
    for (const auto& v : table.values[i]) f.push_back(fmt(v));
    csv::write_row(os, f);
  }
}

std::vector<SurveyRow> read_survey_table(std::istream& in, const std::string& source) {
  std::vector<SurveyRow> rows;
  for (const auto& rec : csv::read_records(in, source, kSurveyHeader.size(), kSurveyHeader)) {
    SurveyRow r;
    r.session_id = rec.fields[0];
    r.user = AccountId(rec.fields[1]);
    r.arm = parse_arm_field(rec, 2, source);
    r.accepted = parse_opt_bool(rec, 3, source);
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
      r.pre[q] = parse_int(rec, 4 + q, source);
      r.post[q] = parse_int(rec, 8 + q, source);
      if (r.pre[q] < 1 || r.pre[q] > 5 || r.post[q] < 1 || r.post[q] > 5) {
        throw InputError(source, rec.line, "survey answers must be in 1..5");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<DiversityRow> read_diversity_table(std::istream& in, const std::string& source) {
  std::vector<DiversityRow> rows;
  for (const auto& rec :
       csv::read_records(in, source, kDiversityHeader.size(), kDiversityHeader)) {
    DiversityRow r;
    r.user = AccountId(rec.fields[0]);
    r.arm = parse_arm_field(rec, 1, source);
    r.survey_complete = parse_opt_bool(rec, 2, source).value_or(false);
    r.accepted = parse_opt_bool(rec, 3, source);
    for (std::size_t w = 0; w < 4; ++w) r.diversity[w] = parse_opt_double(rec, 4 + w, source);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AlignmentRow> read_alignment_rows(std::istream& in, const std::string& source) {
  std::vector<AlignmentRow> rows;
  for (const auto& rec :
       csv::read_records(in, source, kAlignmentHeader.size(), kAlignmentHeader)) {
    AlignmentRow r;
    r.user = AccountId(rec.fields[0]);
    r.arm = parse_arm_field(rec, 1, source);
    r.survey_complete = parse_opt_bool(rec, 2, source).value_or(false);
    r.accepted = parse_opt_bool(rec, 3, source);
    r.before_mean = parse_opt_double(rec, 4, source);
    r.after_mean = parse_opt_double(rec, 5, source);
    r.before_urls = static_cast<std::size_t>(parse_int(rec, 6, source));
    r.after_urls = static_cast<std::size_t>(parse_int(rec, 7, source));
    rows.push_back(std::move(r));
  }
  return rows;
}

CovariateTable read_covariate_table(std::istream& in, const std::string& source) {
  CovariateTable t;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> width;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = csv::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    auto fields = csv::split_line(line);
    if (!fields) throw InputError(source, lineno, "unterminated quoted field");
    for (auto& f : *fields) f = csv::trim(f);
    if (!width) {
      if (fields->size() < 2 || (*fields)[0] != "user_id" || (*fields)[1] != "arm") {
        throw InputError(source, lineno, "expected header 'user_id,arm,...'");
      }
      width = fields->size();
      t.names.assign(fields->begin() + 2, fields->end());
      continue;
    }
    if (fields->size() != *width) {
      throw InputError(source, lineno, "expected " + std::to_string(*width) + " fields");
    }
    csv::Record rec{lineno, std::move(*fields)};
    t.users.emplace_back(rec.fields[0]);
    t.arms.push_back(parse_arm_field(rec, 1, source));
    std::vector<std::optional<double>> row;
    for (std::size_t i = 2; i < rec.fields.size(); ++i) {
      row.push_back(parse_opt_double(rec, i, source));
    }
    t.values.push_back(std::move(row));
  }
  return t;
}

void write_tables(const std::filesystem::path& dir, const AnalysisTables& tables) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  auto survey = open("survey.csv");
  write_survey_table(survey, tables.survey);
  auto diversity = open("diversity.csv");
  write_diversity_table(diversity, tables.diversity);
  auto alignment = open("alignment.csv");
  write_alignment_table(alignment, tables.alignment);
  auto covariates = open("covariates.csv");
  write_covariate_table(covariates, tables.covariates);
}

AnalysisTables read_tables(const std::filesystem::path& dir) {
  AnalysisTables t;
  auto read = [&](const char* name, auto&& parse) {
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path);
    parse(in, path.string());
  };
  read("survey.csv", [&](std::istream& in, const std::string& s) { t.survey = read_survey_table(in, s); });
  read("diversity.csv", [&](std::istream& in, const std::string& s) { t.diversity = read_diversity_table(in, s); });
  read("alignment.csv", [&](std::istream& in, const std::string& s) { t.alignment = read_alignment_rows(in, s); });
  read("covariates.csv", [&](std::istream& in, const std::string& s) { t.covariates = read_covariate_table(in, s); });
  return t;
}

}  // namespace netmirror
