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
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "netmirror/account_id.hpp"
#include "netmirror/arm.hpp"
#include "netmirror/experiment.hpp"
#include "netmirror/ideology.hpp"

namespace netmirror {

// One row per first session with both surveys.
// Columns: session_id,user_id,arm,accepted,pre_q1..pre_q4,post_q1..post_q4
struct SurveyRow {
  std::string session_id;
  AccountId user;
  Arm arm = Arm::Viz;
  std::optional<bool> accepted;  // IdeoRec with a day-1 snapshot only
  std::array<int, kSurveyQuestions> pre{};
  std::array<int, kSurveyQuestions> post{};
};

// One row per analysis unit (first-session participant or control unit).
// Columns: user_id,arm,survey_complete,accepted,d_week0,d_week1,d_week2,d_week3
struct DiversityRow {
  AccountId user;
  Arm arm = Arm::Control;
  bool survey_complete = false;
  std::optional<bool> accepted;
  std::array<std::optional<double>, 4> diversity;  // index = week
};

// Columns: user_id,arm,survey_complete,accepted,before_mean,after_mean,before_urls,after_urls
struct AlignmentRow {
  AccountId user;
  Arm arm = Arm::Control;
  bool survey_complete = false;
  std::optional<bool> accepted;
  std::optional<double> before_mean;
  std::optional<double> after_mean;
  std::size_t before_urls = 0;
  std::size_t after_urls = 0;
};

// Columns: user_id,arm,<covariate names...>; empty cells are missing.
struct CovariateTable {
  std::vector<std::string> names;
  std::vector<AccountId> users;
  std::vector<Arm> arms;
  std::vector<std::vector<std::optional<double>>> values;  // rows x names
};

struct AnalysisTables {
  std::vector<SurveyRow> survey;
  std::vector<DiversityRow> diversity;
  std::vector<AlignmentRow> alignment;
  CovariateTable covariates;
};

struct ExportOptions {
  // Drop participants without both surveys from the diversity and alignment
  // tables. Rows always carry survey_complete, so models can filter later.
  bool require_complete_surveys = false;
};

// Flattens the store: first sessions only; control units only enter the
// diversity and alignment tables.
AnalysisTables export_analysis_tables(const ExperimentStore& store, const LabelMap& labels,
                                      std::span<const ShareRecord> shares,
                                      const AlignmentTable& alignment,
                                      const ExportOptions& options = {});

void write_survey_table(std::ostream& os, std::span<const SurveyRow> rows);
void write_diversity_table(std::ostream& os, std::span<const DiversityRow> rows);
void write_alignment_table(std::ostream& os, std::span<const AlignmentRow> rows);
void write_covariate_table(std::ostream& os, const CovariateTable& table);

std::vector<SurveyRow> read_survey_table(std::istream& in, const std::string& source);
std::vector<DiversityRow> read_diversity_table(std::istream& in, const std::string& source);
std::vector<AlignmentRow> read_alignment_rows(std::istream& in, const std::string& source);
CovariateTable read_covariate_table(std::istream& in, const std::string& source);

// Every issued recommendation, all sessions:
// session_id,rank,account_id,marginal_gain,timestamp (epoch seconds).
void write_recommendation_audit(std::ostream& os, const ExperimentStore& store);

// survey.csv, diversity.csv, alignment.csv, covariates.csv
void write_tables(const std::filesystem::path& dir, const AnalysisTables& tables);
AnalysisTables read_tables(const std::filesystem::path& dir);

}  // namespace netmirror
