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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netmirror/arm.hpp"
#include "netmirror/stats.hpp"
#include "netmirror/tables.hpp"

namespace netmirror {

// One regression unit: its arm and outcome (nullopt = missing, dropped).
struct EffectUnit {
  Arm arm = Arm::Viz;
  std::optional<double> outcome;
};

enum class ArmModel {
  FourArm,   // control baseline, every unit
  ThreeArm,  // treated survey completers, Viz baseline
};

// y = b0 + sum over non-baseline arms of b_arm * x_arm. Units in other arms
// are ignored. Terms are "intercept" plus the arms' display names. Throws
// ModelError when any listed arm has no unit with an outcome.
stats::RegressionResult fit_arm_model(std::span<const EffectUnit> units, Arm baseline,
                                      std::span<const Arm> arms);

// Two-group model restricted to armA and armB, armA as baseline.
stats::RegressionResult pairwise_effects(std::span<const EffectUnit> units, Arm arm_a, Arm arm_b);

// Per-question Likert deltas (post - pre). filter_acceptors drops IdeoRec
// units that followed a recommended account.
std::vector<EffectUnit> survey_units(std::span<const SurveyRow> rows, int question,
                                     bool filter_acceptors);
std::array<stats::RegressionResult, 4> survey_effects(std::span<const SurveyRow> rows,
                                                      Arm baseline = Arm::Viz,
                                                      bool filter_acceptors = false);

// Outcome d_week - d_week0; units missing either snapshot are dropped.
std::vector<EffectUnit> diversity_units(std::span<const DiversityRow> rows, int week,
                                        ArmModel model, bool filter_acceptors);
stats::RegressionResult diversity_effects(std::span<const DiversityRow> rows, int week,
                                          ArmModel model, bool filter_acceptors = false);

// Outcome |after mean| - |before mean|.
std::vector<EffectUnit> alignment_units(std::span<const AlignmentRow> rows, ArmModel model,
                                        bool filter_acceptors);
stats::RegressionResult alignment_effects(std::span<const AlignmentRow> rows, ArmModel model,
                                          bool filter_acceptors = false);

Arm baseline_arm(ArmModel model);
std::vector<Arm> model_arms(ArmModel model);

// Text table: one row per term, one column per model, cells "coef (p)" with
// * for p < 0.1 and ** for p < 0.05.
std::string format_effects_table(
    const std::string& title,
    const std::vector<std::pair<std::string, stats::RegressionResult>>& columns);

// CSV: model,term,coefficient,std_error,t,p_value,n_units,overall_p
std::string effects_csv(
    const std::vector<std::pair<std::string, stats::RegressionResult>>& columns);

}  // namespace netmirror
