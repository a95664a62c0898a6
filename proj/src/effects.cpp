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
#include "netmirror/effects.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "netmirror/csv.hpp"
#include "netmirror/errors.hpp"

namespace netmirror {

namespace {

bool drop_as_acceptor(Arm arm, const std::optional<bool>& accepted, bool filter) {
  return filter && arm == Arm::IdeoRec && accepted.value_or(false);
}

std::string stars(double p) {
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

std::string cell(double coef, double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f (%.2f)", coef, p);
  return buf + stars(p);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

stats::RegressionResult fit_arm_model(std::span<const EffectUnit> units, Arm baseline,
                                      std::span<const Arm> arms) {
  std::vector<Arm> effects;
  for (Arm a : arms) {
    if (a != baseline && std::find(effects.begin(), effects.end(), a) == effects.end()) {
      effects.push_back(a);
    }
  }
  std::vector<const EffectUnit*> used;
  std::size_t dropped = 0;
  std::vector<std::size_t> per_arm(effects.size() + 1, 0);
  for (const auto& u : units) {
    std::size_t slot;
    if (u.arm == baseline) {
      slot = 0;
    } else {
      const auto it = std::find(effects.begin(), effects.end(), u.arm);
      if (it == effects.end()) continue;
      slot = static_cast<std::size_t>(it - effects.begin()) + 1;
    }
    if (!u.outcome) {
      ++dropped;
      continue;
    }
    ++per_arm[slot];
    used.push_back(&u);
  }
  for (std::size_t s = 0; s < per_arm.size(); ++s) {
    if (per_arm[s] == 0) {
      const Arm a = s == 0 ? baseline : effects[s - 1];
      throw ModelError("arm " + std::string(display_name(a)) + " has no units with an outcome");
    }
  }

  stats::DesignMatrix d;
  d.columns.push_back("intercept");
  for (Arm a : effects) d.columns.emplace_back(display_name(a));
  const auto n = static_cast<Eigen::Index>(used.size());
  d.x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d.columns.size()));
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const EffectUnit& u = *used[static_cast<std::size_t>(i)];
    d.x(i, 0) = 1.0;
    const auto it = std::find(effects.begin(), effects.end(), u.arm);
    if (it != effects.end()) d.x(i, (it - effects.begin()) + 1) = 1.0;
    d.y(i) = *u.outcome;
  }
  d.dropped = dropped;
  return stats::ols_fit(d);
}

stats::RegressionResult pairwise_effects(std::span<const EffectUnit> units, Arm arm_a, Arm arm_b) {
  if (arm_a == arm_b) throw ModelError("pairwise comparison needs two different arms");
  const std::array<Arm, 2> arms{arm_a, arm_b};
  return fit_arm_model(units, arm_a, arms);
}

std::vector<EffectUnit> survey_units(std::span<const SurveyRow> rows, int question,
                                     bool filter_acceptors) {
  if (question < 1 || question > kSurveyQuestions) {
    throw std::invalid_argument("survey question must be 1..4");
  }
  std::vector<EffectUnit> units;
  for (const auto& r : rows) {
    if (r.arm == Arm::Control || drop_as_acceptor(r.arm, r.accepted, filter_acceptors)) continue;
    const auto q = static_cast<std::size_t>(question - 1);
    units.push_back({r.arm, static_cast<double>(r.post[q] - r.pre[q])});
  }
  return units;
}

std::array<stats::RegressionResult, 4> survey_effects(std::span<const SurveyRow> rows,
                                                      Arm baseline, bool filter_acceptors) {
  std::array<stats::RegressionResult, 4> out;
  for (int q = 1; q <= kSurveyQuestions; ++q) {
    const auto units = survey_units(rows, q, filter_acceptors);
    out[static_cast<std::size_t>(q - 1)] = fit_arm_model(units, baseline, kTreatmentArms);
  }
  return out;
}

Arm baseline_arm(ArmModel model) {
  return model == ArmModel::FourArm ? Arm::Control : Arm::Viz;
}

std::vector<Arm> model_arms(ArmModel model) {
  if (model == ArmModel::FourArm) return {Arm::Control, Arm::Viz, Arm::VizIdeo, Arm::IdeoRec};
  return {kTreatmentArms.begin(), kTreatmentArms.end()};
}

namespace {

template <typename Row>
bool include_row(const Row& r, ArmModel model, bool filter_acceptors) {
  if (model == ArmModel::ThreeArm && (r.arm == Arm::Control || !r.survey_complete)) return false;
  return !drop_as_acceptor(r.arm, r.accepted, filter_acceptors);
}

}  // namespace

std::vector<EffectUnit> diversity_units(std::span<const DiversityRow> rows, int week,
                                        ArmModel model, bool filter_acceptors) {
  if (week < 1 || week > 3) throw std::invalid_argument("week must be 1, 2 or 3");
  std::vector<EffectUnit> units;
  for (const auto& r : rows) {
    if (!include_row(r, model, filter_acceptors)) continue;
    const auto& d0 = r.diversity[0];
    const auto& dw = r.diversity[static_cast<std::size_t>(week)];
    units.push_back({r.arm, d0 && dw ? std::optional<double>(*dw - *d0) : std::nullopt});
  }
  return units;
}

stats::RegressionResult diversity_effects(std::span<const DiversityRow> rows, int week,
                                          ArmModel model, bool filter_acceptors) {
  const auto units = diversity_units(rows, week, model, filter_acceptors);
  const auto arms = model_arms(model);
  return fit_arm_model(units, baseline_arm(model), arms);
}

std::vector<EffectUnit> alignment_units(std::span<const AlignmentRow> rows, ArmModel model,
                                        bool filter_acceptors) {
  std::vector<EffectUnit> units;
  for (const auto& r : rows) {
    if (!include_row(r, model, filter_acceptors)) continue;
    std::optional<double> y;
    if (r.before_mean && r.after_mean) y = std::abs(*r.after_mean) - std::abs(*r.before_mean);
    units.push_back({r.arm, y});
  }
  return units;
}

stats::RegressionResult alignment_effects(std::span<const AlignmentRow> rows, ArmModel model,
                                          bool filter_acceptors) {
  const auto units = alignment_units(rows, model, filter_acceptors);
  const auto arms = model_arms(model);
  return fit_arm_model(units, baseline_arm(model), arms);
}

std::string format_effects_table(
    const std::string& title,
    const std::vector<std::pair<std::string, stats::RegressionResult>>& columns) {
  std::vector<std::string> terms;
  for (const auto& [name, r] : columns) {
    for (const auto& t : r.terms) {
      if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    }
  }
  constexpr int kLabelWidth = 12;
  constexpr int kCellWidth = 20;
  std::ostringstream os;
  os << title << '\n';
  os << std::left << std::setw(kLabelWidth) << "";
  for (const auto& [name, r] : columns) os << std::setw(kCellWidth) << name;
  os << '\n';
  for (const auto& t : terms) {
    os << std::setw(kLabelWidth) << (t == "intercept" ? std::string("b0") : "b_" + t);
    for (const auto& [name, r] : columns) {
      const auto it = std::find(r.terms.begin(), r.terms.end(), t);
      if (it == r.terms.end()) {
        os << std::setw(kCellWidth) << "";
        continue;
      }
      const auto i = static_cast<std::size_t>(it - r.terms.begin());
      os << std::setw(kCellWidth) << cell(r.coefficients[i], r.p_values[i]);
    }
    os << '\n';
  }
  os << std::setw(kLabelWidth) << "N";
  for (const auto& [name, r] : columns) os << std::setw(kCellWidth) << r.n_units;
  os << '\n' << std::setw(kLabelWidth) << "model p";
  for (const auto& [name, r] : columns) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", r.overall_p_value);
    os << std::setw(kCellWidth) << (buf + stars(r.overall_p_value));
  }
  os << "\n* p<0.1, ** p<0.05\n";
  return os.str();
}

std::string effects_csv(
    const std::vector<std::pair<std::string, stats::RegressionResult>>& columns) {
  std::ostringstream os;
  csv::write_row(os, {"model", "term", "coefficient", "std_error", "t", "p_value", "n_units",
                      "overall_p"});
  for (const auto& [name, r] : columns) {
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
      csv::write_row(os, {name, r.terms[i], num(r.coefficients[i]), num(r.std_errors[i]),
                          num(r.t_stats[i]), num(r.p_values[i]), std::to_string(r.n_units),
                          num(r.overall_p_value)});
    }
  }
  return os.str();
}

}  // namespace netmirror
