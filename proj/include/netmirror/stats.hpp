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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace netmirror::stats {

// I_x(a, b) by continued fraction. a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

// Student-t CDF for df > 0; exact up to the incomplete-beta evaluation.
double student_t_cdf(double t, double df);
// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);
// Upper tail of the F distribution, P(F >= f).
double f_upper_tail(double f, double df1, double df2);

struct DesignMatrix {
  std::vector<std::string> columns;
  Eigen::MatrixXd x;  // rows = units
  Eigen::VectorXd y;
  std::size_t dropped = 0;  // units excluded for a missing outcome
};

struct RegressionResult {
  std::vector<std::string> terms;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  double overall_p_value = 1.0;  // F-test against the intercept-only model
  double f_statistic = 0.0;
  double r_squared = 0.0;
  double residual_variance = 0.0;
  std::size_t n_units = 0;
  std::size_t n_dropped = 0;
  int df = 0;
  // Residuals vanish (exact fit), so inference collapses: p = 1 for a zero
  // coefficient and p = 0 otherwise.
  bool degenerate = false;

  // Throw std::out_of_range for unknown terms.
  double coefficient(std::string_view term) const;
  double std_error(std::string_view term) const;
  double p_value(std::string_view term) const;
  std::size_t term_index(std::string_view term) const;
};

// Ordinary least squares with classical standard errors. Requires at least as
// many rows as columns and full column rank; throws ModelError otherwise,
// naming the collinear columns.
RegressionResult ols_fit(const DesignMatrix& design);

// ---- multinomial logit ----

struct MnlOptions {
  double gradient_tolerance = 1e-8;
  double ridge = 1e-6;  // on slopes only
  int max_iterations = 200;
};

struct MnlFit {
  double log_likelihood = 0.0;  // unpenalised, at the penalised optimum
  Eigen::MatrixXd coefficients;  // (1 + covariates) x (categories - 1), on standardised covariates
  std::vector<int> categories;   // ascending; first is the reference
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Covariates are standardised once at construction (constant columns become
// zero); fit() can then be called repeatedly with different label vectors.
class MultinomialLogit {
 public:
  explicit MultinomialLogit(const Eigen::MatrixXd& covariates, MnlOptions options = {});

  // Throws ModelError on fewer than two categories or non-convergence.
  MnlFit fit(std::span<const int> labels) const;

  std::size_t rows() const { return static_cast<std::size_t>(design_.rows()); }

 private:
  Eigen::MatrixXd design_;  // intercept column + standardised covariates
  MnlOptions options_;
};

MnlFit mnl_fit(const Eigen::MatrixXd& covariates, std::span<const int> labels,
               const MnlOptions& options = {});

// Log-likelihood of the intercept-only model: sum over categories of
// n_c * log(n_c / n).
double intercept_only_log_likelihood(std::span<const int> labels);

struct PermutationTestResult {
  double observed_log_likelihood = 0.0;
  std::size_t n_permutations = 0;  // requested
  std::size_t n_failed = 0;        // fits that did not converge, excluded
  std::size_t n_at_least = 0;      // permuted LL >= observed
  double permuted_mean = 0.0;
  double permuted_q05 = 0.0;
  double permuted_q50 = 0.0;
  double permuted_q95 = 0.0;
  double p_value = 1.0;  // (n_at_least + 1) / (successful + 1)
  std::uint64_t seed = 0;
};

// Shuffles labels over fixed covariates. Permutation i draws from a generator
// seeded by (seed, i), so results do not depend on the thread count.
PermutationTestResult randomization_check(const Eigen::MatrixXd& covariates,
                                          std::span<const int> labels,
                                          std::size_t n_permutations = 100000,
                                          std::uint64_t seed = 0,
                                          unsigned threads = 0,
                                          const MnlOptions& options = {});

}  // namespace netmirror::stats
