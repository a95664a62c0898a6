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
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "netmirror/errors.hpp"
#include "netmirror/stats.hpp"
#include "oracles.hpp"

using namespace netmirror;
using namespace netmirror::stats;

namespace {

DesignMatrix random_design(std::mt19937_64& rng, int n, int k) {
  std::normal_distribution<double> z(0.0, 1.0);
  DesignMatrix d;
  d.columns.push_back("intercept");
  for (int j = 1; j < k; ++j) d.columns.push_back("x" + std::to_string(j));
  d.x.resize(n, k);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) d.x(i, j) = z(rng) * j + 0.3 * j;
    d.y(i) = 0.5 + 0.2 * d.x(i, std::min(1, k - 1)) + z(rng);
  }
  return d;
}

}  // namespace

TEST_CASE("regularized incomplete beta agrees with Boost") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> ab(0.05, 60.0), x(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = ab(rng), b = ab(rng), xv = x(rng);
    CHECK(std::abs(regularized_incomplete_beta(a, b, xv) - boost::math::ibeta(a, b, xv)) <= 1e-12);
  }
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("student_t_cdf examples") {
  CHECK(student_t_cdf(0.0, 1.0) == 0.5);
  CHECK(student_t_cdf(0.0, 37.5) == 0.5);
  CHECK(std::abs(student_t_cdf(1.0, 1.0) - 0.75) <= 1e-9);
  CHECK(std::abs(student_t_cdf(1.0, 1.0) - (0.5 + std::atan(1.0) / std::numbers::pi)) <= 1e-12);
  CHECK(std::abs(student_t_cdf(1.96, 1e6) - 0.975) <= 1e-3);
}

TEST_CASE("student_t_cdf is symmetric and matches Boost") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> t(-12.0, 12.0), df(0.3, 400.0);
  for (int i = 0; i < 2000; ++i) {
    const double tv = t(rng), d = df(rng);
    const boost::math::students_t_distribution<double> dist(d);
    CHECK(std::abs(student_t_cdf(tv, d) - boost::math::cdf(dist, tv)) <= 1e-11);
    CHECK(std::abs(student_t_cdf(tv, d) + student_t_cdf(-tv, d) - 1.0) <= 1e-14);
    const double p = student_t_two_sided_p(tv, d);
    CHECK(std::abs(p - 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(tv)))) <=
          1e-11);
  }
}

TEST_CASE("F upper tail matches Boost") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> f(0.0, 20.0), d1(1.0, 10.0), d2(1.0, 500.0);
  for (int i = 0; i < 500; ++i) {
    const double fv = f(rng), a = std::floor(d1(rng)), b = std::floor(d2(rng));
    const boost::math::fisher_f_distribution<double> dist(a, b);
    CHECK(std::abs(f_upper_tail(fv, a, b) - boost::math::cdf(boost::math::complement(dist, fv))) <=
          1e-11);
  }
  CHECK(f_upper_tail(0.0, 2.0, 10.0) == 1.0);
}

TEST_CASE("ols: exact interpolation is flagged degenerate") {
  DesignMatrix d;
  d.columns = {"intercept", "x"};
  d.x.resize(2, 2);
  d.x << 1, 0, 1, 1;
  d.y.resize(2);
  d.y << 1, 3;
  const auto r = ols_fit(d);
  CHECK(std::abs(r.coefficients[0] - 1.0) <= 1e-12);
  CHECK(std::abs(r.coefficients[1] - 2.0) <= 1e-12);
  CHECK(r.residual_variance == 0.0);
  CHECK(r.degenerate);
}

TEST_CASE("ols: constant outcome gives zero slopes with p = 1") {
  std::mt19937_64 rng(73);
  auto d = random_design(rng, 30, 3);
  d.y.setConstant(2.5);
  const auto r = ols_fit(d);
  CHECK(r.degenerate);
  CHECK(std::abs(r.coefficients[0] - 2.5) <= 1e-10);
  for (int j = 1; j < 3; ++j) {
    CHECK(std::abs(r.coefficients[j]) <= 1e-10);
    CHECK(r.p_values[j] == 1.0);
  }
}

TEST_CASE("ols: coefficients match normal equations, p-values match Boost") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_design(rng, 40, 3);
    const auto r = ols_fit(d);
    const auto want = nmtest::oracle::normal_equations(d.x, d.y);
    REQUIRE(r.coefficients.size() == 3);
    CHECK(r.df == 37);
    CHECK(r.n_units == 40);
    const boost::math::students_t_distribution<double> dist(37);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(r.coefficients[j] - want[j]) <= 1e-8);
      const double p =
          2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_stats[j])));
      CHECK(std::abs(r.p_values[j] - p) <= 1e-6);
      CHECK(r.p_values[j] >= 0.0);
      CHECK(r.p_values[j] <= 1.0);
    }
    // Residuals orthogonal to every column.
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(r.coefficients.data(), 3);
    const Eigen::VectorXd resid = d.y - d.x * b;
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(d.x.col(j).dot(resid)) <= 1e-8 * (1.0 + d.x.col(j).norm() * d.y.norm()));
    }
    // Standard errors: sigma^2 (X'X)^-1.
    const double s2 = resid.squaredNorm() / 37.0;
    CHECK(std::abs(r.residual_variance - s2) <= 1e-12 * (1.0 + s2));
    const Eigen::MatrixXd cov = s2 * (d.x.transpose() * d.x).inverse();
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(r.std_errors[j] - std::sqrt(cov(j, j))) <= 1e-9);
    }
    // Overall F against intercept-only.
    const double tss = (d.y.array() - d.y.mean()).square().sum();
    const double fstat = ((tss - resid.squaredNorm()) / 2.0) / s2;
    const boost::math::fisher_f_distribution<double> fd(2, 37);
    CHECK(std::abs(r.f_statistic - fstat) <= 1e-8 * (1.0 + fstat));
    CHECK(std::abs(r.overall_p_value - boost::math::cdf(boost::math::complement(fd, fstat))) <=
          1e-9);
  }
}

TEST_CASE("ols: two-group contrast equals the difference of means") {
  std::mt19937_64 rng(83);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 25 + trial;
    DesignMatrix d;
    d.columns = {"intercept", "treated"};
    d.x.resize(n, 2);
    d.y.resize(n);
    double s0 = 0, s1 = 0;
    int n0 = 0, n1 = 0;
    for (int i = 0; i < n; ++i) {
      const bool t = i % 3 == 0;
      d.x(i, 0) = 1.0;
      d.x(i, 1) = t ? 1.0 : 0.0;
      d.y(i) = (t ? 0.53 : 0.11) + z(rng);
      (t ? s1 : s0) += d.y(i);
      (t ? n1 : n0) += 1;
    }
    const auto r = ols_fit(d);
    CHECK(std::abs(r.coefficient("intercept") - s0 / n0) <= 1e-10);
    CHECK(std::abs(r.coefficient("treated") - (s1 / n1 - s0 / n0)) <= 1e-10);
  }
}

TEST_CASE("ols: p-values are invariant to rescaling a column") {
  std::mt19937_64 rng(89);
  auto d = random_design(rng, 50, 3);
  const auto r = ols_fit(d);
  d.x.col(2) *= 1000.0;
  const auto s = ols_fit(d);
  CHECK(std::abs(s.coefficients[2] * 1000.0 - r.coefficients[2]) <= 1e-9);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(s.p_values[j] - r.p_values[j]) <= 1e-9);
}

TEST_CASE("ols errors name collinear columns and reject short designs") {
  std::mt19937_64 rng(97);
  auto d = random_design(rng, 20, 3);
  d.columns.push_back("copy");
  d.x.conservativeResize(Eigen::NoChange, 4);
  d.x.col(3) = 2.0 * d.x.col(1);
  try {
    ols_fit(d);
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    const std::string what = e.what();
    CHECK((what.find("copy") != std::string::npos || what.find("x1") != std::string::npos));
  }
  auto tiny = random_design(rng, 2, 3);
  CHECK_THROWS_AS(ols_fit(tiny), ModelError);
}

TEST_CASE("regression result accessors") {
  std::mt19937_64 rng(101);
  const auto r = ols_fit(random_design(rng, 30, 2));
  CHECK(r.term_index("x1") == 1);
  CHECK(r.coefficient("x1") == r.coefficients[1]);
  CHECK(r.std_error("x1") == r.std_errors[1]);
  CHECK(r.p_value("x1") == r.p_values[1]);
  CHECK_THROWS_AS(r.coefficient("nope"), std::out_of_range);
}

TEST_CASE("mnl: constant covariates reach the intercept-only optimum") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(30, 2, 4.0);
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i % 5 == 0 ? 2 : i % 2);
  const auto fit = mnl_fit(x, labels);
  double want = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double nc = static_cast<double>(std::count(labels.begin(), labels.end(), c));
    want += nc * std::log(nc / 30.0);
  }
  CHECK(std::abs(fit.log_likelihood - want) <= 1e-9);
  CHECK(std::abs(intercept_only_log_likelihood(labels) - want) <= 1e-12);
}

TEST_CASE("mnl: separable data stays finite and beats intercept-only") {
  Eigen::MatrixXd x(40, 1);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = i;
    labels.push_back(i < 20 ? 0 : 1);
  }
  const auto fit = mnl_fit(x, labels);
  CHECK(fit.coefficients.allFinite());
  CHECK(fit.log_likelihood >= intercept_only_log_likelihood(labels));
  CHECK(fit.log_likelihood <= 0.0);
}

TEST_CASE("mnl: log-likelihood matches a slow gradient-ascent oracle") {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::MatrixXd x(60, 3);
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
      for (int j = 0; j < 3; ++j) x(i, j) = z(rng) * (j + 1) + j;
      const double s = 0.8 * x(i, 0) + z(rng);
      labels.push_back(s < -0.5 ? 0 : (s < 0.7 ? 1 : 2));
    }
    const auto fit = mnl_fit(x, labels);
    const double want = nmtest::oracle::mnl_gradient_ascent(x, labels);
    CHECK(std::abs(fit.log_likelihood - want) <= 1e-4);
    CHECK(fit.log_likelihood >= intercept_only_log_likelihood(labels) - 1e-12);
    CHECK(fit.gradient_norm <= 1e-8);
  }
}

TEST_CASE("mnl: exchanging labels of identical units leaves the fit unchanged") {
  std::mt19937_64 rng(107);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(50, 2);
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    x(i, 0) = z(rng);
    x(i, 1) = z(rng);
    labels.push_back(i % 3);
  }
  x.row(7) = x.row(8);
  labels[7] = 0;
  labels[8] = 2;
  const double a = mnl_fit(x, labels).log_likelihood;
  std::swap(labels[7], labels[8]);
  CHECK(std::abs(mnl_fit(x, labels).log_likelihood - a) <= 1e-9);
}

TEST_CASE("mnl rejects a single category") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
  std::vector<int> labels(10, 1);
  CHECK_THROWS_AS(mnl_fit(x, labels), ModelError);
}

TEST_CASE("randomization check: identical covariates give p = 1") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(45, 3, 1.5);
  std::vector<int> labels;
  for (int i = 0; i < 45; ++i) labels.push_back(i % 3);
  const auto r = randomization_check(x, labels, 300, 5);
  CHECK(r.p_value == 1.0);
  CHECK(r.n_failed == 0);
  CHECK(r.n_at_least == 300);
}

TEST_CASE("randomization check: planted imbalance is detected") {
  std::mt19937_64 rng(109);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(90, 2);
  std::vector<int> labels;
  for (int i = 0; i < 90; ++i) {
    x(i, 0) = z(rng);
    x(i, 1) = z(rng);
    labels.push_back(x(i, 0) < -0.4 ? 0 : (x(i, 0) < 0.4 ? 1 : 2));
  }
  const auto r = randomization_check(x, labels, 400, 9);
  CHECK(r.p_value <= 0.01);
  CHECK(r.p_value > 0.0);
}

TEST_CASE("randomization check is seeded and thread-count independent") {
  std::mt19937_64 rng(113);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(60, 3);
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = z(rng);
    labels.push_back(i % 3);
  }
  const auto a = randomization_check(x, labels, 200, 42, 1);
  const auto b = randomization_check(x, labels, 200, 42, 3);
  const auto c = randomization_check(x, labels, 200, 43, 1);
  CHECK(a.p_value == b.p_value);
  CHECK(a.permuted_mean == b.permuted_mean);
  CHECK(a.permuted_q50 == b.permuted_q50);
  CHECK(a.observed_log_likelihood == c.observed_log_likelihood);
  CHECK(a.seed == 42);
  CHECK(a.p_value > 0.0);
  CHECK(a.p_value <= 1.0);
  CHECK(a.p_value == static_cast<double>(a.n_at_least + 1) /
                         static_cast<double>(a.n_permutations - a.n_failed + 1));
  CHECK(a.permuted_q05 <= a.permuted_q50);
  CHECK(a.permuted_q50 <= a.permuted_q95);
}
