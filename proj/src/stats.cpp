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
#include "netmirror/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "netmirror/errors.hpp"

namespace netmirror::stats {

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxTerms = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student t needs df > 0");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // x = df / (df + t^2), computed without cancellation for small t.
  if (t2 < df) {
    return 1.0 - regularized_incomplete_beta(0.5, df / 2.0, t2 / (df + t2));
  }
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

double f_upper_tail(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw std::invalid_argument("F needs positive df");
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

std::size_t RegressionResult::term_index(std::string_view term) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i] == term) return i;
  }
  throw std::out_of_range("no term '" + std::string(term) + "' in regression result");
}

double RegressionResult::coefficient(std::string_view term) const {
  return coefficients[term_index(term)];
}
double RegressionResult::std_error(std::string_view term) const {
  return std_errors[term_index(term)];
}
double RegressionResult::p_value(std::string_view term) const {
  return p_values[term_index(term)];
}

RegressionResult ols_fit(const DesignMatrix& design) {
  const auto n = design.x.rows();
  const auto k = design.x.cols();
  if (design.y.size() != n) throw ModelError("outcome length does not match design rows");
  if (static_cast<std::size_t>(k) != design.columns.size()) {
    throw ModelError("column names do not match design width");
  }
  if (k == 0) throw ModelError("design has no columns");
  if (n < k) {
    throw ModelError("too few units: " + std::to_string(n) + " rows for " +
                     std::to_string(k) + " columns");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (auto i = qr.rank(); i < k; ++i) {
      names += (names.empty() ? "" : ", ") + design.columns[static_cast<std::size_t>(perm(i))];
    }
    throw ModelError("design is rank deficient; collinear column(s): " + names);
  }

  const Eigen::VectorXd beta = qr.solve(design.y);
  const Eigen::VectorXd residuals = design.y - design.x * beta;
  const double rss = residuals.squaredNorm();

  // (X'X)^-1 = P R^-1 R^-T P'.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * cov_perm * perm.transpose();

  RegressionResult res;
  res.terms = design.columns;
  res.n_units = static_cast<std::size_t>(n);
  res.n_dropped = design.dropped;
  res.df = static_cast<int>(n - k);

  const double y_scale = std::max(1.0, design.y.norm());
  res.degenerate = res.df == 0 || rss <= std::pow(1e-12 * y_scale, 2);
  res.residual_variance = res.df > 0 && !res.degenerate ? rss / res.df : 0.0;

  // Intercept present if some column is all ones.
  bool has_intercept = false;
  for (Eigen::Index c = 0; c < k && !has_intercept; ++c) {
    has_intercept = (design.x.col(c).array() == 1.0).all();
  }
  const double tss = has_intercept ? (design.y.array() - design.y.mean()).square().sum()
                                   : design.y.squaredNorm();
  res.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;

  const double coef_tol = 1e-10 * std::max(1.0, design.y.cwiseAbs().maxCoeff());
  for (Eigen::Index c = 0; c < k; ++c) {
    const double b = beta(c);
    res.coefficients.push_back(b);
    if (res.degenerate) {
      res.std_errors.push_back(0.0);
      const bool zero = std::abs(b) <= coef_tol;
      res.t_stats.push_back(zero ? 0.0 : std::copysign(INFINITY, b));
      res.p_values.push_back(zero ? 1.0 : 0.0);
      continue;
    }
    const double se = std::sqrt(res.residual_variance * xtx_inv(c, c));
    const double t = b / se;
    res.std_errors.push_back(se);
    res.t_stats.push_back(t);
    res.p_values.push_back(std::clamp(student_t_two_sided_p(t, res.df), 0.0, 1.0));
  }

  const Eigen::Index model_terms = has_intercept ? k - 1 : k;
  if (model_terms == 0) {
    res.overall_p_value = 1.0;
    res.f_statistic = 0.0;
  } else if (res.degenerate) {
    const bool explains = tss - rss > std::pow(1e-12 * y_scale, 2);
    res.f_statistic = explains ? INFINITY : 0.0;
    res.overall_p_value = explains ? 0.0 : 1.0;
  } else {
    res.f_statistic = std::max(0.0, (tss - rss) / static_cast<double>(model_terms)) /
                      res.residual_variance;
    res.overall_p_value = std::clamp(
        f_upper_tail(res.f_statistic, static_cast<double>(model_terms), res.df), 0.0, 1.0);
  }
  return res;
}

// ---- multinomial logit ----

namespace {

struct CategoryIndex {
  std::vector<int> categories;
  std::vector<int> codes;  // per row, 0..K-1
};

CategoryIndex encode(std::span<const int> labels) {
  CategoryIndex idx;
  idx.categories.assign(labels.begin(), labels.end());
  std::sort(idx.categories.begin(), idx.categories.end());
  idx.categories.erase(std::unique(idx.categories.begin(), idx.categories.end()),
                       idx.categories.end());
  idx.codes.reserve(labels.size());
  for (int l : labels) {
    idx.codes.push_back(static_cast<int>(
        std::lower_bound(idx.categories.begin(), idx.categories.end(), l) -
        idx.categories.begin()));
  }
  return idx;
}

struct Evaluation {
  double log_likelihood = 0.0;  // unpenalised
  double objective = 0.0;       // penalised
  Eigen::MatrixXd probs;        // n x J (non-reference categories)
};

Evaluation evaluate(const Eigen::MatrixXd& x, const std::vector<int>& codes,
                    const Eigen::MatrixXd& beta, double ridge) {
  const Eigen::Index n = x.rows();
  const Eigen::Index j_count = beta.cols();
  const Eigen::MatrixXd eta = x * beta;
  Evaluation ev;
  ev.probs.resize(n, j_count);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double max_eta = std::max(0.0, eta.row(i).maxCoeff());
    double denom = std::exp(-max_eta);
    for (Eigen::Index j = 0; j < j_count; ++j) denom += std::exp(eta(i, j) - max_eta);
    for (Eigen::Index j = 0; j < j_count; ++j) {
      ev.probs(i, j) = std::exp(eta(i, j) - max_eta) / denom;
    }
    const int code = codes[static_cast<std::size_t>(i)];
    const double chosen = code == 0 ? 0.0 : eta(i, code - 1);
    ll += chosen - max_eta - std::log(denom);
  }
  ev.log_likelihood = ll;
  const double penalty = beta.bottomRows(beta.rows() - 1).squaredNorm();
  ev.objective = ll - 0.5 * ridge * penalty;
  return ev;
}

}  // namespace

double intercept_only_log_likelihood(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  const double n = static_cast<double>(labels.size());
  double ll = 0.0;
  for (const auto& [label, c] : counts) {
    ll += static_cast<double>(c) * std::log(static_cast<double>(c) / n);
  }
  return ll;
}

MultinomialLogit::MultinomialLogit(const Eigen::MatrixXd& covariates, MnlOptions options)
    : options_(options) {
  const Eigen::Index n = covariates.rows();
  const Eigen::Index p = covariates.cols();
  design_.resize(n, p + 1);
  design_.col(0).setOnes();
  for (Eigen::Index c = 0; c < p; ++c) {
    const Eigen::VectorXd col = covariates.col(c);
    const double mean = col.mean();
    const double var = n > 1 ? (col.array() - mean).square().sum() / static_cast<double>(n - 1)
                             : 0.0;
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      design_.col(c + 1).setZero();
    } else {
      design_.col(c + 1) = (col.array() - mean) / sd;
    }
  }
}

MnlFit MultinomialLogit::fit(std::span<const int> labels) const {
  const Eigen::Index n = design_.rows();
  const Eigen::Index p1 = design_.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw ModelError("label count does not match covariate rows");
  }
  const CategoryIndex idx = encode(labels);
  const auto k = static_cast<Eigen::Index>(idx.categories.size());
  if (k < 2) throw ModelError("multinomial logit needs at least two categories");
  const Eigen::Index j_count = k - 1;
  const Eigen::Index dim = p1 * j_count;

  // Start from the intercept-only optimum: log(n_j / n_0).
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (int c : idx.codes) counts[static_cast<std::size_t>(c)] += 1.0;
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(p1, j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    beta(0, j) = std::log(counts[static_cast<std::size_t>(j + 1)] / counts[0]);
  }

  Eigen::MatrixXd indicator = Eigen::MatrixXd::Zero(n, j_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = idx.codes[static_cast<std::size_t>(i)];
    if (c > 0) indicator(i, c - 1) = 1.0;
  }

  const double ridge = options_.ridge;
  Evaluation ev = evaluate(design_, idx.codes, beta, ridge);
  Eigen::VectorXd grad(dim);
  Eigen::MatrixXd neg_hess(dim, dim);

  for (int iter = 0; iter <= options_.max_iterations; ++iter) {
    const Eigen::MatrixXd resid = indicator - ev.probs;
    const Eigen::MatrixXd g = design_.transpose() * resid;  // p1 x J
    for (Eigen::Index j = 0; j < j_count; ++j) {
      Eigen::VectorXd gj = g.col(j);
      gj.tail(p1 - 1) -= ridge * beta.col(j).tail(p1 - 1);
      grad.segment(j * p1, p1) = gj;
    }
    const double gnorm = grad.cwiseAbs().maxCoeff();
    if (gnorm <= options_.gradient_tolerance) {
      MnlFit fit;
      fit.log_likelihood = ev.log_likelihood;
      fit.coefficients = beta;
      fit.categories = idx.categories;
      fit.iterations = iter;
      fit.gradient_norm = gnorm;
      return fit;
    }
    if (iter == options_.max_iterations) {
      throw ModelError("multinomial logit did not converge in " +
                       std::to_string(options_.max_iterations) +
                       " iterations (gradient max-norm " + std::to_string(gnorm) + ")");
    }

    for (Eigen::Index a = 0; a < j_count; ++a) {
      for (Eigen::Index b = a; b < j_count; ++b) {
        Eigen::ArrayXd w = -(ev.probs.col(a).array() * ev.probs.col(b).array());
        if (a == b) w += ev.probs.col(a).array();
        const Eigen::MatrixXd block =
            design_.transpose() * (design_.array().colwise() * w).matrix();
        neg_hess.block(a * p1, b * p1, p1, p1) = block;
        if (a != b) neg_hess.block(b * p1, a * p1, p1, p1) = block.transpose();
      }
      for (Eigen::Index c = 1; c < p1; ++c) neg_hess(a * p1 + c, a * p1 + c) += ridge;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = grad;

    // Backtracking until the penalised objective does not decrease. Near the
    // optimum the Newton gain drops below rounding noise, so a change within
    // a few ulps of the objective counts as no decrease.
    const double noise = 1e-13 * (1.0 + std::abs(ev.objective));
    double scale = 1.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half, scale *= 0.5) {
      Eigen::MatrixXd trial = beta;
      for (Eigen::Index j = 0; j < j_count; ++j) {
        trial.col(j) += scale * step.segment(j * p1, p1);
      }
      Evaluation next = evaluate(design_, idx.codes, trial, ridge);
      if (std::isfinite(next.objective) && next.objective >= ev.objective - noise) {
        beta = std::move(trial);
        ev = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw ModelError("multinomial logit line search stalled (gradient max-norm " +
                       std::to_string(gnorm) + ")");
    }
  }
  throw ModelError("multinomial logit did not converge");
}

MnlFit mnl_fit(const Eigen::MatrixXd& covariates, std::span<const int> labels,
               const MnlOptions& options) {
  return MultinomialLogit(covariates, options).fit(labels);
}

PermutationTestResult randomization_check(const Eigen::MatrixXd& covariates,
                                          std::span<const int> labels,
                                          std::size_t n_permutations, std::uint64_t seed,
                                          unsigned threads, const MnlOptions& options) {
  const MultinomialLogit model(covariates, options);
  PermutationTestResult res;
  res.seed = seed;
  res.n_permutations = n_permutations;
  res.observed_log_likelihood = model.fit(labels).log_likelihood;

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lls(n_permutations, kNaN);
  const std::vector<int> base(labels.begin(), labels.end());

  auto worker = [&](std::size_t begin, std::size_t end) {
    std::vector<int> shuffled(base.size());
    for (std::size_t i = begin; i < end; ++i) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
      std::mt19937_64 rng(seq);
      shuffled = base;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      try {
        lls[i] = model.fit(shuffled).log_likelihood;
      } catch (const ModelError&) {
        lls[i] = kNaN;
      }
    }
  };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_permutations)));
  if (workers <= 1) {
    worker(0, n_permutations);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_permutations + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n_permutations, w * chunk);
      const std::size_t end = std::min(n_permutations, begin + chunk);
      pool.emplace_back(worker, begin, end);
    }
  }

  // Refits of an equivalent model differ only by rounding; treat those as ties.
  const double tie = 1e-9 * std::max(1.0, std::abs(res.observed_log_likelihood));
  std::vector<double> ok;
  ok.reserve(lls.size());
  for (double ll : lls) {
    if (std::isnan(ll)) {
      ++res.n_failed;
      continue;
    }
    ok.push_back(ll);
    if (ll >= res.observed_log_likelihood - tie) ++res.n_at_least;
  }
  res.p_value = static_cast<double>(res.n_at_least + 1) / static_cast<double>(ok.size() + 1);
  if (!ok.empty()) {
    res.permuted_mean = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
    std::sort(ok.begin(), ok.end());
    const auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(ok.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(ok.size() - 1, lo + 1);
      return ok[lo] + (pos - static_cast<double>(lo)) * (ok[hi] - ok[lo]);
    };
    res.permuted_q05 = quantile(0.05);
    res.permuted_q50 = quantile(0.50);
    res.permuted_q95 = quantile(0.95);
  }
  return res;
}

}  // namespace netmirror::stats
