#pragma once

// Penalty selection: BIC, K-fold cross-validated likelihood, per-row normal
// quantile penalties and default penalty grids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cscs/covmodel.hpp"
#include "cscs/error.hpp"
#include "cscs/estimators.hpp"
#include "cscs/rng.hpp"

namespace cscs {

// ---------------------------------------------------------------------------
// Standard normal quantile
// ---------------------------------------------------------------------------

/// Inverse of the standard normal CDF (Wichura's AS241, PPND16). Relative
/// accuracy about 1e-16 over (0, 1).
inline double normal_quantile(double prob) {
  detail::require(prob > 0.0 && prob < 1.0, ErrorCode::DomainError, "quantile level must lie in (0, 1)");
  const double q = prob - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
             4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                 1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
             5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                 7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

/// Upper-tail quantile: the z with P(Z > z) = tail.
inline double upper_normal_quantile(double tail) { return -normal_quantile(tail); }

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

struct BicOptions {
  /// Count the (always nonzero) diagonal of L in E. Off gives the
  /// strict-lower-only variant.
  bool count_diagonal = true;
};

/// n tr(S Omega) - n log|Omega| + log(n) E with Omega = L^t L and E the
/// number of nonzero entries of L.
inline double bic_score(const CovarianceMatrix& s, const CholeskyFactor& factor, Index n, const BicOptions& opts = {}) {
  detail::require(n >= 1, ErrorCode::InvalidConfig, "sample size must be positive");
  detail::require(factor.dim() == s.dim(), ErrorCode::DimensionMismatch, "factor and covariance dimensions differ");
  double trace = 0.0;
  double logdet = 0.0;
  for (Index i = 0; i < factor.dim(); ++i) {
    trace += leading_quadratic_form(s, factor.row_vector(i));
    logdet += 2.0 * std::log(factor.diagonal(i));
  }
  const Index nonzeros = factor.strict_lower_nonzeros() + (opts.count_diagonal ? factor.dim() : 0);
  const double nn = static_cast<double>(n);
  return nn * trace - nn * logdet + std::log(nn) * static_cast<double>(nonzeros);
}

inline double bic_score(const CovarianceMatrix& s, const FitResult& fit, Index n, const BicOptions& opts = {}) {
  return bic_score(s, fit.factor, n, opts);
}

/// Seeded partition of 0..n-1 into K near-equal folds: the identity
/// permutation is shuffled with Rng::shuffle and fold v takes positions
/// [v n / K, (v + 1) n / K).
inline std::vector<std::vector<Index>> make_folds(Index n, int folds, std::uint64_t seed) {
  detail::require(folds >= 2, ErrorCode::InvalidConfig, "cross-validation needs at least two folds");
  detail::require(n >= folds, ErrorCode::InvalidConfig, "more folds than samples");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(perm));
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  for (int v = 0; v < folds; ++v) {
    const Index lo = n * v / folds;
    const Index hi = n * (v + 1) / folds;
    out[static_cast<std::size_t>(v)].assign(perm.begin() + lo, perm.begin() + hi);
    std::sort(out[static_cast<std::size_t>(v)].begin(), out[static_cast<std::size_t>(v)].end());
  }
  return out;
}

struct CvOptions {
  /// Center each training split and shift its validation rows by the
  /// training mean.
  bool center = false;
  EstimateOptions estimate;
};

struct CvScore {
  double value = 0.0;
  /// d_v log|Sigma_hat_{-v}| + sum_{i in fold v} y_i^t Omega_hat_{-v} y_i per fold.
  std::vector<double> folds;
};

/// (1/K) sum_v ( d_v log|Sigma_{-v}| + sum_{i in I_v} y_i^t Sigma_{-v}^{-1} y_i ).
inline CvScore cv_score(const DataMatrix& data, Method method, const PenaltySpec& pen, int folds, std::uint64_t seed,
                        const SolverConfig& cfg = {}, const CvOptions& opts = {}) {
  const Index n = data.samples();
  const auto parts = make_folds(n, folds, seed);
  CvScore out;
  out.folds.reserve(parts.size());
  std::vector<char> held(static_cast<std::size_t>(n));
  for (const auto& part : parts) {
    std::fill(held.begin(), held.end(), 0);
    for (Index i : part) held[static_cast<std::size_t>(i)] = 1;
    std::vector<Index> train;
    for (Index i = 0; i < n; ++i)
      if (!held[static_cast<std::size_t>(i)]) train.push_back(i);
    const DataMatrix train_data = data.select_rows(train);

    std::optional<CovarianceMatrix> s;
    try {
      s.emplace(sample_covariance(train_data, {opts.center, false, false}));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidCovariance) throw Error(ErrorCode::FoldDegenerate, e.what());
      throw;
    }
    const Estimate est = estimate(method, *s, pen, cfg, opts.estimate);
    const MatrixXd l = est.factor.to_dense();
    VectorXd mean = VectorXd::Zero(data.variables());
    if (opts.center) mean = train_data.values().colwise().mean().transpose();

    double logdet_sigma = 0.0;
    for (Index i = 0; i < est.factor.dim(); ++i) logdet_sigma -= 2.0 * std::log(est.factor.diagonal(i));
    double quad = 0.0;
    for (Index i : part) {
      const VectorXd y = data.values().row(i).transpose() - mean;
      quad += (l.triangularView<Eigen::Lower>() * y).squaredNorm();
    }
    out.folds.push_back(static_cast<double>(part.size()) * logdet_sigma + quad);
  }
  out.value = std::accumulate(out.folds.begin(), out.folds.end(), 0.0) / static_cast<double>(folds);
  return out;
}

/// Per-row penalties lambda_i = 2 n^{-1/2} z_{alpha / (2 p (i - 1))} for
/// rows i = 2..p (1-based), z_q the upper-q standard normal quantile.
/// Row 1 has nothing to penalize and gets 0.
inline PenaltySpec quantile_penalty(Index n, Index p, double alpha) {
  detail::require(n >= 1, ErrorCode::DomainError, "sample size must be positive");
  detail::require(p >= 2, ErrorCode::DomainError, "quantile penalty needs p >= 2");
  detail::require(alpha > 0.0 && alpha < 1.0, ErrorCode::DomainError, "alpha must lie in (0, 1)");
  std::vector<double> lambdas(static_cast<std::size_t>(p), 0.0);
  const double scale = 2.0 / std::sqrt(static_cast<double>(n));
  for (Index i = 1; i < p; ++i) {
    const double tail = alpha / (2.0 * static_cast<double>(p) * static_cast<double>(i));
    detail::require(tail < 1.0, ErrorCode::DomainError, "tail probability must be below 1");
    lambdas[static_cast<std::size_t>(i)] = scale * upper_normal_quantile(tail);
  }
  return PenaltySpec::per_row(std::move(lambdas));
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

inline bool fully_sparse(const CholeskyFactor& factor) { return factor.strict_lower_nonzeros() == 0; }

/// Smallest power-of-two multiple (or fraction) of max |S_ij| at which
/// `method` returns an all-zero strict lower triangle.
inline double sparsifying_penalty(const CovarianceMatrix& s, Method method, const SolverConfig& cfg = {},
                                  const EstimateOptions& opts = {}) {
  const Index p = s.dim();
  double start = 0.0;
  for (Index j = 0; j < p; ++j)
    for (Index i = j + 1; i < p; ++i) start = std::max(start, std::abs(s(i, j)));
  if (start == 0.0) return 1.0;
  auto sparse_at = [&](double lambda) {
    return fully_sparse(estimate(method, s, PenaltySpec::uniform(lambda), cfg, opts).factor);
  };
  double lambda = start;
  if (sparse_at(lambda)) {
    for (int step = 0; step < 200 && sparse_at(lambda / 2.0); ++step) lambda /= 2.0;
    return lambda;
  }
  for (int step = 0; step < 200; ++step) {
    lambda *= 2.0;
    if (sparse_at(lambda)) return lambda;
  }
  throw Error(ErrorCode::InvalidProblem, "no fully sparsifying penalty found");
}

/// `count` log-spaced values from 0.01 * lambda_top to lambda_top, ascending,
/// where lambda_top comes from sparsifying_penalty.
inline std::vector<double> default_grid(const CovarianceMatrix& s, int count, Method method = Method::Cscs,
                                        const SolverConfig& cfg = {}, const EstimateOptions& opts = {}) {
  detail::require(count >= 2, ErrorCode::InvalidConfig, "grid needs at least two points");
  const double top = sparsifying_penalty(s, method, cfg, opts);
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double lo = std::log10(0.01 * top);
  const double hi = std::log10(top);
  for (int t = 0; t < count; ++t)
    grid[static_cast<std::size_t>(t)] = std::pow(10.0, lo + (hi - lo) * t / static_cast<double>(count - 1));
  grid.front() = 0.01 * top;
  grid.back() = top;
  return grid;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct TuningReport {
  std::string criterion;
  std::vector<double> grid;
  std::vector<double> scores;
  std::size_t selected_index = 0;
  PenaltySpec selected = PenaltySpec::uniform(0.0);
  /// Per grid point, per fold (CV only).
  std::vector<std::vector<double>> fold_scores;
};

namespace detail {

inline std::size_t argmin(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace detail

inline TuningReport tune_bic(const CovarianceMatrix& s, Index n, const std::vector<double>& grid, Method method,
                             const SolverConfig& cfg = {}, const EstimateOptions& opts = {},
                             const BicOptions& bic = {}) {
  detail::require(!grid.empty(), ErrorCode::InvalidConfig, "grid must not be empty");
  TuningReport report;
  report.criterion = "bic";
  report.grid = grid;
  for (const Estimate& est : estimate_path(method, s, grid, cfg, opts))
    report.scores.push_back(bic_score(s, est.factor, n, bic));
  report.selected_index = detail::argmin(report.scores);
  report.selected = PenaltySpec::uniform(grid[report.selected_index]);
  return report;
}

inline TuningReport tune_cv(const DataMatrix& data, const std::vector<double>& grid, Method method, int folds,
                            std::uint64_t seed, const SolverConfig& cfg = {}, const CvOptions& opts = {}) {
  detail::require(!grid.empty(), ErrorCode::InvalidConfig, "grid must not be empty");
  TuningReport report;
  report.criterion = "cv";
  report.grid = grid;
  for (double lambda : grid) {
    CvScore score = cv_score(data, method, PenaltySpec::uniform(lambda), folds, seed, cfg, opts);
    report.scores.push_back(score.value);
    report.fold_scores.push_back(std::move(score.folds));
  }
  report.selected_index = detail::argmin(report.scores);
  report.selected = PenaltySpec::uniform(grid[report.selected_index]);
  return report;
}

inline TuningReport tune_quantile(Index n, Index p, double alpha) {
  TuningReport report;
  report.criterion = "quantile";
  report.selected = quantile_penalty(n, p, alpha);
  return report;
}

}  // namespace cscs
