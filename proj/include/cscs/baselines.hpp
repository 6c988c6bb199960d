#pragma once

// Comparison estimators over the modified Cholesky parameterization (T, D):
//
//  * Sparse Cholesky: l1-penalized Gaussian likelihood in (T, D), minimized
//    row by row with alternating (phi, D_ii) block updates. Not convex and
//    unbounded below once a row can be fit exactly (n < p), so D_ii is
//    floored and a row that reaches the floor is reported as degenerate.
//  * Sparse DAG: the same objective with D fixed at the identity, which
//    reduces every row to a lasso.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cscs/covmodel.hpp"
#include "cscs/detail/parallel.hpp"
#include "cscs/error.hpp"
#include "cscs/rowsolver.hpp"

namespace cscs {

struct LassoOutcome {
  int sweeps = 0;
  bool converged = false;
};

namespace detail {

/// Cyclic coordinate descent for phi^t A phi + 2 phi^t b + mu ||phi||_1,
/// keeping g = A phi + b up to date. phi is the warm start on entry.
inline LassoOutcome lasso_cd(const MatrixView& a, const Eigen::Ref<const VectorXd>& b, double mu, VectorXd& phi,
                             double epsilon, int max_sweeps) {
  const Index m = a.rows();
  VectorXd grad = a * phi + b;
  LassoOutcome out;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double ajj = a(j, j);
      const double cross = grad(j) - ajj * phi(j);
      const double next = soft_threshold(-2.0 * cross, mu) / (2.0 * ajj);
      const double delta = next - phi(j);
      if (delta != 0.0) {
        grad.noalias() += delta * a.col(j);
        phi(j) = next;
        change = std::max(change, std::abs(delta));
      }
    }
    out.sweeps = sweep;
    if (change < epsilon) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// phi^t A phi + 2 phi^t b + c.
inline double regression_residual(const MatrixView& a, const Eigen::Ref<const VectorXd>& b, double c,
                                  const Eigen::Ref<const VectorXd>& phi) {
  return phi.dot(a * phi) + 2.0 * phi.dot(b) + c;
}

}  // namespace detail

/// Subgradient optimality violation for the lasso above.
inline double lasso_kkt(const MatrixView& a, const Eigen::Ref<const VectorXd>& b, double mu,
                        const Eigen::Ref<const VectorXd>& phi) {
  const VectorXd d = 2.0 * (a * phi + b);
  double worst = 0.0;
  for (Index j = 0; j < phi.size(); ++j) {
    const double v = phi(j) != 0.0 ? std::abs(d(j) + mu * (phi(j) > 0.0 ? 1.0 : -1.0))
                                   : std::max(std::abs(d(j)) - mu, 0.0);
    worst = std::max(worst, v);
  }
  return worst;
}

/// Row term of the (T, D) objective for row i >= 1:
/// (phi^t S_{i-1} phi + 2 phi^t S_{.i} + S_ii) / D_ii + log D_ii + lambda ||phi||_1.
inline double chol_row_objective(const CovarianceMatrix& s, Index i, const Eigen::Ref<const VectorXd>& phi, double d,
                                 double lambda) {
  detail::require(i >= 1 && phi.size() == i, ErrorCode::DimensionMismatch, "phi must have length i");
  const double rss = detail::regression_residual(leading_block(s.values(), i), s.values().col(i).head(i), s(i, i), phi);
  return rss / d + std::log(d) + lambda * phi.cwiseAbs().sum();
}

/// Full (T, D) objective tr(T^t D^{-1} T S) + log|D| + penalty on T's strict lower triangle.
inline double chol_objective(const ModifiedCholesky& td, const CovarianceMatrix& s, const PenaltySpec& pen) {
  detail::require(td.dim() == s.dim(), ErrorCode::DimensionMismatch, "parameter and covariance dimensions differ");
  pen.check_dimension(s.dim());
  double total = s(0, 0) / td.d()(0) + std::log(td.d()(0));
  for (Index i = 1; i < s.dim(); ++i) {
    const VectorXd phi = td.t().row(i).head(i).transpose();
    total += chol_row_objective(s, i, phi, td.d()(i), pen.for_row(i));
  }
  return total;
}

struct SparseCholRow {
  int iterations = 0;
  bool converged = true;
  bool degenerate = false;
  /// Smallest D_ii proposed by a D-block update, before flooring.
  double min_raw_d = std::numeric_limits<double>::infinity();
  /// Unfloored D_ii after every outer iteration.
  std::vector<double> d_trace;
  std::vector<double> objective_trace;
};

struct SparseCholResult {
  ModifiedCholesky params;
  double objective = 0.0;
  std::vector<SparseCholRow> rows;
  bool degenerate = false;
  /// First row whose D_ii reached the floor.
  std::optional<Index> degenerate_row;
  bool converged = true;
  double wall_time_seconds = 0.0;

  double min_raw_d() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::min(m, r.min_raw_d);
    return m;
  }

  /// min_i D_ii after each outer iteration; rows that stopped early hold
  /// their last value.
  std::vector<double> min_d_trace() const {
    std::size_t len = 0;
    for (const auto& r : rows) len = std::max(len, r.d_trace.size());
    std::vector<double> out(len, std::numeric_limits<double>::infinity());
    for (const auto& r : rows) {
      if (r.d_trace.empty()) continue;
      for (std::size_t t = 0; t < len; ++t) out[t] = std::min(out[t], r.d_trace[std::min(t, r.d_trace.size() - 1)]);
    }
    return out;
  }
};

struct SparseCholOptions {
  double d_floor = 1e-12;
  /// Inner lasso tolerance as a fraction of the outer epsilon.
  double inner_tolerance_ratio = 0.1;
  int inner_max_sweeps = 1000;
  bool parallel = false;
  std::size_t threads = 0;
};

/// Alternating block minimization started from T = I, D = I. A row stops as
/// soon as its D_ii update falls to the floor: the objective has no finite
/// minimizer in that direction.
inline SparseCholResult fit_sparse_cholesky(const CovarianceMatrix& s, const PenaltySpec& pen,
                                            const SolverConfig& cfg = {}, const SparseCholOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const Index p = s.dim();
  pen.check_dimension(p);
  detail::require(cfg.epsilon > 0.0 && cfg.max_iterations >= 1, ErrorCode::InvalidConfig, "invalid solver config");
  detail::require(opts.d_floor > 0.0, ErrorCode::InvalidConfig, "D floor must be positive");

  MatrixXd t = MatrixXd::Identity(p, p);
  VectorXd d(p);
  std::vector<SparseCholRow> rows(static_cast<std::size_t>(p));
  d(0) = s(0, 0);
  rows[0].d_trace.push_back(d(0));
  rows[0].min_raw_d = d(0);

  const double inner_eps = cfg.epsilon * opts.inner_tolerance_ratio;
  auto solve_row = [&](std::size_t idx) {
    const Index i = static_cast<Index>(idx);
    if (i == 0) return;
    SparseCholRow& row = rows[idx];
    const MatrixView a = leading_block(s.values(), i);
    const VectorXd b = s.values().col(i).head(i);
    const double c = s(i, i);
    const double lambda = pen.for_row(i);
    VectorXd phi = VectorXd::Zero(i);
    double di = 1.0;
    for (int r = 1; r <= cfg.max_iterations; ++r) {
      const VectorXd phi_old = phi;
      const double d_old = di;
      // phi-block at fixed D_ii: multiplying through by D_ii gives a lasso
      // with penalty lambda * D_ii.
      detail::lasso_cd(a, b, lambda * di, phi, inner_eps, opts.inner_max_sweeps);
      const double raw = detail::regression_residual(a, b, c, phi);
      row.iterations = r;
      row.d_trace.push_back(raw);
      row.min_raw_d = std::min(row.min_raw_d, raw);
      if (raw <= opts.d_floor) {
        di = opts.d_floor;
        row.degenerate = true;
        row.converged = false;
        break;
      }
      di = raw;
      row.objective_trace.push_back(1.0 + std::log(di) + lambda * phi.cwiseAbs().sum());
      const double change = std::max((phi - phi_old).cwiseAbs().maxCoeff(), std::abs(di - d_old));
      if (change < cfg.epsilon) {
        row.converged = true;
        break;
      }
      row.converged = false;
    }
    t.row(i).head(i) = phi.transpose();
    d(i) = di;
  };

  detail::parallel_for(static_cast<std::size_t>(p), opts.parallel ? opts.threads : 1, solve_row);

  SparseCholResult result{ModifiedCholesky(std::move(t), std::move(d)), 0.0, std::move(rows), false, std::nullopt,
                          true, 0.0};
  for (Index i = 0; i < p; ++i) {
    const auto& r = result.rows[static_cast<std::size_t>(i)];
    if (r.degenerate && !result.degenerate_row) result.degenerate_row = i;
    result.degenerate = result.degenerate || r.degenerate;
    result.converged = result.converged && r.converged;
  }
  result.objective = chol_objective(result.params, s, pen);
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

struct SparseDagRow {
  int iterations = 0;
  bool converged = true;
  double kkt_residual = 0.0;
};

struct SparseDagResult {
  MatrixXd t;
  double objective = 0.0;
  std::vector<SparseDagRow> rows;
  bool converged = true;
  double wall_time_seconds = 0.0;
};

struct SparseDagOptions {
  bool parallel = false;
  std::size_t threads = 0;
};

/// Row-wise lasso of each variable on its predecessors with D = I.
inline SparseDagResult fit_sparse_dag(const CovarianceMatrix& s, const PenaltySpec& pen, const SolverConfig& cfg = {},
                                      const SparseDagOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const Index p = s.dim();
  pen.check_dimension(p);
  detail::require(cfg.epsilon > 0.0 && cfg.max_iterations >= 1, ErrorCode::InvalidConfig, "invalid solver config");

  MatrixXd t = MatrixXd::Identity(p, p);
  std::vector<SparseDagRow> rows(static_cast<std::size_t>(p));
  std::vector<double> row_objective(static_cast<std::size_t>(p), 0.0);
  row_objective[0] = s(0, 0);

  auto solve_row = [&](std::size_t idx) {
    const Index i = static_cast<Index>(idx);
    if (i == 0) return;
    const MatrixView a = leading_block(s.values(), i);
    const VectorXd b = s.values().col(i).head(i);
    const double lambda = pen.for_row(i);
    VectorXd phi = VectorXd::Zero(i);
    const LassoOutcome outcome = detail::lasso_cd(a, b, lambda, phi, cfg.epsilon, cfg.max_iterations);
    rows[idx] = {outcome.sweeps, outcome.converged, lasso_kkt(a, b, lambda, phi)};
    row_objective[idx] = detail::regression_residual(a, b, s(i, i), phi) + lambda * phi.cwiseAbs().sum();
    t.row(i).head(i) = phi.transpose();
  };

  detail::parallel_for(static_cast<std::size_t>(p), opts.parallel ? opts.threads : 1, solve_row);

  SparseDagResult result{std::move(t), 0.0, std::move(rows), true, 0.0};
  for (std::size_t i = 0; i < row_objective.size(); ++i) {
    result.objective += row_objective[i];
    result.converged = result.converged && result.rows[i].converged;
  }
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace cscs
