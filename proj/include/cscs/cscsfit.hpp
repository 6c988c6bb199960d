#pragma once

// The CSCS estimator: p independent row problems, each minimized by the
// cyclic coordinatewise kernel, assembled into a lower triangular factor.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "cscs/covmodel.hpp"
#include "cscs/detail/parallel.hpp"
#include "cscs/error.hpp"
#include "cscs/rowsolver.hpp"

namespace cscs {

struct RowSummary {
  int iterations = 0;
  bool converged = true;
  double kkt_residual = 0.0;
  double objective = 0.0;
  bool low_rank = false;
};

struct FitResult {
  CholeskyFactor factor;
  double objective = 0.0;
  std::vector<RowSummary> rows;
  PenaltySpec penalty;
  bool converged = true;
  double wall_time_seconds = 0.0;
};

struct FitOptions {
  bool parallel = false;
  /// Worker cap when parallel; 0 means hardware concurrency.
  std::size_t threads = 0;
  /// Warm start. Rows are read up to and including the diagonal.
  std::optional<CholeskyFactor> initial;
};

/// Row i (0-based) of the decomposition: k = i + 1, A = S_i, with the
/// matching leading columns of the covariance factor when present.
inline RowProblem cscs_row_problem(const CovarianceMatrix& s, Index i, double lambda) {
  const Index k = i + 1;
  std::optional<MatrixView> factor;
  if (s.has_factor()) factor.emplace(leading_columns(s.factor(), k));
  return RowProblem::trusted(leading_block(s.values(), k), lambda, factor);
}

inline FitResult fit_cscs(const CovarianceMatrix& s, const PenaltySpec& pen, const SolverConfig& cfg = {},
                          const FitOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const Index p = s.dim();
  pen.check_dimension(p);
  detail::require(!cfg.initial.has_value(), ErrorCode::InvalidConfig,
                  "fit_cscs takes its warm start through FitOptions::initial");
  if (opts.initial) {
    detail::require(opts.initial->dim() == p, ErrorCode::DimensionMismatch, "warm start has the wrong dimension");
  }

  std::vector<double> packed(detail::packed_offset(p), 0.0);
  std::vector<RowSummary> rows(static_cast<std::size_t>(p));

  auto solve_row = [&](std::size_t idx) {
    const Index i = static_cast<Index>(idx);
    double* dest = packed.data() + detail::packed_offset(i);
    RowSummary& summary = rows[idx];
    if (i == 0) {
      // One-dimensional and unpenalized: argmin x^2 S_11 - 2 log x.
      const double s11 = s(0, 0);
      dest[0] = 1.0 / std::sqrt(s11);
      summary.kkt_residual = std::abs(2.0 * s11 * dest[0] - 2.0 / dest[0]);
      summary.objective = s11 * dest[0] * dest[0] - 2.0 * std::log(dest[0]);
      return;
    }
    const RowProblem prob = cscs_row_problem(s, i, pen.for_row(i));
    SolverConfig row_cfg = cfg;
    if (opts.initial) row_cfg.initial = opts.initial->row_vector(i);
    const RowSolution sol = minimize_row(prob, row_cfg);
    std::copy(sol.x.data(), sol.x.data() + sol.x.size(), dest);
    summary.iterations = sol.iterations;
    summary.converged = sol.converged;
    summary.kkt_residual = sol.kkt_residual;
    summary.low_rank = sol.low_rank;
    summary.objective = cscs_row_objective(s, sol.x, prob.lambda());
  };

  detail::parallel_for(static_cast<std::size_t>(p), opts.parallel ? opts.threads : 1, solve_row);

  FitResult result{CholeskyFactor(p, std::move(packed)), 0.0, std::move(rows), pen, true, 0.0};
  for (const RowSummary& r : result.rows) {
    result.objective += r.objective;
    result.converged = result.converged && r.converged;
  }
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Fits every lambda in `grid`. Internally walks the grid from the largest
/// penalty down, warm-starting each fit from the previous one; results come
/// back in the caller's order.
inline std::vector<FitResult> penalty_path(const CovarianceMatrix& s, const std::vector<double>& grid,
                                           const SolverConfig& cfg = {}, const FitOptions& opts = {}) {
  detail::require(!grid.empty(), ErrorCode::InvalidConfig, "penalty grid must not be empty");
  for (double v : grid)
    detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidConfig, "penalty values must be non-negative");

  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });

  std::vector<std::optional<FitResult>> slots(grid.size());
  FitOptions step = opts;
  for (std::size_t idx : order) {
    FitResult fit = fit_cscs(s, PenaltySpec::uniform(grid[idx]), cfg, step);
    step.initial = fit.factor;
    slots[idx] = std::move(fit);
  }
  std::vector<FitResult> out;
  out.reserve(grid.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace cscs
