#pragma once

// Seeded simulation studies comparing CSCS with the two baselines:
//   degeneracy      Sparse Cholesky D_ii collapse when n < p
//   roc-auc         windowed ROC AUC over a penalty path
//   frobenius-path  mean ||Omega0 - Omega_hat||_F along a penalty grid
// plus a per-sweep timing probe for the row kernel.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "cscs/baselines.hpp"
#include "cscs/covmodel.hpp"
#include "cscs/cscsfit.hpp"
#include "cscs/estimators.hpp"
#include "cscs/rng.hpp"
#include "cscs/rowsolver.hpp"
#include "cscs/simeval.hpp"
#include "cscs/tuning.hpp"

namespace cscs {

/// P(X >= wins) for X ~ Binomial(trials, 1/2).
inline double sign_test_pvalue(int wins, int trials) {
  if (trials <= 0) return 1.0;
  double total = 0.0;
  for (int k = wins; k <= trials; ++k) {
    const double log_term = std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0) -
                            trials * std::log(2.0);
    total += std::exp(log_term);
  }
  return std::min(1.0, total);
}

// ---------------------------------------------------------------------------

struct DegeneracyConfig {
  Index dim = 8;
  Index samples = 7;
  int seeds = 20;
  double lambda = 0.1;
  double zero_fraction = 0.6;
  std::uint64_t seed = 1;
  bool center = false;
  SolverConfig solver{1e-8, 1000, std::nullopt, RowPath::Automatic};
  SparseCholOptions sparse_cholesky;
};

struct DegeneracyRun {
  std::uint64_t seed = 0;
  std::vector<double> min_d_trace;
  double min_raw_d = 0.0;
  bool degenerate = false;
  std::optional<Index> degenerate_row;
  double cscs_min_diagonal = 0.0;
};

struct DegeneracyReport {
  DegeneracyConfig config;
  std::vector<DegeneracyRun> runs;

  int degenerate_runs() const {
    return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const auto& r) { return r.degenerate; }));
  }
  double smallest_raw_d() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) m = std::min(m, r.min_raw_d);
    return m;
  }
  double smallest_cscs_diagonal() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) m = std::min(m, r.cscs_min_diagonal);
    return m;
  }
};

/// One fresh model and dataset per seed; Sparse Cholesky and CSCS are fit
/// to the same sample covariance.
inline DegeneracyReport run_degeneracy(const DegeneracyConfig& cfg) {
  DegeneracyReport report{cfg, {}};
  ModelConfig mc;
  mc.dim = cfg.dim;
  mc.zero_fraction = cfg.zero_fraction;
  for (int s = 0; s < cfg.seeds; ++s) {
    const std::uint64_t run_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(s));
    const GroundTruthModel model = generate_model(mc, derive_seed(run_seed, 0));
    const DataMatrix data = sample_gaussian(model, cfg.samples, derive_seed(run_seed, 1));
    const CovarianceMatrix cov = sample_covariance(data, {cfg.center, false, false});
    const PenaltySpec pen = PenaltySpec::uniform(cfg.lambda);

    const SparseCholResult chol = fit_sparse_cholesky(cov, pen, cfg.solver, cfg.sparse_cholesky);
    const FitResult fit = fit_cscs(cov, pen, cfg.solver);
    double min_diag = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < fit.factor.dim(); ++i) min_diag = std::min(min_diag, fit.factor.diagonal(i));
    report.runs.push_back({run_seed, chol.min_d_trace(), chol.min_raw_d(), chol.degenerate, chol.degenerate_row, min_diag});
  }
  return report;
}

// ---------------------------------------------------------------------------

struct RocAucConfig {
  Index dim = 100;
  Index samples = 25;
  int replications = 20;
  double zero_fraction = 0.98;
  int grid_count = 40;
  double fpr_lo = 0.01;
  double fpr_hi = 0.15;
  std::uint64_t seed = 1;
  bool center = true;
  bool scale = true;
  SolverConfig solver{1e-6, 1000, std::nullopt, RowPath::Automatic};
  EstimateOptions estimate;
  std::vector<Method> methods{Method::Cscs, Method::SparseCholesky, Method::SparseDag};
};

struct MethodAuc {
  Method method;
  std::vector<double> auc;
  double mean = 0.0;
  double stddev = 0.0;
};

struct RocAucReport {
  RocAucConfig config;
  Index true_edges = 0;
  std::vector<MethodAuc> methods;

  const MethodAuc& of(Method m) const {
    for (const auto& r : methods)
      if (r.method == m) return r;
    throw Error(ErrorCode::InvalidConfig, "method not part of the report");
  }
};

/// ROC curve of one method on one covariance, swept over its own default grid.
inline RocCurve roc_for(Method method, const CovarianceMatrix& s, const std::vector<Edge>& truth, int grid_count,
                        const SolverConfig& cfg, const EstimateOptions& opts = {}) {
  const std::vector<double> grid = default_grid(s, grid_count, method, cfg, opts);
  const std::vector<Estimate> path = estimate_path(method, s, grid, cfg, opts);
  std::vector<RocPoint> points;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    RocPoint pt = selection_rates(support(path[g].factor), truth, s.dim());
    pt.lambda = grid[g];
    points.push_back(pt);
  }
  return make_roc(std::move(points));
}

/// A single (T0, D0) per (dim, seed), reused by every replication.
inline RocAucReport run_roc_auc(const RocAucConfig& cfg) {
  ModelConfig mc;
  mc.dim = cfg.dim;
  mc.zero_fraction = cfg.zero_fraction;
  const GroundTruthModel model = generate_model(mc, derive_seed(cfg.seed, 0));
  RocAucReport report{cfg, static_cast<Index>(model.edges.size()), {}};
  for (Method m : cfg.methods) report.methods.push_back({m, {}, 0.0, 0.0});
  for (int r = 0; r < cfg.replications; ++r) {
    const DataMatrix data = sample_gaussian(model, cfg.samples, derive_seed(cfg.seed, 1 + static_cast<std::uint64_t>(r)));
    const CovarianceMatrix s = sample_covariance(data, {cfg.center, cfg.scale, false});
    for (auto& entry : report.methods) {
      const RocCurve curve = roc_for(entry.method, s, model.edges, cfg.grid_count, cfg.solver, cfg.estimate);
      entry.auc.push_back(auc_windowed(curve, cfg.fpr_lo, cfg.fpr_hi));
    }
  }
  for (auto& entry : report.methods) {
    entry.mean = mean_of(entry.auc);
    entry.stddev = stddev_of(entry.auc);
  }
  return report;
}

struct PairedComparison {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double pvalue = 1.0;
};

/// One-sided sign test that `first` beats `second` across paired replications.
inline PairedComparison sign_test(const std::vector<double>& first, const std::vector<double>& second) {
  PairedComparison out;
  for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i) {
    if (first[i] > second[i]) ++out.wins;
    else if (first[i] < second[i]) ++out.losses;
    else ++out.ties;
  }
  out.pvalue = sign_test_pvalue(out.wins, out.wins + out.losses);
  return out;
}

// ---------------------------------------------------------------------------

struct FrobeniusConfig {
  Index dim = 50;
  Index samples = 25;
  int replications = 20;
  double zero_fraction = 0.98;
  int grid_count = 20;
  std::uint64_t seed = 1;
  bool center = true;
  SolverConfig solver{1e-6, 1000, std::nullopt, RowPath::Automatic};
  EstimateOptions estimate;
  std::vector<Method> methods{Method::Cscs, Method::SparseDag};
};

struct MethodFrobenius {
  Method method;
  std::vector<double> grid;
  std::vector<double> mean_error;
  double min_mean_error = 0.0;
  double argmin_lambda = 0.0;
};

struct FrobeniusReport {
  FrobeniusConfig config;
  std::vector<MethodFrobenius> methods;

  const MethodFrobenius& of(Method m) const {
    for (const auto& r : methods)
      if (r.method == m) return r;
    throw Error(ErrorCode::InvalidConfig, "method not part of the report");
  }
};

/// Each method's grid is default_grid() of the first replication's
/// covariance, shared across replications so errors can be averaged per
/// lambda. Data are centered but not scaled: scaling changes Omega0.
inline FrobeniusReport run_frobenius_path(const FrobeniusConfig& cfg) {
  ModelConfig mc;
  mc.dim = cfg.dim;
  mc.zero_fraction = cfg.zero_fraction;
  const GroundTruthModel model = generate_model(mc, derive_seed(cfg.seed, 0));
  std::vector<CovarianceMatrix> covs;
  for (int r = 0; r < cfg.replications; ++r) {
    const DataMatrix data = sample_gaussian(model, cfg.samples, derive_seed(cfg.seed, 1 + static_cast<std::uint64_t>(r)));
    covs.push_back(sample_covariance(data, {cfg.center, false, false}));
  }
  FrobeniusReport report{cfg, {}};
  for (Method m : cfg.methods) {
    MethodFrobenius entry{m, default_grid(covs.front(), cfg.grid_count, m, cfg.solver, cfg.estimate), {}, 0.0, 0.0};
    std::vector<KahanSum> sums(entry.grid.size());
    for (const CovarianceMatrix& s : covs) {
      const std::vector<Estimate> path = estimate_path(m, s, entry.grid, cfg.solver, cfg.estimate);
      for (std::size_t g = 0; g < path.size(); ++g)
        sums[g].add(frobenius_error(model.precision, precision_from_factor(path[g].factor)));
    }
    for (const KahanSum& s : sums) entry.mean_error.push_back(s.value() / static_cast<double>(covs.size()));
    const auto best = std::min_element(entry.mean_error.begin(), entry.mean_error.end()) - entry.mean_error.begin();
    entry.min_mean_error = entry.mean_error[static_cast<std::size_t>(best)];
    entry.argmin_lambda = entry.grid[static_cast<std::size_t>(best)];
    report.methods.push_back(std::move(entry));
  }
  return report;
}

// ---------------------------------------------------------------------------

struct SweepTiming {
  Index dim = 0;
  double seconds_per_sweep = 0.0;
};

/// Wall time per sweep of the last (largest) row problem of a p-variate
/// covariance built from n standard-normal samples, on the requested path.
/// This is the per-process cost when rows run in parallel.
inline SweepTiming time_row_sweeps(Index dim, Index samples, RowPath path, double lambda, std::uint64_t seed,
                                   int sweeps_per_rep = 20, int reps = 7) {
  Rng rng(seed);
  MatrixXd x(samples, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < samples; ++i) x(i, j) = rng.normal();
  const CovarianceMatrix s = sample_covariance(DataMatrix(std::move(x)));
  const RowProblem prob = cscs_row_problem(s, dim - 1, lambda);
  SolverConfig cfg;
  cfg.epsilon = std::numeric_limits<double>::min();
  cfg.max_iterations = sweeps_per_rep;
  cfg.path = path;
  std::vector<double> per_sweep;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const RowSolution sol = minimize_row(prob, cfg);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    per_sweep.push_back(elapsed / static_cast<double>(std::max(sol.iterations, 1)));
  }
  std::sort(per_sweep.begin(), per_sweep.end());
  return {dim, per_sweep[per_sweep.size() / 2]};
}

/// Least-squares slope of log(seconds) against log(dim).
inline double loglog_slope(const std::vector<SweepTiming>& timings) {
  const auto n = static_cast<double>(timings.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& t : timings) {
    const double lx = std::log(static_cast<double>(t.dim));
    const double ly = std::log(t.seconds_per_sweep);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace cscs
