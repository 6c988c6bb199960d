#pragma once

// One entry point over the three estimators. Every method is reported as a
// classical factor L with Omega_hat = L^t L:
//   CSCS            -> its own L
//   Sparse Cholesky -> L = D^{-1/2} T
//   Sparse DAG      -> L = T   (its implied D is the identity)

#include <optional>
#include <string_view>
#include <vector>

#include "cscs/baselines.hpp"
#include "cscs/covmodel.hpp"
#include "cscs/cscsfit.hpp"

namespace cscs {

enum class Method { Cscs, SparseCholesky, SparseDag };

constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::Cscs: return "cscs";
    case Method::SparseCholesky: return "sparse-cholesky";
    case Method::SparseDag: return "sparse-dag";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::Cscs, Method::SparseCholesky, Method::SparseDag})
    if (method_name(m) == name) return m;
  return std::nullopt;
}

struct Estimate {
  Method method;
  CholeskyFactor factor;
  double objective = 0.0;
  bool converged = true;
  bool degenerate = false;
};

struct EstimateOptions {
  bool parallel = false;
  std::size_t threads = 0;
  SparseCholOptions sparse_cholesky;
};

inline Estimate estimate(Method method, const CovarianceMatrix& s, const PenaltySpec& pen, const SolverConfig& cfg = {},
                         const EstimateOptions& opts = {}) {
  switch (method) {
    case Method::Cscs: {
      FitOptions fo;
      fo.parallel = opts.parallel;
      fo.threads = opts.threads;
      FitResult fit = fit_cscs(s, pen, cfg, fo);
      return {method, std::move(fit.factor), fit.objective, fit.converged, false};
    }
    case Method::SparseCholesky: {
      SparseCholOptions so = opts.sparse_cholesky;
      so.parallel = opts.parallel;
      so.threads = opts.threads;
      const SparseCholResult fit = fit_sparse_cholesky(s, pen, cfg, so);
      return {method, from_modified_cholesky(fit.params), fit.objective, fit.converged, fit.degenerate};
    }
    case Method::SparseDag: {
      const SparseDagResult fit = fit_sparse_dag(s, pen, cfg, {opts.parallel, opts.threads});
      return {method, CholeskyFactor::from_dense(fit.t), fit.objective, fit.converged, false};
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown method");
}

/// Estimates along a grid of scalar penalties, in grid order. CSCS reuses
/// warm starts along the path; the baselines restart from their defaults.
inline std::vector<Estimate> estimate_path(Method method, const CovarianceMatrix& s, const std::vector<double>& grid,
                                           const SolverConfig& cfg = {}, const EstimateOptions& opts = {}) {
  std::vector<Estimate> out;
  out.reserve(grid.size());
  if (method == Method::Cscs) {
    FitOptions fo;
    fo.parallel = opts.parallel;
    fo.threads = opts.threads;
    for (FitResult& fit : penalty_path(s, grid, cfg, fo))
      out.push_back({method, std::move(fit.factor), fit.objective, fit.converged, false});
    return out;
  }
  for (double lambda : grid) out.push_back(estimate(method, s, PenaltySpec::uniform(lambda), cfg, opts));
  return out;
}

}  // namespace cscs
