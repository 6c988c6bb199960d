#pragma once

// Cyclic coordinatewise minimization of
//
//   h(x) = -2 log x_k + x^t A x + lambda * sum_{j<k} |x_j|,   x_k > 0,
//
// the per-row subproblem of the CSCS objective. Two computational paths share
// the same sweep: a dense one that reads A directly (O(k^2) per sweep) and a
// low-rank one that keeps r = W x cached for A = W^t W (O(nk) per sweep).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <vector>

#include "cscs/covmodel.hpp"
#include "cscs/error.hpp"

namespace cscs {

/// Non-owning column-major view; used for leading blocks of a larger S.
using MatrixView = Eigen::Map<const MatrixXd, 0, Eigen::OuterStride<>>;

inline MatrixView view_of(const MatrixXd& m) {
  return MatrixView(m.data(), m.rows(), m.cols(), Eigen::OuterStride<>(m.outerStride()));
}

/// Leading k x k block of a square matrix.
inline MatrixView leading_block(const MatrixXd& m, Index k) {
  return MatrixView(m.data(), k, k, Eigen::OuterStride<>(m.outerStride()));
}

/// First k columns of an n x p matrix.
inline MatrixView leading_columns(const MatrixXd& m, Index k) {
  return MatrixView(m.data(), m.rows(), k, Eigen::OuterStride<>(m.outerStride()));
}

template <std::floating_point T>
constexpr T soft_threshold(T x, T lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return T(0);
}

enum class RowPath { Automatic, Dense, LowRank };

/// Immutable view of one row problem. The gram matrix A (k x k) and the
/// optional factor W (n x k, A = W^t W) are not owned.
class RowProblem {
 public:
  RowProblem(MatrixView gram, double lambda, std::optional<MatrixView> factor = std::nullopt)
      : gram_(gram), lambda_(lambda), factor_(factor) {
    check_cheap();
    const double scale = std::max(1.0, gram_.cwiseAbs().maxCoeff());
    detail::require((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                    ErrorCode::InvalidProblem, "row matrix is not symmetric");
    if (factor_) {
      const MatrixXd rebuilt = factor_->transpose() * (*factor_);
      detail::require((rebuilt - gram_).cwiseAbs().maxCoeff() <= 1e-10 * scale, ErrorCode::InvalidProblem,
                      "low-rank factor does not reproduce the row matrix");
    }
  }

  /// Skips the O(k^2) symmetry and factor checks. For callers that already
  /// validated the enclosing covariance.
  static RowProblem trusted(MatrixView gram, double lambda, std::optional<MatrixView> factor = std::nullopt) {
    return RowProblem(gram, lambda, factor, TrustedTag{});
  }

  Index dim() const { return gram_.rows(); }
  const MatrixView& gram() const { return gram_; }
  double lambda() const { return lambda_; }
  bool has_factor() const { return factor_.has_value(); }
  const MatrixView& factor() const { return *factor_; }

  /// The cached-residual path pays off only when the factor has fewer rows than k.
  bool prefers_low_rank() const { return factor_ && factor_->rows() < dim(); }

 private:
  struct TrustedTag {};
  RowProblem(MatrixView gram, double lambda, std::optional<MatrixView> factor, TrustedTag)
      : gram_(gram), lambda_(lambda), factor_(factor) {
    check_cheap();
  }

  void check_cheap() const {
    detail::require(gram_.rows() >= 1 && gram_.rows() == gram_.cols(), ErrorCode::InvalidProblem,
                    "row matrix must be square with k >= 1");
    detail::require(std::isfinite(lambda_) && lambda_ >= 0.0, ErrorCode::InvalidProblem,
                    "lambda must be finite and non-negative");
    detail::require((gram_.diagonal().array() > 0.0).all(), ErrorCode::InvalidProblem,
                    "row matrix diagonal must be strictly positive");
    if (factor_) {
      detail::require(factor_->cols() == gram_.cols(), ErrorCode::InvalidProblem,
                      "factor must have k columns");
    }
  }

  MatrixView gram_;
  double lambda_;
  std::optional<MatrixView> factor_;
};

struct SolverConfig {
  double epsilon = 1e-8;
  int max_iterations = 1000;
  std::optional<VectorXd> initial;
  RowPath path = RowPath::Automatic;
};

struct RowSolution {
  VectorXd x;
  int iterations = 0;
  bool converged = false;
  /// Objective after each sweep.
  std::vector<double> objective_trace;
  double kkt_residual = 0.0;
  bool low_rank = false;
};

/// h(x) evaluated densely.
inline double row_objective(const RowProblem& prob, const Eigen::Ref<const VectorXd>& x) {
  const Index k = prob.dim();
  return -2.0 * std::log(x(k - 1)) + x.dot(prob.gram() * x) + prob.lambda() * x.head(k - 1).cwiseAbs().sum();
}

/// sum_{l != j} A_lj x_l.
inline double dense_cross_term(const RowProblem& prob, const Eigen::Ref<const VectorXd>& x, Index j) {
  return prob.gram().col(j).dot(x) - prob.gram()(j, j) * x(j);
}

/// Exact minimizer over coordinate j < k with the others held fixed.
inline double update_offdiag(const RowProblem& prob, const Eigen::Ref<const VectorXd>& x, Index j) {
  const double ajj = prob.gram()(j, j);
  return soft_threshold(-2.0 * dense_cross_term(prob, x, j), prob.lambda()) / (2.0 * ajj);
}

/// Positive root of a x^2 + c x - 1 = 0, the stationarity condition of
/// -2 log x + a x^2 + 2 c x. Written to avoid cancellation when c > 0.
inline double positive_diag_root(double cross, double akk) {
  const double disc = std::sqrt(cross * cross + 4.0 * akk);
  if (cross > 0.0) return 2.0 / (cross + disc);
  return (-cross + disc) / (2.0 * akk);
}

/// Exact minimizer over x_k > 0 with the others held fixed.
inline double update_diag(const RowProblem& prob, const Eigen::Ref<const VectorXd>& x) {
  const Index k = prob.dim() - 1;
  return positive_diag_root(dense_cross_term(prob, x, k), prob.gram()(k, k));
}

/// sum_{l != j} A_lj x_l for A = W^t W, given the cached residual r = W x.
/// Costs O(n).
inline double low_rank_cross_term(const MatrixView& w, const Eigen::Ref<const VectorXd>& residual, Index j,
                                  double xj) {
  return w.col(j).dot(residual) - w.col(j).squaredNorm() * xj;
}

/// Throws StaleResidual when r no longer equals W x.
inline void check_residual(const MatrixView& w, const Eigen::Ref<const VectorXd>& x,
                           const Eigen::Ref<const VectorXd>& residual) {
  const VectorXd fresh = w * x;
  const double scale = std::max(1.0, fresh.cwiseAbs().maxCoeff());
  if ((fresh - residual).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw Error(ErrorCode::StaleResidual, "cached residual does not match W x");
}

/// Largest violation of the subgradient optimality conditions at x:
/// d = 2 A x, and for j < k either d_j = -lambda sign(x_j) (x_j != 0) or
/// |d_j| <= lambda (x_j == 0); for the diagonal d_k - 2/x_k = 0.
inline double kkt_check(const RowProblem& prob, const Eigen::Ref<const VectorXd>& x) {
  const Index k = prob.dim();
  detail::require(x.size() == k, ErrorCode::DimensionMismatch, "x has the wrong length");
  detail::require(x(k - 1) > 0.0, ErrorCode::InvalidProblem, "x_k must be positive");
  VectorXd grad;
  if (prob.prefers_low_rank()) {
    grad = 2.0 * (prob.factor().transpose() * (prob.factor() * x));
  } else {
    grad = 2.0 * (prob.gram() * x);
  }
  const double lambda = prob.lambda();
  double worst = 0.0;
  for (Index j = 0; j + 1 < k; ++j) {
    const double violation = x(j) != 0.0 ? std::abs(grad(j) + lambda * (x(j) > 0.0 ? 1.0 : -1.0))
                                         : std::max(std::abs(grad(j)) - lambda, 0.0);
    worst = std::max(worst, violation);
  }
  return std::max(worst, std::abs(grad(k - 1) - 2.0 / x(k - 1)));
}

namespace detail {

class DenseKernel {
 public:
  explicit DenseKernel(const RowProblem& prob) : gram_(prob.gram()) {}

  double cross(const VectorXd& x, Index j) const { return gram_.col(j).dot(x) - gram_(j, j) * x(j); }
  void moved(Index, double) {}
  double quadratic(const VectorXd& x) const { return x.dot(gram_ * x); }
  void verify(const VectorXd&) const {}

 private:
  const MatrixView& gram_;
};

class LowRankKernel {
 public:
  LowRankKernel(const RowProblem& prob, const VectorXd& x)
      : w_(prob.factor()), residual_(prob.factor() * x), norms_(prob.factor().colwise().squaredNorm().transpose()) {}

  double cross(const VectorXd& x, Index j) const { return w_.col(j).dot(residual_) - norms_(j) * x(j); }
  void moved(Index j, double delta) { residual_.noalias() += delta * w_.col(j); }
  double quadratic(const VectorXd&) const { return residual_.squaredNorm(); }
  void verify([[maybe_unused]] const VectorXd& x) const {
#ifndef NDEBUG
    check_residual(w_, x, residual_);
#endif
  }

 private:
  const MatrixView& w_;
  VectorXd residual_;
  VectorXd norms_;
};

template <class Kernel>
void run_sweeps(const RowProblem& prob, const SolverConfig& cfg, Kernel& kernel, RowSolution& out) {
  VectorXd& x = out.x;
  const Index k = prob.dim();
  const double lambda = prob.lambda();
  const auto& gram = prob.gram();
  for (int r = 1; r <= cfg.max_iterations; ++r) {
    double change = 0.0;
    for (Index j = 0; j + 1 < k; ++j) {
      const double next = soft_threshold(-2.0 * kernel.cross(x, j), lambda) / (2.0 * gram(j, j));
      const double delta = next - x(j);
      if (delta != 0.0) {
        kernel.moved(j, delta);
        x(j) = next;
        change = std::max(change, std::abs(delta));
      }
    }
    const double next = positive_diag_root(kernel.cross(x, k - 1), gram(k - 1, k - 1));
    const double delta = next - x(k - 1);
    if (delta != 0.0) {
      kernel.moved(k - 1, delta);
      x(k - 1) = next;
      change = std::max(change, std::abs(delta));
    }
    kernel.verify(x);
    out.iterations = r;
    out.objective_trace.push_back(-2.0 * std::log(x(k - 1)) + kernel.quadratic(x) +
                                  lambda * x.head(k - 1).cwiseAbs().sum());
    if (change < cfg.epsilon) {
      out.converged = true;
      return;
    }
  }
}

}  // namespace detail

/// Default start: off-diagonal zero, x_k = 1/sqrt(A_kk), the exact solution
/// for a fully sparsifying penalty.
inline VectorXd default_start(const RowProblem& prob) {
  const Index k = prob.dim();
  VectorXd x = VectorXd::Zero(k);
  x(k - 1) = 1.0 / std::sqrt(prob.gram()(k - 1, k - 1));
  return x;
}

inline RowSolution minimize_row(const RowProblem& prob, const SolverConfig& cfg = {}) {
  detail::require(cfg.epsilon > 0.0, ErrorCode::InvalidConfig, "epsilon must be positive");
  detail::require(cfg.max_iterations >= 1, ErrorCode::InvalidConfig, "max_iterations must be at least 1");
  const Index k = prob.dim();

  RowSolution out;
  if (cfg.initial) {
    detail::require(cfg.initial->size() == k, ErrorCode::InvalidProblem, "initial vector has the wrong length");
    detail::require(cfg.initial->allFinite() && (*cfg.initial)(k - 1) > 0.0, ErrorCode::InvalidProblem,
                    "initial vector must be finite with a positive last entry");
    out.x = *cfg.initial;
  } else {
    out.x = default_start(prob);
  }

  bool low_rank = false;
  switch (cfg.path) {
    case RowPath::Automatic: low_rank = prob.prefers_low_rank(); break;
    case RowPath::Dense: low_rank = false; break;
    case RowPath::LowRank:
      detail::require(prob.has_factor(), ErrorCode::InvalidProblem, "low-rank path requested without a factor");
      low_rank = true;
      break;
  }
  out.low_rank = low_rank;
  out.objective_trace.reserve(static_cast<std::size_t>(std::min(cfg.max_iterations, 64)));

  if (low_rank) {
    detail::LowRankKernel kernel(prob, out.x);
    detail::run_sweeps(prob, cfg, kernel, out);
  } else {
    detail::DenseKernel kernel(prob);
    detail::run_sweeps(prob, cfg, kernel, out);
  }
  out.kkt_residual = kkt_check(prob, out.x);
  return out;
}

}  // namespace cscs
