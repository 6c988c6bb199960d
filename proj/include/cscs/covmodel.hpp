#pragma once

// Core data model: observations, covariance, Cholesky parameterizations and
// the convex objective evaluated over the classical Cholesky factor.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cscs/error.hpp"

namespace cscs {

using Index = Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

inline double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

constexpr std::size_t packed_offset(Index row) {
  return static_cast<std::size_t>(row) * static_cast<std::size_t>(row + 1) / 2;
}

}  // namespace detail

/// n x p observation matrix, one sample per row.
class DataMatrix {
 public:
  explicit DataMatrix(MatrixXd values) : values_(std::move(values)) {
    detail::require(values_.rows() > 0 && values_.cols() > 0, ErrorCode::InvalidData,
                    "data must have at least one sample and one variable");
    detail::require(values_.allFinite(), ErrorCode::InvalidData, "data contains non-finite entries");
  }

  Index samples() const { return values_.rows(); }
  Index variables() const { return values_.cols(); }
  const MatrixXd& values() const { return values_; }

  DataMatrix select_rows(std::span<const Index> rows) const {
    MatrixXd out(static_cast<Index>(rows.size()), values_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = values_.row(rows[r]);
    return DataMatrix(std::move(out));
  }

 private:
  MatrixXd values_;
};

/// Symmetric PSD matrix with strictly positive diagonal. May carry an n x p
/// factor W with values = W^t W, which enables the low-rank solver path.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(MatrixXd values, std::optional<Index> sample_size = std::nullopt)
      : values_(std::move(values)), sample_size_(sample_size) {
    validate();
  }

  CovarianceMatrix(MatrixXd values, MatrixXd factor, Index sample_size)
      : values_(std::move(values)), factor_(std::move(factor)), sample_size_(sample_size) {
    validate();
    detail::require(factor_->cols() == values_.cols(), ErrorCode::DimensionMismatch,
                    "low-rank factor must have one column per variable");
    const double scale = std::max(1.0, detail::max_abs(values_));
    const MatrixXd rebuilt = factor_->transpose() * (*factor_);
    detail::require(detail::max_abs(rebuilt - values_) <= 1e-10 * scale, ErrorCode::InvalidCovariance,
                    "low-rank factor does not reproduce the covariance");
  }

  Index dim() const { return values_.rows(); }
  const MatrixXd& values() const { return values_; }
  double operator()(Index i, Index j) const { return values_(i, j); }

  bool has_factor() const { return factor_.has_value(); }
  /// n x p matrix W with values() == W^t W.
  const MatrixXd& factor() const {
    detail::require(factor_.has_value(), ErrorCode::InvalidProblem, "covariance has no low-rank factor");
    return *factor_;
  }
  std::optional<Index> sample_size() const { return sample_size_; }

 private:
  void validate() const {
    detail::require(values_.rows() > 0 && values_.rows() == values_.cols(), ErrorCode::DimensionMismatch,
                    "covariance must be a non-empty square matrix");
    detail::require(values_.allFinite(), ErrorCode::InvalidCovariance, "covariance has non-finite entries");
    const double scale = std::max(1.0, detail::max_abs(values_));
    detail::require(detail::max_abs(values_ - values_.transpose()) <= 1e-12 * scale,
                    ErrorCode::InvalidCovariance, "covariance is not symmetric");
    detail::require((values_.diagonal().array() > 0.0).all(), ErrorCode::InvalidCovariance,
                    "covariance diagonal must be strictly positive");
    if (sample_size_) {
      detail::require(*sample_size_ >= 1, ErrorCode::InvalidCovariance, "sample size must be positive");
    }
  }

  MatrixXd values_;
  std::optional<MatrixXd> factor_;
  std::optional<Index> sample_size_;
};

/// Lower triangular factor L with positive diagonal, stored row by row.
/// Row i (0-based) holds i strictly-lower entries followed by L_ii.
class CholeskyFactor {
 public:
  CholeskyFactor(Index dim, std::vector<double> packed) : dim_(dim), packed_(std::move(packed)) {
    detail::require(dim_ >= 1, ErrorCode::DimensionMismatch, "factor dimension must be positive");
    detail::require(packed_.size() == detail::packed_offset(dim_), ErrorCode::DimensionMismatch,
                    "packed factor has the wrong length");
    for (Index i = 0; i < dim_; ++i) {
      const auto r = row(i);
      detail::require(std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); }),
                      ErrorCode::InvalidProblem, "factor entries must be finite");
      detail::require(r.back() > 0.0, ErrorCode::InvalidProblem, "factor diagonal must be strictly positive");
    }
  }

  static CholeskyFactor identity(Index dim) {
    std::vector<double> packed(detail::packed_offset(dim), 0.0);
    for (Index i = 0; i < dim; ++i) packed[detail::packed_offset(i) + static_cast<std::size_t>(i)] = 1.0;
    return CholeskyFactor(dim, std::move(packed));
  }

  static CholeskyFactor from_dense(const MatrixXd& dense) {
    detail::require(dense.rows() == dense.cols(), ErrorCode::DimensionMismatch, "factor must be square");
    const Index p = dense.rows();
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j)
        detail::require(dense(i, j) == 0.0, ErrorCode::InvalidProblem, "factor must be lower triangular");
    std::vector<double> packed;
    packed.reserve(detail::packed_offset(p));
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j <= i; ++j) packed.push_back(dense(i, j));
    return CholeskyFactor(p, std::move(packed));
  }

  Index dim() const { return dim_; }

  std::span<const double> row(Index i) const {
    return {packed_.data() + detail::packed_offset(i), static_cast<std::size_t>(i + 1)};
  }
  Eigen::Map<const VectorXd> row_vector(Index i) const {
    return Eigen::Map<const VectorXd>(packed_.data() + detail::packed_offset(i), i + 1);
  }

  double operator()(Index i, Index j) const {
    return j > i ? 0.0 : packed_[detail::packed_offset(i) + static_cast<std::size_t>(j)];
  }
  double diagonal(Index i) const { return (*this)(i, i); }

  MatrixXd to_dense() const {
    MatrixXd out = MatrixXd::Zero(dim_, dim_);
    for (Index i = 0; i < dim_; ++i) out.row(i).head(i + 1) = row_vector(i).transpose();
    return out;
  }

  /// Number of strict-lower entries with magnitude above `threshold`.
  Index strict_lower_nonzeros(double threshold = 0.0) const {
    Index count = 0;
    for (Index i = 1; i < dim_; ++i) {
      const auto r = row(i);
      count += std::count_if(r.begin(), r.end() - 1, [&](double v) { return std::abs(v) > threshold; });
    }
    return count;
  }

  const std::vector<double>& packed() const { return packed_; }

 private:
  Index dim_;
  std::vector<double> packed_;
};

/// Omega = T^t D^{-1} T with unit-diagonal lower triangular T.
class ModifiedCholesky {
 public:
  ModifiedCholesky(MatrixXd unit_lower, VectorXd conditional_variances)
      : t_(std::move(unit_lower)), d_(std::move(conditional_variances)) {
    detail::require(t_.rows() == t_.cols() && t_.rows() == d_.size() && d_.size() > 0,
                    ErrorCode::DimensionMismatch, "T must be p x p and D of length p");
    const Index p = t_.rows();
    for (Index i = 0; i < p; ++i) {
      detail::require(t_(i, i) == 1.0, ErrorCode::InvalidProblem, "T must have unit diagonal");
      for (Index j = i + 1; j < p; ++j)
        detail::require(t_(i, j) == 0.0, ErrorCode::InvalidProblem, "T must be lower triangular");
    }
    detail::require(t_.allFinite() && d_.allFinite(), ErrorCode::InvalidProblem, "T and D must be finite");
    detail::require((d_.array() > 0.0).all(), ErrorCode::InvalidProblem, "D must be strictly positive");
  }

  Index dim() const { return d_.size(); }
  const MatrixXd& t() const { return t_; }
  const VectorXd& d() const { return d_; }

  MatrixXd precision() const { return t_.transpose() * d_.cwiseInverse().asDiagonal() * t_; }

 private:
  MatrixXd t_;
  VectorXd d_;
};

/// Either one lambda for every row or a per-row vector.
class PenaltySpec {
 public:
  static PenaltySpec uniform(double lambda) {
    detail::require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::InvalidConfig,
                    "penalty must be finite and non-negative");
    PenaltySpec spec;
    spec.scalar_ = lambda;
    return spec;
  }

  static PenaltySpec per_row(std::vector<double> lambdas) {
    detail::require(!lambdas.empty(), ErrorCode::InvalidConfig, "per-row penalty must not be empty");
    for (double v : lambdas)
      detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidConfig,
                      "penalty must be finite and non-negative");
    PenaltySpec spec;
    spec.per_row_ = std::move(lambdas);
    return spec;
  }

  bool is_uniform() const { return per_row_.empty(); }
  double scalar() const { return scalar_; }
  const std::vector<double>& values() const { return per_row_; }

  double for_row(Index i) const { return is_uniform() ? scalar_ : per_row_[static_cast<std::size_t>(i)]; }

  void check_dimension(Index p) const {
    detail::require(is_uniform() || static_cast<Index>(per_row_.size()) == p, ErrorCode::DimensionMismatch,
                    "per-row penalty length must equal the dimension");
  }

 private:
  PenaltySpec() = default;
  double scalar_ = 0.0;
  std::vector<double> per_row_;
};

struct CovarianceOptions {
  bool center = false;
  bool scale = false;
  /// Divide by n - 1 instead of n.
  bool unbiased = false;
};

/// S = (1/n) X^t X of the (optionally centered/scaled) data. The returned
/// matrix carries W = X / sqrt(n) as its low-rank factor.
inline CovarianceMatrix sample_covariance(const DataMatrix& data, const CovarianceOptions& opts = {}) {
  const Index n = data.samples();
  MatrixXd x = data.values();
  const VectorXd mean = x.colwise().mean().transpose();
  if (opts.scale) {
    const VectorXd sd =
        ((x.rowwise() - mean.transpose()).array().square().colwise().sum() / static_cast<double>(n))
            .sqrt()
            .transpose();
    detail::require((sd.array() > 0.0).all(), ErrorCode::ZeroVarianceColumn,
                    "cannot scale a column with zero standard deviation");
    if (opts.center) x.rowwise() -= mean.transpose();
    x = x * sd.cwiseInverse().asDiagonal();
  } else if (opts.center) {
    x.rowwise() -= mean.transpose();
  }
  const double denom = opts.unbiased ? static_cast<double>(n - 1) : static_cast<double>(n);
  detail::require(denom > 0.0, ErrorCode::InvalidData, "unbiased covariance needs at least two samples");
  MatrixXd factor = x / std::sqrt(denom);
  MatrixXd values = factor.transpose() * factor;
  // Exact symmetry; the product is symmetric only up to rounding.
  values = 0.5 * (values + values.transpose()).eval();
  return CovarianceMatrix(std::move(values), std::move(factor), n);
}

/// L = D^{-1/2} T, i.e. D_ii = 1 / L_ii^2 and T_ij = L_ij / L_ii.
inline ModifiedCholesky to_modified_cholesky(const CholeskyFactor& factor) {
  const Index p = factor.dim();
  MatrixXd t = MatrixXd::Zero(p, p);
  VectorXd d(p);
  for (Index i = 0; i < p; ++i) {
    const double lii = factor.diagonal(i);
    for (Index j = 0; j < i; ++j) t(i, j) = factor(i, j) / lii;
    t(i, i) = 1.0;
    d(i) = 1.0 / (lii * lii);
  }
  return ModifiedCholesky(std::move(t), std::move(d));
}

inline CholeskyFactor from_modified_cholesky(const ModifiedCholesky& td) {
  const Index p = td.dim();
  std::vector<double> packed;
  packed.reserve(detail::packed_offset(p));
  for (Index i = 0; i < p; ++i) {
    const double inv_sd = 1.0 / std::sqrt(td.d()(i));
    for (Index j = 0; j < i; ++j) packed.push_back(td.t()(i, j) * inv_sd);
    packed.push_back(inv_sd);
  }
  return CholeskyFactor(p, std::move(packed));
}

/// Omega = L^t L.
inline MatrixXd precision_from_factor(const CholeskyFactor& factor) {
  const MatrixXd l = factor.to_dense();
  MatrixXd omega = l.transpose() * l;
  return 0.5 * (omega + omega.transpose());
}

/// Quadratic form eta^t S_i eta for the leading (i+1) x (i+1) block of S.
inline double leading_quadratic_form(const CovarianceMatrix& s, const Eigen::Ref<const VectorXd>& eta) {
  const Index k = eta.size();
  if (s.has_factor() && s.factor().rows() < k) {
    return (s.factor().leftCols(k) * eta).squaredNorm();
  }
  return eta.dot(s.values().topLeftCorner(k, k).selfadjointView<Eigen::Lower>() * eta);
}

/// Row term eta^t S_i eta - 2 log eta_i + lambda * sum_{j<i} |eta_j|.
inline double cscs_row_objective(const CovarianceMatrix& s, const Eigen::Ref<const VectorXd>& eta, double lambda) {
  const Index k = eta.size();
  const double diag = eta(k - 1);
  const double l1 = eta.head(k - 1).cwiseAbs().sum();
  return leading_quadratic_form(s, eta) - 2.0 * std::log(diag) + lambda * l1;
}

/// tr(L^t L S) - 2 log|L| + penalty on the strict lower triangle, summed row by row.
inline double cscs_objective(const CholeskyFactor& factor, const CovarianceMatrix& s, const PenaltySpec& pen) {
  detail::require(factor.dim() == s.dim(), ErrorCode::DimensionMismatch, "factor and covariance dimensions differ");
  pen.check_dimension(s.dim());
  double total = 0.0;
  for (Index i = 0; i < factor.dim(); ++i) total += cscs_row_objective(s, factor.row_vector(i), pen.for_row(i));
  return total;
}

}  // namespace cscs
