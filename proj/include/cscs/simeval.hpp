#pragma once

// Synthetic sparse-DAG models, Gaussian sampling and evaluation metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include "cscs/covmodel.hpp"
#include "cscs/error.hpp"
#include "cscs/rng.hpp"

namespace cscs {

/// Strict-lower position (row, col) with col < row.
using Edge = std::pair<Index, Index>;

/// Compensated running sum.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double mean_of(const std::vector<double>& v) {
  KahanSum s;
  for (double x : v) s.add(x);
  return v.empty() ? 0.0 : s.value() / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  KahanSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(v.size() - 1));
}

struct GroundTruthModel {
  ModifiedCholesky params;
  MatrixXd precision;
  std::vector<Edge> edges;
  std::uint64_t seed = 0;
};

struct ModelConfig {
  Index dim = 0;
  double zero_fraction = 0.98;
  double coef_lo = 0.3;
  double coef_hi = 0.7;
  double d_lo = 2.0;
  double d_hi = 5.0;
};

/// Draws T0 with exactly round(zero_fraction * p(p-1)/2) zero strict-lower
/// entries (positions chosen uniformly without replacement); the others are
/// Uniform[coef_lo, coef_hi] with a fair random sign. D0 is
/// Uniform[d_lo, d_hi]. Draw order: shuffle of positions, then coefficients
/// and signs in row-major order of the kept positions, then D0.
inline GroundTruthModel generate_model(const ModelConfig& cfg, std::uint64_t seed) {
  const Index p = cfg.dim;
  detail::require(p >= 2, ErrorCode::DegenerateConfig, "model needs at least two variables");
  detail::require(cfg.zero_fraction > 0.0 && cfg.zero_fraction < 1.0, ErrorCode::DegenerateConfig,
                  "zero fraction must lie in (0, 1)");
  detail::require(cfg.coef_lo > 0.0 && cfg.coef_lo <= cfg.coef_hi, ErrorCode::DegenerateConfig,
                  "coefficient range must satisfy 0 < lo <= hi");
  detail::require(cfg.d_lo > 0.0 && cfg.d_lo <= cfg.d_hi, ErrorCode::DegenerateConfig,
                  "D range must satisfy 0 < lo <= hi");

  std::vector<Edge> positions;
  for (Index i = 1; i < p; ++i)
    for (Index j = 0; j < i; ++j) positions.emplace_back(i, j);
  const auto total = static_cast<Index>(positions.size());
  const auto zeros = static_cast<Index>(std::llround(cfg.zero_fraction * static_cast<double>(total)));
  detail::require(zeros < total, ErrorCode::DegenerateConfig, "zero fraction leaves no edges");

  Rng rng(seed);
  rng.shuffle(std::span<Edge>(positions));
  std::vector<Edge> edges(positions.begin() + zeros, positions.end());
  std::sort(edges.begin(), edges.end());

  MatrixXd t = MatrixXd::Identity(p, p);
  for (const auto& [i, j] : edges) {
    const double magnitude = rng.uniform(cfg.coef_lo, cfg.coef_hi);
    t(i, j) = rng.coin() ? magnitude : -magnitude;
  }
  VectorXd d(p);
  for (Index i = 0; i < p; ++i) d(i) = rng.uniform(cfg.d_lo, cfg.d_hi);

  ModifiedCholesky params(std::move(t), std::move(d));
  MatrixXd precision = params.precision();
  return {std::move(params), std::move(precision), std::move(edges), seed};
}

/// n draws from N(0, Omega0^{-1}): each row y solves T0 y = D0^{1/2} z by
/// forward substitution.
inline DataMatrix sample_gaussian(const GroundTruthModel& model, Index n, std::uint64_t seed) {
  detail::require(n >= 1, ErrorCode::InvalidConfig, "sample count must be positive");
  const MatrixXd& t = model.params.t();
  const VectorXd sd = model.params.d().cwiseSqrt();
  const Index p = sd.size();
  MatrixXd out(n, p);
  Rng rng(seed);
  VectorXd y(p);
  for (Index r = 0; r < n; ++r) {
    for (Index i = 0; i < p; ++i) {
      double v = sd(i) * rng.normal();
      for (Index j = 0; j < i; ++j) v -= t(i, j) * y(j);
      y(i) = v;
    }
    out.row(r) = y.transpose();
  }
  return DataMatrix(std::move(out));
}

/// Strict-lower entries of `m` with |m_ij| > threshold.
inline std::vector<Edge> support(const MatrixXd& m, double threshold = 1e-8) {
  std::vector<Edge> out;
  for (Index i = 1; i < m.rows(); ++i)
    for (Index j = 0; j < i; ++j)
      if (std::abs(m(i, j)) > threshold) out.emplace_back(i, j);
  return out;
}

inline std::vector<Edge> support(const CholeskyFactor& factor, double threshold = 1e-8) {
  std::vector<Edge> out;
  for (Index i = 1; i < factor.dim(); ++i)
    for (Index j = 0; j < i; ++j)
      if (std::abs(factor(i, j)) > threshold) out.emplace_back(i, j);
  return out;
}

struct RocPoint {
  double tpr = 0.0;
  double fpr = 0.0;
  double lambda = 0.0;
};

/// Sorted by FPR, one point per distinct FPR.
using RocCurve = std::vector<RocPoint>;

inline RocPoint selection_rates(const std::vector<Edge>& found, const std::vector<Edge>& truth, Index p) {
  detail::require(!truth.empty(), ErrorCode::EmptyTruth, "true edge set is empty");
  const std::set<Edge> truth_set(truth.begin(), truth.end());
  const double candidates = static_cast<double>(p) * static_cast<double>(p - 1) / 2.0;
  const double negatives = candidates - static_cast<double>(truth_set.size());
  Index tp = 0;
  Index fp = 0;
  for (const Edge& e : std::set<Edge>(found.begin(), found.end())) {
    detail::require(e.second < e.first && e.first < p, ErrorCode::DimensionMismatch, "edge outside strict lower triangle");
    if (truth_set.count(e)) ++tp;
    else ++fp;
  }
  RocPoint out;
  out.tpr = static_cast<double>(tp) / static_cast<double>(truth_set.size());
  out.fpr = negatives > 0.0 ? static_cast<double>(fp) / negatives : 0.0;
  return out;
}

/// Sorts by FPR and averages TPR over tied FPR values. With `anchor`, the
/// corners (0, 0) and (1, 1) are added so the curve spans [0, 1].
inline RocCurve make_roc(std::vector<RocPoint> points, bool anchor = true) {
  if (anchor) {
    points.push_back({0.0, 0.0, 0.0});
    points.push_back({1.0, 1.0, 0.0});
  }
  std::stable_sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) { return a.fpr < b.fpr; });
  RocCurve out;
  for (std::size_t i = 0; i < points.size();) {
    std::size_t j = i;
    KahanSum tpr;
    while (j < points.size() && points[j].fpr == points[i].fpr) tpr.add(points[j++].tpr);
    RocPoint merged = points[i];
    merged.tpr = tpr.value() / static_cast<double>(j - i);
    out.push_back(merged);
    i = j;
  }
  return out;
}

/// Trapezoidal area under TPR(FPR) over [fpr_lo, fpr_hi], interpolating
/// linearly at the window edges and holding the end values flat outside the
/// curve's range. Not normalized: the maximum is fpr_hi - fpr_lo.
inline double auc_windowed(const RocCurve& curve, double fpr_lo, double fpr_hi) {
  detail::require(curve.size() >= 2, ErrorCode::InsufficientCurve, "ROC curve needs at least two points");
  detail::require(fpr_lo < fpr_hi, ErrorCode::InvalidConfig, "window must satisfy lo < hi");
  for (std::size_t i = 1; i < curve.size(); ++i)
    detail::require(curve[i - 1].fpr <= curve[i].fpr, ErrorCode::InsufficientCurve, "ROC curve must be sorted by FPR");

  auto tpr_at = [&](double f) {
    if (f <= curve.front().fpr) return curve.front().tpr;
    if (f >= curve.back().fpr) return curve.back().tpr;
    const auto it = std::upper_bound(curve.begin(), curve.end(), f,
                                     [](double v, const RocPoint& pt) { return v < pt.fpr; });
    const RocPoint& b = *it;
    const RocPoint& a = *(it - 1);
    if (b.fpr == a.fpr) return b.tpr;
    return a.tpr + (b.tpr - a.tpr) * (f - a.fpr) / (b.fpr - a.fpr);
  };

  std::vector<double> knots{fpr_lo};
  for (const RocPoint& pt : curve)
    if (pt.fpr > fpr_lo && pt.fpr < fpr_hi) knots.push_back(pt.fpr);
  knots.push_back(fpr_hi);
  KahanSum area;
  for (std::size_t i = 1; i < knots.size(); ++i)
    area.add(0.5 * (tpr_at(knots[i - 1]) + tpr_at(knots[i])) * (knots[i] - knots[i - 1]));
  return area.value();
}

inline double frobenius_error(const MatrixXd& truth, const MatrixXd& estimate) {
  detail::require(truth.rows() == estimate.rows() && truth.cols() == estimate.cols(), ErrorCode::DimensionMismatch,
                  "matrices must have the same shape");
  KahanSum s;
  for (Index j = 0; j < truth.cols(); ++j)
    for (Index i = 0; i < truth.rows(); ++i) {
      const double d = truth(i, j) - estimate(i, j);
      s.add(d * d);
    }
  return std::sqrt(s.value());
}

/// Gaussian log-likelihood of the rows of `test` under mean `mean` and
/// precision L^t L; the quadratic form is ||L (y - mu)||^2.
inline double gaussian_loglik(const DataMatrix& test, const VectorXd& mean, const CholeskyFactor& factor) {
  const Index p = factor.dim();
  detail::require(test.variables() == p && mean.size() == p, ErrorCode::DimensionMismatch,
                  "test data, mean and factor dimensions differ");
  const MatrixXd l = factor.to_dense();
  double logdet = 0.0;
  for (Index i = 0; i < p; ++i) logdet += 2.0 * std::log(factor.diagonal(i));
  const double log2pi = std::log(2.0 * std::numbers::pi);
  KahanSum total;
  for (Index r = 0; r < test.samples(); ++r) {
    const VectorXd centered = test.values().row(r).transpose() - mean;
    const double quad = (l.triangularView<Eigen::Lower>() * centered).squaredNorm();
    total.add(0.5 * (logdet - quad - static_cast<double>(p) * log2pi));
  }
  return total.value();
}

/// E(y2 | y1) = mu2 + Sigma21 Sigma11^{-1} (y1 - mu1), where y1 is the first
/// `split` coordinates.
inline VectorXd conditional_forecast(const VectorXd& mean, const MatrixXd& sigma, Index split, const VectorXd& observed) {
  const Index p = mean.size();
  detail::require(sigma.rows() == p && sigma.cols() == p, ErrorCode::DimensionMismatch, "covariance shape mismatch");
  detail::require(split >= 1 && split < p, ErrorCode::DimensionMismatch, "split must lie in [1, p)");
  detail::require(observed.size() == split, ErrorCode::DimensionMismatch, "observed block has the wrong length");
  const Eigen::LLT<MatrixXd> llt(sigma.topLeftCorner(split, split));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularBlock, "leading covariance block is not positive definite");
  const VectorXd weights = llt.solve(observed - mean.head(split));
  return mean.tail(p - split) + sigma.bottomLeftCorner(p - split, split) * weights;
}

/// Mean absolute error per column across rows.
inline VectorXd forecast_error(const MatrixXd& predictions, const MatrixXd& actuals) {
  detail::require(predictions.rows() == actuals.rows() && predictions.cols() == actuals.cols() && actuals.rows() > 0,
                  ErrorCode::DimensionMismatch, "predictions and actuals must have the same non-empty shape");
  VectorXd out(actuals.cols());
  for (Index t = 0; t < actuals.cols(); ++t) {
    KahanSum s;
    for (Index i = 0; i < actuals.rows(); ++i) s.add(std::abs(predictions(i, t) - actuals(i, t)));
    out(t) = s.value() / static_cast<double>(actuals.rows());
  }
  return out;
}

}  // namespace cscs
