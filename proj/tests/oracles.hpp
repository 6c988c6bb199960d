#pragma once

// Test-only reference computations. Nothing here calls into the coordinate
// descent code it is used to check.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Golden-section minimum of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi, int iters = 300) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// h(x) = -2 log x_k + x^t A x + lambda ||x_{<k}||_1, +inf off the domain.
inline double row_value(const MatrixXd& a, double lambda, const VectorXd& x) {
  const auto k = x.size();
  if (!(x(k - 1) > 0.0)) return std::numeric_limits<double>::infinity();
  return -2.0 * std::log(x(k - 1)) + x.dot(a * x) + lambda * x.head(k - 1).cwiseAbs().sum();
}

/// Monotone accelerated proximal gradient with backtracking for
/// smooth(x) + lambda * ||x restricted to `penalized` coordinates||_1.
/// `smooth` must return +inf outside its domain.
struct ProxProblem {
  std::function<double(const VectorXd&)> smooth;
  std::function<VectorXd(const VectorXd&)> gradient;
  double lambda = 0.0;
  Eigen::Index penalized = 0;  // leading coordinates carrying the l1 term
};

inline double prox_value(const ProxProblem& pb, const VectorXd& x) {
  return pb.smooth(x) + pb.lambda * x.head(pb.penalized).cwiseAbs().sum();
}

inline VectorXd prox_step(const ProxProblem& pb, const VectorXd& y, const VectorXd& g, double step) {
  VectorXd z = y - step * g;
  const double t = step * pb.lambda;
  for (Eigen::Index j = 0; j < pb.penalized; ++j) {
    const double v = z(j);
    z(j) = v > t ? v - t : (v < -t ? v + t : 0.0);
  }
  return z;
}

inline VectorXd proximal_gradient(const ProxProblem& pb, VectorXd x, int max_iters = 200000) {
  VectorXd y = x;
  double t = 1.0;
  double step = 1.0;
  double fx = prox_value(pb, x);
  for (int it = 0; it < max_iters; ++it) {
    const VectorXd g = pb.gradient(y);
    const double fy_smooth = pb.smooth(y);
    VectorXd z;
    for (;;) {
      z = prox_step(pb, y, g, step);
      const double fz = pb.smooth(z);
      const VectorXd diff = z - y;
      if (std::isfinite(fz) && fz <= fy_smooth + g.dot(diff) + diff.squaredNorm() / (2.0 * step) + 1e-15) break;
      step *= 0.5;
      if (step < 1e-30) return x;
    }
    const double fz = prox_value(pb, z);
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    VectorXd x_next = fz <= fx ? z : x;
    // Restart momentum whenever the step fails to descend.
    if (fz > fx) {
      y = x;
      t = 1.0;
    } else {
      y = x_next + ((t - 1.0) / t_next) * (x_next - x) + (t / t_next) * (z - x_next);
      t = t_next;
    }
    const double moved = (x_next - x).cwiseAbs().maxCoeff();
    x = x_next;
    fx = std::min(fx, fz);
    step *= 1.5;
    if (it > 100 && moved < 1e-15 && (z - x).cwiseAbs().maxCoeff() < 1e-15) break;
    if (!std::isfinite(prox_value(pb, y))) {
      y = x;
      t = 1.0;
    }
  }
  return x;
}

/// Minimizer of the row objective via proximal gradient; independent of the
/// coordinatewise kernel.
inline VectorXd minimize_row_prox(const MatrixXd& a, double lambda, const VectorXd& start) {
  const auto k = a.rows();
  ProxProblem pb;
  pb.smooth = [&a, k](const VectorXd& x) {
    if (!(x(k - 1) > 0.0)) return std::numeric_limits<double>::infinity();
    return x.dot(a * x) - 2.0 * std::log(x(k - 1));
  };
  pb.gradient = [&a, k](const VectorXd& x) {
    VectorXd g = 2.0 * (a * x);
    g(k - 1) -= 2.0 / x(k - 1);
    return g;
  };
  pb.lambda = lambda;
  pb.penalized = k - 1;
  return proximal_gradient(pb, start);
}

/// Minimizer of phi^t A phi + 2 phi^t b + mu ||phi||_1 via proximal gradient.
inline VectorXd minimize_lasso_prox(const MatrixXd& a, const VectorXd& b, double mu, const VectorXd& start) {
  ProxProblem pb;
  pb.smooth = [&a, &b](const VectorXd& x) { return x.dot(a * x) + 2.0 * x.dot(b); };
  pb.gradient = [&a, &b](const VectorXd& x) { VectorXd g = 2.0 * (a * x + b); return g; };
  pb.lambda = mu;
  pb.penalized = a.rows();
  return proximal_gradient(pb, start);
}

/// Upper-tail standard normal quantile by bisection on erfc.
inline double upper_normal_quantile(double tail) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / std::sqrt(2.0)) > tail) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Random symmetric PSD matrix W^t W with W of shape rank x k.
inline MatrixXd random_psd(Eigen::Index k, Eigen::Index rank, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  MatrixXd w(rank, k);
  for (Eigen::Index i = 0; i < rank; ++i)
    for (Eigen::Index j = 0; j < k; ++j) w(i, j) = z(gen);
  return w.transpose() * w / static_cast<double>(rank);
}

}  // namespace oracle
