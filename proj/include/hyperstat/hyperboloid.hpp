#pragma once

// The hyperboloid family on L^d, written in chart coordinates x = (x_1, ..., x_d):
//   p_theta(x) = c_d(|theta|) exp(-[theta, x~]) / sqrt(1 + |x|^2),
//   c_d(t) = t^nu / (2 (2 pi)^nu K_nu(t)),  nu = (d - 1) / 2.
// Sufficient statistic t(x) = (-x~_0, x_1, ..., x_d) so that <theta, t(x)> = -[theta, x~].

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "hyperstat/errors.hpp"
#include "hyperstat/geometry.hpp"
#include "hyperstat/numerics.hpp"
#include "hyperstat/specfun.hpp"

namespace hyperstat::hyperboloid {

inline double bessel_order(int d) { return 0.5 * (d - 1); }

/// log c_d(t)
inline double log_normalizer(int d, double t) {
  const double nu = bessel_order(d);
  return nu * std::log(t) - std::log(2.0) - nu * std::log(2.0 * std::numbers::pi) - bessel_k(nu, t).log_value;
}

/// F(theta) = -log c_d(|theta|).
inline double cumulant(const LorentzParam& theta) { return -log_normalizer(theta.d(), theta.minkowski_norm()); }

/// -log t - t + log(2 pi); the d = 2 specialization.
inline double cumulant_d2(const LorentzParam& theta) {
  if (theta.d() != 2) throw unsupported_dimension("cumulant_d2: d = 2 required");
  const double t = theta.minkowski_norm();
  return -std::log(t) - t + std::log(2.0 * std::numbers::pi);
}

/// dF/dt = -K_{nu+1}(t) / K_nu(t).
inline double cumulant_radial_derivative(int d, double t) { return -bessel_k_ratio(bessel_order(d), t); }

inline Eigen::VectorXd sufficient_stat(const HyperboloidPoint& p) {
  Eigen::VectorXd t = p.lift();
  t(0) = -t(0);
  return t;
}

inline double log_density(const LorentzParam& theta, const HyperboloidPoint& p) {
  if (theta.d() != p.d()) throw dimension_mismatch("hyperboloid log_density: dimension mismatch");
  const Eigen::VectorXd xt = p.lift();
  return log_normalizer(theta.d(), theta.minkowski_norm()) - minkowski_inner(theta.theta(), xt) -
         0.5 * std::log1p(p.chart().squaredNorm());
}

/// Log-density with respect to the invariant measure dx / sqrt(1 + |x|^2).
inline double log_density_invariant(const LorentzParam& theta, const HyperboloidPoint& p) {
  return log_density(theta, p) + 0.5 * std::log1p(p.chart().squaredNorm());
}

namespace detail {

inline Eigen::VectorXd minkowski_dual(const Eigen::VectorXd& v) {
  Eigen::VectorXd g = -v;
  g(0) = v(0);
  return g;
}

}  // namespace detail

/// grad F(theta) = F'(t) G theta / t, t = |theta|; equals E[t(x)].
inline Eigen::VectorXd grad_cumulant(const LorentzParam& theta) {
  const double t = theta.minkowski_norm();
  return (cumulant_radial_derivative(theta.d(), t) / t) * detail::minkowski_dual(theta.theta());
}

/// Hessian of the cumulant (Fisher information) for any d.
inline Eigen::MatrixXd fim(const LorentzParam& theta) {
  const int d = theta.d();
  const double t = theta.minkowski_norm();
  const double nu = bessel_order(d);
  const double r = bessel_k_ratio(nu, t);
  const double f1 = -r;
  const double f2 = 1.0 + (2.0 * nu + 1.0) * r / t - r * r;
  const Eigen::VectorXd g = detail::minkowski_dual(theta.theta());
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(d + 1, d + 1);
  G.diagonal().tail(d).setConstant(-1.0);
  const Eigen::MatrixXd ggt = g * g.transpose() / (t * t);
  return f2 * ggt + (f1 / t) * (G - ggt);
}

/// The d = 2 closed form [(2 + t) (G theta)(G theta)^T - t^2 (1 + t) G] / t^4.
inline Eigen::Matrix3d fim2(const LorentzParam& theta) {
  if (theta.d() != 2) throw unsupported_dimension("fim2: d = 2 required");
  const double t = theta.minkowski_norm();
  const double t2 = t * t;
  const Eigen::Vector3d g(theta[0], -theta[1], -theta[2]);
  const Eigen::Matrix3d G = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  return ((2.0 + t) * g * g.transpose() - t2 * (1.0 + t) * G) / (t2 * t2);
}

/// Bregman divergence F(theta') - F(theta) - <grad F(theta), theta' - theta>.
inline double kld(const LorentzParam& theta, const LorentzParam& theta2) {
  if (theta.d() != theta2.d()) throw dimension_mismatch("kld: dimension mismatch");
  const double t = theta.minkowski_norm();
  const double slope = cumulant_radial_derivative(theta.d(), t) / t;
  const double cross = minkowski_inner(theta.theta(), theta2.theta()) - theta.minkowski_sq();
  return cumulant(theta2) - cumulant(theta) - slope * cross;
}

/// log(|theta| / |theta'|) - |theta'| + [theta, theta'] / [theta, theta] + [theta, theta'] / |theta| - 1.
inline double kld_d2(const LorentzParam& theta, const LorentzParam& theta2) {
  if (theta.d() != 2 || theta2.d() != 2) throw unsupported_dimension("kld_d2: d = 2 required");
  const InvariantTriple s = lorentz_invariant(theta, theta2);
  const double t = std::sqrt(s.s1), t2 = std::sqrt(s.s2);
  return std::log(t / t2) - t2 + s.s3 / s.s1 + s.s3 / t - 1.0;
}

inline double hellinger_sq(const LorentzParam& theta, const LorentzParam& theta2) {
  if (theta.d() != theta2.d()) throw dimension_mismatch("hellinger_sq: dimension mismatch");
  const int d = theta.d();
  const double half_sum = 0.5 * combine(1.0, theta, 1.0, theta2).minkowski_norm();
  const double log_bc = 0.5 * (log_normalizer(d, theta.minkowski_norm()) + log_normalizer(d, theta2.minkowski_norm())) -
                        log_normalizer(d, half_sum);
  return -std::expm1(log_bc);
}

/// Neyman chi-squared; +infinity when 2 theta' - theta leaves the cone.
inline double neyman_chi2(const LorentzParam& theta, const LorentzParam& theta2) {
  if (theta.d() != theta2.d()) throw dimension_mismatch("neyman_chi2: dimension mismatch");
  if (!combination_in_cone(2.0, theta2, -1.0, theta)) return std::numeric_limits<double>::infinity();
  const int d = theta.d();
  const double tm = combine(2.0, theta2, -1.0, theta).minkowski_norm();
  const double log_ratio = 2.0 * log_normalizer(d, theta2.minkowski_norm()) -
                           log_normalizer(d, theta.minkowski_norm()) - log_normalizer(d, tm);
  return std::expm1(log_ratio);
}

inline double jeffreys(const LorentzParam& theta, const LorentzParam& theta2) {
  return kld(theta, theta2) + kld(theta2, theta);
}

/// (1-alpha) F(theta) + alpha F(theta') - F((1-alpha) theta + alpha theta').
inline double skew_jensen(const LorentzParam& theta, const LorentzParam& theta2, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("skew_jensen: alpha must lie in (0, 1)");
  if (theta.d() != theta2.d()) throw dimension_mismatch("skew_jensen: dimension mismatch");
  return (1.0 - alpha) * cumulant(theta) + alpha * cumulant(theta2) - cumulant(combine(1.0 - alpha, theta, alpha, theta2));
}

inline double kld_via_skew_limit(const LorentzParam& theta, const LorentzParam& theta2, double eps = 0.01) {
  return skew_jensen(theta, theta2, eps) / (eps * (1.0 - eps));
}

inline Extremum chernoff(const LorentzParam& theta, const LorentzParam& theta2) {
  constexpr double edge = 1e-12;
  const Extremum m = golden_section_minimize(
      [&](double a) { return -skew_jensen(theta, theta2, a); }, edge, 1.0 - edge, 1e-9);
  return {m.x, -m.value};
}

/// Entropy with respect to the invariant measure, d = 2: 1 + log(2 pi / |theta|).
inline double modified_entropy2(const LorentzParam& theta) {
  if (theta.d() != 2) throw unsupported_dimension("modified_entropy2: d = 2 required");
  return 1.0 + std::log(2.0 * std::numbers::pi) - std::log(theta.minkowski_norm());
}

/// Solves grad F(theta) = eta. Requires eta_0 < 0 and [eta, eta] > 1.
inline LorentzParam grad_conjugate(const Eigen::VectorXd& eta) {
  if (eta.size() < 3) throw unsupported_dimension("grad_conjugate: d >= 2 required");
  if (!eta.allFinite()) throw dual_domain_error("moment parameter has a non-finite entry");
  const int d = static_cast<int>(eta.size()) - 1;
  const double q = minkowski_inner(eta, eta);
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * eta.squaredNorm();
  if (!(eta(0) < 0.0) || !(q - 1.0 > noise)) {
    throw dual_domain_error("moment parameter requires eta_0 < 0 and [eta, eta] > 1 (points coincide?)");
  }
  const double m = std::sqrt(q);
  const double nu = bessel_order(d);
  double t = 0.0;
  if (d == 2) {
    // K_{3/2}/K_{1/2}(t) = 1 + 1/t
    t = 1.0 / ((q - 1.0) / (m + 1.0));
  } else {
    // K_{nu+1}/K_nu decreases from +inf to 1; bracket in log t then bisect.
    auto h = [&](double logt) { return bessel_k_ratio(nu, std::exp(logt)) - m; };
    double lo = 0.0, hi = 0.0;
    while (h(lo) <= 0.0) lo -= 2.0;
    while (h(hi) >= 0.0) {
      hi += 2.0;
      if (hi > 700.0) throw dual_domain_error("moment parameter too close to the boundary");
    }
    t = std::exp(bisect_root(h, lo, hi));
  }
  if (!std::isfinite(t)) throw dual_domain_error("moment parameter too close to the boundary");
  return LorentzParam(Eigen::VectorXd(-(t / m) * detail::minkowski_dual(eta)));
}

inline Eigen::VectorXd mean_statistic(std::span<const HyperboloidPoint> points) {
  if (points.empty()) throw dual_domain_error("mle: empty sample");
  const int d = points.front().d();
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(d + 1));
  for (const auto& p : points) {
    if (p.d() != d) throw dimension_mismatch("mle: mixed dimensions");
    const Eigen::VectorXd t = sufficient_stat(p);
    for (int i = 0; i <= d; ++i) sums[static_cast<std::size_t>(i)].add(t(i));
  }
  Eigen::VectorXd out(d + 1);
  for (int i = 0; i <= d; ++i) out(i) = sums[static_cast<std::size_t>(i)].value() / static_cast<double>(points.size());
  return out;
}

inline LorentzParam mle(std::span<const HyperboloidPoint> points) {
  if (points.size() < 2) throw dual_domain_error("mle: at least 2 distinct points required");
  return grad_conjugate(mean_statistic(points));
}

inline LorentzParam mle(const std::vector<HyperboloidPoint>& points) {
  return mle(std::span<const HyperboloidPoint>(points));
}

inline double average_log_likelihood(const LorentzParam& theta, std::span<const HyperboloidPoint> points) {
  CompensatedSum s;
  for (const auto& p : points) s.add(log_density(theta, p));
  return s.value() / static_cast<double>(points.size());
}

}  // namespace hyperstat::hyperboloid
