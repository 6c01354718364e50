#pragma once

// The Poincare family on the upper half-plane:
//   p_theta(x, y) = (D e^{2D} / pi) exp(-(a(x^2 + y^2) + 2bx + c) / y) / y^2,  D = sqrt(ac - b^2).
// Natural parameter theta = [[a, b], [b, c]], sufficient statistic
// t(z) = -(1/y) [[x^2 + y^2, x], [x, 1]], pairing <theta, t> = tr(theta t).

#include <Eigen/Dense>
#include <array>
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

namespace hyperstat::poincare {

struct CumulantPair {
  double full = 0.0;
  double reduced = 0.0;
};

using Tensor3 = std::array<Eigen::Matrix3d, 3>;

/// Sufficient statistic in vector form -((x^2 + y^2)/y, x/y, 1/y).
inline Eigen::Vector3d sufficient_stat(const UpperHalfPoint& z) {
  const double x = z.x(), y = z.y();
  return {-(x * x + y * y) / y, -x / y, -1.0 / y};
}

/// Sufficient statistic as a 2x2 matrix; negative definite with determinant 1.
inline Moment2 sufficient_stat_matrix(const UpperHalfPoint& z) {
  const double x = z.x(), y = z.y();
  return {-(x * x + y * y) / y, -x / y, -1.0 / y};
}

/// <theta, t> = a t1 + 2 b t2 + c t3 (the off-diagonal entry counts twice).
inline double pairing(const SpdParam2& theta, const Eigen::Vector3d& t) {
  return theta.a() * t(0) + 2.0 * theta.b() * t(1) + theta.c() * t(2);
}

inline double pairing(const SpdParam2& theta, const Moment2& eta) {
  return theta.a() * eta.e11 + 2.0 * theta.b() * eta.e12 + theta.c() * eta.e22;
}

inline CumulantPair cumulant(const SpdParam2& theta) {
  const double D = theta.sqrt_det();
  const double reduced = -0.5 * std::log(theta.det()) - 2.0 * D;
  return {reduced + std::log(std::numbers::pi), reduced};
}

/// Log-density with respect to dx dy.
inline double log_density(const SpdParam2& theta, const UpperHalfPoint& z) {
  const double x = z.x(), y = z.y();
  const double D = theta.sqrt_det();
  const double q = (theta.a() * (x * x + y * y) + 2.0 * theta.b() * x + theta.c()) / y;
  return std::log(D) + 2.0 * D - std::log(std::numbers::pi) - q - 2.0 * std::log(y);
}

/// Log-density with respect to the invariant measure dx dy / y^2.
inline double log_density_invariant(const SpdParam2& theta, const UpperHalfPoint& z) {
  return log_density(theta, z) + 2.0 * std::log(z.y());
}

/// eta = grad F(theta) = -(1/2 + D) theta^{-1}.
inline Moment2 grad_cumulant(const SpdParam2& theta) {
  const double D = theta.sqrt_det();
  const double s = -(0.5 + D) / theta.det();
  return {s * theta.c(), -s * theta.b(), s * theta.a()};
}

namespace detail {

// sqrt|eta| - 1 for a realizable moment; throws otherwise.
inline double dual_excess(const Moment2& eta) {
  if (!std::isfinite(eta.e11) || !std::isfinite(eta.e12) || !std::isfinite(eta.e22)) {
    throw dual_domain_error("moment parameter has a non-finite entry");
  }
  if (!eta.negative_definite()) throw dual_domain_error("moment parameter is not negative definite");
  const double det = eta.det();
  const double excess = (det - 1.0) / (std::sqrt(det) + 1.0);
  // below the cancellation error of det the moment is indistinguishable from a single point
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(eta.e11 * eta.e22) + eta.e12 * eta.e12);
  if (!(det - 1.0 > noise) || !std::isfinite(1.0 / excess)) {
    throw dual_domain_error("moment parameter requires |eta| > 1 (points coincide?)");
  }
  return excess;
}

}  // namespace detail

/// Reduced convex conjugate F*(eta) = -1 + log D, D = 1 / (2 (sqrt|eta| - 1)).
inline double conjugate(const Moment2& eta) {
  const double excess = detail::dual_excess(eta);
  return -1.0 - std::log(2.0 * excess);
}

/// Full conjugate (dual of the full cumulant); differs from the reduced one by -log pi.
inline double conjugate_full(const Moment2& eta) { return conjugate(eta) - std::log(std::numbers::pi); }

/// theta = grad F*(eta) = -(1/2 + D) eta^{-1}.
inline SpdParam2 grad_conjugate(const Moment2& eta) {
  const double excess = detail::dual_excess(eta);
  const double D = 0.5 / excess;
  const double s = -(0.5 + D) / eta.det();
  return {s * eta.e22, -s * eta.e12, s * eta.e11};
}

/// Hessian of the conjugate in the dual coordinates (e11, 2 e12, e22).
inline Eigen::Matrix3d conjugate_hessian(const Moment2& eta) {
  detail::dual_excess(eta);
  const Eigen::Vector3d e = eta.coords();
  const double v = eta.det();
  const double sv = std::sqrt(v);
  const double w = v - sv;
  const double g1 = -0.5 / w;
  const double g2 = 0.5 * (1.0 - 0.5 / sv) / (w * w);
  const Eigen::Vector3d grad(e(2), -0.5 * e(1), e(0));
  Eigen::Matrix3d hess;
  hess << 0.0, 0.0, 1.0, 0.0, -0.5, 0.0, 1.0, 0.0, 0.0;
  return g2 * grad * grad.transpose() + g1 * hess;
}

/// F(theta) + F*(eta') - <theta, eta'>.
inline double fenchel_young(const SpdParam2& theta, const Moment2& eta2) {
  return cumulant(theta).reduced + conjugate(eta2) - pairing(theta, eta2);
}

/// B_F(theta' : theta) = F(theta') - F(theta) - <theta' - theta, grad F(theta)>.
inline double bregman(const SpdParam2& theta2, const SpdParam2& theta) {
  const Moment2 eta = grad_cumulant(theta);
  return cumulant(theta2).reduced - cumulant(theta).reduced - (pairing(theta2, eta) - pairing(theta, eta));
}

inline double kld(const SpdParam2& theta, const SpdParam2& theta2) {
  const InvariantTriple s = poincare_invariant(theta, theta2);
  const double D = std::sqrt(s.s1), D2 = std::sqrt(s.s2);
  return 0.5 * std::log(s.s1 / s.s2) + 2.0 * (D - D2) + (0.5 + D) * (s.s3 - 2.0);
}

inline double hellinger_sq(const SpdParam2& theta, const SpdParam2& theta2) {
  const double d1 = theta.det(), d2 = theta2.det();
  const double ds = combine(1.0, theta, 1.0, theta2).det();
  const double log_bc =
      std::log(2.0) + 0.25 * (std::log(d1) + std::log(d2)) + std::sqrt(d1) + std::sqrt(d2) - 0.5 * std::log(ds) -
      std::sqrt(ds);
  return -std::expm1(log_bc);
}

/// Neyman chi-squared; +infinity when 2 theta' - theta leaves the cone.
inline double neyman_chi2(const SpdParam2& theta, const SpdParam2& theta2) {
  if (!combination_in_cone(2.0, theta2, -1.0, theta)) return std::numeric_limits<double>::infinity();
  const double d1 = theta.det(), d2 = theta2.det();
  const double dm = combine(2.0, theta2, -1.0, theta).det();
  const double log_ratio = std::log(d2) + 4.0 * std::sqrt(d2) - 0.5 * std::log(d1) - 0.5 * std::log(dm) -
                           2.0 * (std::sqrt(d1) + std::sqrt(dm));
  return std::expm1(log_ratio);
}

inline double jeffreys(const SpdParam2& theta, const SpdParam2& theta2) {
  return kld(theta, theta2) + kld(theta2, theta);
}

/// (1-alpha) F(theta) + alpha F(theta') - F((1-alpha) theta + alpha theta').
inline double skew_jensen(const SpdParam2& theta, const SpdParam2& theta2, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("skew_jensen: alpha must lie in (0, 1)");
  const double d1 = theta.det(), d2 = theta2.det();
  const double dm = combine(1.0 - alpha, theta, alpha, theta2).det();
  return 0.5 * (std::log(dm) - (1.0 - alpha) * std::log(d1) - alpha * std::log(d2)) +
         2.0 * (std::sqrt(dm) - ((1.0 - alpha) * std::sqrt(d1) + alpha * std::sqrt(d2)));
}

/// skew_jensen(theta, theta', eps) / (eps (1 - eps)), which tends to kld(theta, theta') as eps -> 0.
inline double kld_via_skew_limit(const SpdParam2& theta, const SpdParam2& theta2, double eps = 0.01) {
  return skew_jensen(theta, theta2, eps) / (eps * (1.0 - eps));
}

/// Chernoff information: maximum over alpha of the skew Jensen value.
inline Extremum chernoff(const SpdParam2& theta, const SpdParam2& theta2) {
  constexpr double edge = 1e-12;
  const Extremum m = golden_section_minimize(
      [&](double a) { return -skew_jensen(theta, theta2, a); }, edge, 1.0 - edge, 1e-9);
  return {m.x, -m.value};
}

/// E[log y] = log(D / a) - e^{4D} E_1(4D).
inline double expected_log_y(const SpdParam2& theta) {
  const double D = theta.sqrt_det();
  return std::log(D / theta.a()) - exp_gamma0(4.0 * D);
}

/// Differential entropy with respect to dx dy.
inline double entropy(const SpdParam2& theta) {
  const double D = theta.sqrt_det();
  return 1.0 + std::log(std::numbers::pi * D) - 2.0 * std::log(theta.a()) - 2.0 * exp_gamma0(4.0 * D);
}

/// Entropy with respect to the invariant measure dx dy / y^2.
inline double modified_entropy(const SpdParam2& theta) {
  return 1.0 + std::log(std::numbers::pi) - 0.5 * std::log(theta.det());
}

namespace detail {

struct DetDerivatives {
  Eigen::Vector3d grad;  // of u = ac - b^2 in (a, b, c)
  Eigen::Matrix3d hess;
  double f1, f2, f3;     // d^k/du^k of -log(u)/2 - 2 sqrt(u)
};

inline DetDerivatives det_derivatives(const SpdParam2& theta) {
  const double u = theta.det();
  const double su = std::sqrt(u);
  DetDerivatives out;
  out.grad = {theta.c(), -2.0 * theta.b(), theta.a()};
  out.hess << 0.0, 0.0, 1.0, 0.0, -2.0, 0.0, 1.0, 0.0, 0.0;
  out.f1 = -0.5 / u - 1.0 / su;
  out.f2 = 0.5 / (u * u) + 0.5 / (u * su);
  out.f3 = -1.0 / (u * u * u) - 0.75 / (u * u * su);
  return out;
}

}  // namespace detail

/// Fisher information: the Hessian of the cumulant in (a, b, c).
inline Eigen::Matrix3d fim(const SpdParam2& theta) {
  const auto d = detail::det_derivatives(theta);
  return d.f2 * d.grad * d.grad.transpose() + d.f1 * d.hess;
}

/// Third derivative tensor of the cumulant in (a, b, c); result[i](j, k) = T_ijk.
inline Tensor3 cubic_tensor(const SpdParam2& theta) {
  const auto d = detail::det_derivatives(theta);
  Tensor3 t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const auto& g = d.grad;
        const auto& h = d.hess;
        t[i](j, k) = d.f3 * g(i) * g(j) * g(k) + d.f2 * (h(i, j) * g(k) + h(i, k) * g(j) + h(j, k) * g(i));
      }
    }
  }
  return t;
}

/// Average sufficient statistic with compensated sums.
inline Moment2 mean_statistic(std::span<const UpperHalfPoint> points) {
  if (points.empty()) throw dual_domain_error("mle: empty sample");
  CompensatedSum s11, s12, s22;
  for (const auto& z : points) {
    const Moment2 t = sufficient_stat_matrix(z);
    s11.add(t.e11);
    s12.add(t.e12);
    s22.add(t.e22);
  }
  const double n = static_cast<double>(points.size());
  return {s11.value() / n, s12.value() / n, s22.value() / n};
}

/// Maximum likelihood estimate theta = grad F*(mean t).
inline SpdParam2 mle(std::span<const UpperHalfPoint> points) {
  if (points.size() < 2) throw dual_domain_error("mle: at least 2 distinct points required");
  return grad_conjugate(mean_statistic(points));
}

inline SpdParam2 mle(const std::vector<UpperHalfPoint>& points) { return mle(std::span<const UpperHalfPoint>(points)); }

/// Mean log-density of a sample.
inline double average_log_likelihood(const SpdParam2& theta, std::span<const UpperHalfPoint> points) {
  CompensatedSum s;
  for (const auto& z : points) s.add(log_density(theta, z));
  return s.value() / static_cast<double>(points.size());
}

}  // namespace hyperstat::poincare
