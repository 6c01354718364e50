#pragma once

// Points and natural parameters of the two hyperbolic models, the group
// actions acting on them, maximal invariants, and the maps between the
// upper half-plane, the hyperboloid chart and the Poincare disk.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "hyperstat/errors.hpp"
#include "hyperstat/rng.hpp"

namespace hyperstat {

/// Relative tolerance for cone membership: det <= kConeTol * scale^2 is rejected.
inline constexpr double kConeTol = 1e-12;

// ---------------------------------------------------------------------------
// Upper half-plane model

/// Natural parameter of a Poincare distribution: the SPD matrix [[a, b], [b, c]].
class SpdParam2 {
 public:
  SpdParam2(double a, double b, double c) : a_(a), b_(b), c_(c) {
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    std::ostringstream msg;
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
      msg << "SPD cone violation: non-finite entry";
    } else if (!(a > 0.0)) {
      msg << "SPD cone violation: a > 0 fails (a = " << a << ")";
    } else if (!(c > 0.0)) {
      msg << "SPD cone violation: c > 0 fails (c = " << c << ")";
    } else if (!(a * c - b * b > kConeTol * scale * scale)) {
      msg << "SPD cone violation: ac - b^2 > 0 fails (ac - b^2 = " << a * c - b * b << ")";
    } else {
      return;
    }
    throw cone_violation(msg.str());
  }

  static SpdParam2 identity() { return {1.0, 0.0, 1.0}; }

  static SpdParam2 from_matrix(const Eigen::Matrix2d& m, double sym_tol = 1e-12) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (std::abs(m(0, 1) - m(1, 0)) > sym_tol * scale) {
      throw cone_violation("SPD cone violation: matrix is not symmetric");
    }
    return {m(0, 0), m(0, 1), m(1, 1)};
  }

  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double b() const { return b_; }
  [[nodiscard]] double c() const { return c_; }
  /// |theta| = ac - b^2
  [[nodiscard]] double det() const { return a_ * c_ - b_ * b_; }
  /// D = sqrt(|theta|)
  [[nodiscard]] double sqrt_det() const { return std::sqrt(det()); }
  [[nodiscard]] double trace() const { return a_ + c_; }

  [[nodiscard]] Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << a_, b_, b_, c_;
    return m;
  }
  [[nodiscard]] Eigen::Matrix2d inverse() const {
    Eigen::Matrix2d m;
    m << c_, -b_, -b_, a_;
    return m / det();
  }
  /// Coordinates (a, b, c) as used by the Fisher information and cubic tensor.
  [[nodiscard]] Eigen::Vector3d coords() const { return {a_, b_, c_}; }

 private:
  double a_, b_, c_;
};

/// Affine combination s*theta + t*theta'; throws when the result leaves the cone.
inline SpdParam2 combine(double s, const SpdParam2& p, double t, const SpdParam2& q) {
  return {s * p.a() + t * q.a(), s * p.b() + t * q.b(), s * p.c() + t * q.c()};
}

/// Whether s*theta + t*theta' is an interior point of the cone (no throw).
inline bool combination_in_cone(double s, const SpdParam2& p, double t, const SpdParam2& q) {
  const double a = s * p.a() + t * q.a();
  const double b = s * p.b() + t * q.b();
  const double c = s * p.c() + t * q.c();
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  return a > 0.0 && c > 0.0 && a * c - b * b > kConeTol * scale * scale;
}

/// A point z = x + iy of the upper half-plane.
class UpperHalfPoint {
 public:
  UpperHalfPoint(double x, double y) : x_(x), y_(y) {
    if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw std::domain_error("upper half-plane point requires y > 0");
    }
  }
  [[nodiscard]] double x() const { return x_; }
  [[nodiscard]] double y() const { return y_; }
  [[nodiscard]] std::complex<double> z() const { return {x_, y_}; }

 private:
  double x_, y_;
};

/// Moment (dual) parameter eta = grad F(theta): a symmetric 2x2 matrix, negative definite
/// when realizable.
struct Moment2 {
  double e11 = 0.0, e12 = 0.0, e22 = 0.0;

  [[nodiscard]] double det() const { return e11 * e22 - e12 * e12; }
  [[nodiscard]] bool negative_definite() const { return e11 < 0.0 && e22 < 0.0 && det() > 0.0; }
  [[nodiscard]] Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << e11, e12, e12, e22;
    return m;
  }
  /// Vector coordinates dual to (a, b, c): (e11, 2 e12, e22).
  [[nodiscard]] Eigen::Vector3d coords() const { return {e11, 2.0 * e12, e22}; }
};

/// Element of SL(2, R) acting by linear fractional transformations.
class Mobius {
 public:
  Mobius(double g11, double g12, double g21, double g22) : m_() {
    m_ << g11, g12, g21, g22;
    if (std::abs(m_.determinant() - 1.0) > 1e-12) {
      throw std::domain_error("Mobius: determinant must be 1");
    }
  }
  static Mobius identity() { return {1.0, 0.0, 0.0, 1.0}; }
  [[nodiscard]] const Eigen::Matrix2d& matrix() const { return m_; }

 private:
  Eigen::Matrix2d m_;
};

/// z -> (g11 z + g12) / (g21 z + g22)
inline UpperHalfPoint mobius_act_point(const Mobius& g, const UpperHalfPoint& z) {
  const auto& m = g.matrix();
  const std::complex<double> w = (m(0, 0) * z.z() + m(0, 1)) / (m(1, 0) * z.z() + m(1, 1));
  // Im w = y / |cz + d|^2 computed directly so that it stays positive
  const double den = std::norm(m(1, 0) * z.z() + m(1, 1));
  return {w.real(), z.y() / den};
}

/// theta -> g^{-T} theta g^{-1}
inline SpdParam2 mobius_act_param(const Mobius& g, const SpdParam2& theta) {
  const Eigen::Matrix2d ginv = g.matrix().inverse();
  const Eigen::Matrix2d r = ginv.transpose() * theta.matrix() * ginv;
  return {r(0, 0), 0.5 * (r(0, 1) + r(1, 0)), r(1, 1)};
}

/// Random element of SL(2, R): rotation * diag(e^s, e^-s) * rotation * shear, with bounded
/// entries so that invariance checks stay well conditioned.
inline Mobius random_mobius(Rng& rng, double max_log_stretch = 1.0) {
  const double a1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double a2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double s = rng.uniform(-max_log_stretch, max_log_stretch);
  const double sh = rng.uniform(-1.0, 1.0);
  Eigen::Matrix2d r1, r2, d, h;
  r1 << std::cos(a1), -std::sin(a1), std::sin(a1), std::cos(a1);
  r2 << std::cos(a2), -std::sin(a2), std::sin(a2), std::cos(a2);
  d << std::exp(s), 0.0, 0.0, std::exp(-s);
  h << 1.0, sh, 0.0, 1.0;
  const Eigen::Matrix2d g = r1 * d * r2 * h;
  return {g(0, 0), g(0, 1), g(1, 0), g(1, 1)};
}

/// Hyperbolic distance on the upper half-plane.
inline double upper_half_distance(const UpperHalfPoint& p, const UpperHalfPoint& q) {
  const double dx = p.x() - q.x();
  const double dy = p.y() - q.y();
  return std::acosh(1.0 + (dx * dx + dy * dy) / (2.0 * p.y() * q.y()));
}

// ---------------------------------------------------------------------------
// Hyperboloid (Lorentz) model

/// u0 v0 - sum_{i>=1} ui vi
inline double minkowski_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size() || u.size() < 1) {
    throw dimension_mismatch("minkowski_inner: dimension mismatch");
  }
  return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

/// Natural parameter of a hyperboloid distribution on L^d: a vector of the open forward cone.
class LorentzParam {
 public:
  explicit LorentzParam(Eigen::VectorXd theta) : theta_(std::move(theta)) {
    if (theta_.size() < 3) {
      throw unsupported_dimension("LorentzParam: d >= 2 required (vector of length >= 3)");
    }
    const double scale = theta_.cwiseAbs().maxCoeff();
    const double q = minkowski_inner(theta_, theta_);
    if (!theta_.allFinite()) throw cone_violation("forward cone violation: non-finite entry");
    if (!(theta_(0) > 0.0)) {
      throw cone_violation("forward cone violation: theta_0 > 0 fails");
    }
    if (!(q > kConeTol * scale * scale)) {
      std::ostringstream msg;
      msg << "forward cone violation: theta_0 > sqrt(theta_1^2 + ... + theta_d^2) fails ([theta,theta] = " << q
          << ")";
      throw cone_violation(msg.str());
    }
  }
  LorentzParam(std::initializer_list<double> v) : LorentzParam(to_vector(v)) {}

  [[nodiscard]] int d() const { return static_cast<int>(theta_.size()) - 1; }
  [[nodiscard]] const Eigen::VectorXd& theta() const { return theta_; }
  [[nodiscard]] double operator[](int i) const { return theta_(i); }
  /// [theta, theta]
  [[nodiscard]] double minkowski_sq() const { return minkowski_inner(theta_, theta_); }
  /// |theta| = [theta, theta]^{1/2}
  [[nodiscard]] double minkowski_norm() const { return std::sqrt(minkowski_sq()); }

 private:
  static Eigen::VectorXd to_vector(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
  }
  Eigen::VectorXd theta_;
};

inline bool combination_in_cone(double s, const LorentzParam& p, double t, const LorentzParam& q) {
  if (p.d() != q.d()) throw dimension_mismatch("LorentzParam dimension mismatch");
  const Eigen::VectorXd v = s * p.theta() + t * q.theta();
  const double scale = v.cwiseAbs().maxCoeff();
  return v(0) > 0.0 && minkowski_inner(v, v) > kConeTol * scale * scale;
}

inline LorentzParam combine(double s, const LorentzParam& p, double t, const LorentzParam& q) {
  if (p.d() != q.d()) throw dimension_mismatch("LorentzParam dimension mismatch");
  return LorentzParam(Eigen::VectorXd(s * p.theta() + t * q.theta()));
}

/// Chart point (x_1, ..., x_d) of L^d; lift() = (sqrt(1 + |x|^2), x_1, ..., x_d).
class HyperboloidPoint {
 public:
  explicit HyperboloidPoint(Eigen::VectorXd x) : x_(std::move(x)) {
    if (x_.size() < 2) throw unsupported_dimension("HyperboloidPoint: d >= 2 required");
  }
  HyperboloidPoint(double x1, double x2) : x_(2) { x_ << x1, x2; }

  [[nodiscard]] int d() const { return static_cast<int>(x_.size()); }
  [[nodiscard]] const Eigen::VectorXd& chart() const { return x_; }
  [[nodiscard]] double operator[](int i) const { return x_(i); }
  [[nodiscard]] double x0() const { return std::sqrt(1.0 + x_.squaredNorm()); }
  [[nodiscard]] Eigen::VectorXd lift() const {
    Eigen::VectorXd out(x_.size() + 1);
    out(0) = x0();
    out.tail(x_.size()) = x_;
    return out;
  }

 private:
  Eigen::VectorXd x_;
};

/// Element of SO_0(1, d).
class LorentzTransform {
 public:
  explicit LorentzTransform(Eigen::MatrixXd a) : a_(std::move(a)) {
    const auto n = a_.rows();
    if (n != a_.cols() || n < 3) throw dimension_mismatch("LorentzTransform: square (d+1)x(d+1) matrix required");
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    g.diagonal().tail(n - 1).setConstant(-1.0);
    const Eigen::MatrixXd err = a_.transpose() * g * a_ - g;
    const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
    if (err.cwiseAbs().maxCoeff() > 1e-10 * scale * scale) {
      throw std::domain_error("LorentzTransform: matrix does not preserve the Minkowski form");
    }
    if (!(a_(0, 0) > 0.0)) throw std::domain_error("LorentzTransform: must preserve the forward cone");
  }

  [[nodiscard]] int d() const { return static_cast<int>(a_.rows()) - 1; }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return a_; }

 private:
  Eigen::MatrixXd a_;
};

inline LorentzParam lorentz_act_param(const LorentzTransform& A, const LorentzParam& theta) {
  if (A.d() != theta.d()) throw dimension_mismatch("lorentz_act_param: dimension mismatch");
  return LorentzParam(Eigen::VectorXd(A.matrix() * theta.theta()));
}

inline HyperboloidPoint lorentz_act_point(const LorentzTransform& A, const HyperboloidPoint& p) {
  if (A.d() != p.d()) throw dimension_mismatch("lorentz_act_point: dimension mismatch");
  const Eigen::VectorXd y = A.matrix() * p.lift();
  return HyperboloidPoint(Eigen::VectorXd(y.tail(y.size() - 1)));
}

/// Random element of SO_0(1, d): rotation * boost(rapidity <= max_rapidity) * rotation.
inline LorentzTransform lorentz_random_element(int d, const RngStream& stream, double max_rapidity = 2.0) {
  if (d < 2) throw unsupported_dimension("lorentz_random_element: d >= 2 required");
  Rng rng(stream);
  auto random_rotation = [&]() {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    Eigen::MatrixXd full = Eigen::MatrixXd::Identity(d + 1, d + 1);
    full.bottomRightCorner(d, d) = q;
    return full;
  };
  const double phi = rng.uniform(-max_rapidity, max_rapidity);
  Eigen::MatrixXd boost = Eigen::MatrixXd::Identity(d + 1, d + 1);
  boost(0, 0) = boost(1, 1) = std::cosh(phi);
  boost(0, 1) = boost(1, 0) = std::sinh(phi);
  return LorentzTransform(random_rotation() * boost * random_rotation());
}

// ---------------------------------------------------------------------------
// Maximal invariants

struct InvariantTriple {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
};

/// (|theta|, |theta'|, tr(theta' theta^{-1})); invariant under the SL(2, R) action.
inline InvariantTriple poincare_invariant(const SpdParam2& theta, const SpdParam2& theta2) {
  // tr(theta' theta^{-1}) = (a' c - 2 b b' + c' a) / |theta|
  const double tr = (theta2.a() * theta.c() - 2.0 * theta.b() * theta2.b() + theta2.c() * theta.a()) / theta.det();
  return {theta.det(), theta2.det(), tr};
}

/// ([theta, theta], [theta', theta'], [theta, theta']); invariant under SO_0(1, d).
inline InvariantTriple lorentz_invariant(const LorentzParam& theta, const LorentzParam& theta2) {
  if (theta.d() != theta2.d()) throw dimension_mismatch("lorentz_invariant: dimension mismatch");
  return {theta.minkowski_sq(), theta2.minkowski_sq(), minkowski_inner(theta.theta(), theta2.theta())};
}

// ---------------------------------------------------------------------------
// Correspondence between the upper half-plane and L^2

/// Parameter map matching point_h_to_l: the push-forward of p_theta on H through
/// point_h_to_l is the hyperboloid law with parameter (a + c, a - c, -2b).
inline LorentzParam param_h_to_l(const SpdParam2& theta) {
  return LorentzParam{theta.a() + theta.c(), theta.a() - theta.c(), -2.0 * theta.b()};
}

inline SpdParam2 param_l_to_h(const LorentzParam& theta) {
  if (theta.d() != 2) throw unsupported_dimension("param_l_to_h: d = 2 required");
  return {0.5 * (theta[0] + theta[1]), -0.5 * theta[2], 0.5 * (theta[0] - theta[1])};
}

/// (x, y) -> ((1 - x^2 - y^2) / (2y), x / y)
inline HyperboloidPoint point_h_to_l(const UpperHalfPoint& z) {
  return {(1.0 - z.x() * z.x() - z.y() * z.y()) / (2.0 * z.y()), z.x() / z.y()};
}

/// Inverse chart map: positive root of y^2 (1 + Y^2) + 2 X y - 1 = 0, then x = y Y.
inline UpperHalfPoint point_l_to_h(const HyperboloidPoint& p) {
  if (p.d() != 2) throw unsupported_dimension("point_l_to_h: d = 2 required");
  const double X = p[0];
  const double Y = p[1];
  const double r = std::sqrt(1.0 + X * X + Y * Y);
  // both forms equal; pick the one without cancellation
  const double y = X >= 0.0 ? 1.0 / (r + X) : (r - X) / (1.0 + Y * Y);
  return {y * Y, y};
}

/// Cayley map w = (z - i) / (z + i) onto the unit disk.
inline std::pair<double, double> point_h_to_disk(const UpperHalfPoint& z) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> w = (z.z() - i) / (z.z() + i);
  return {w.real(), w.imag()};
}

/// z = i (1 + w) / (1 - w)
inline UpperHalfPoint point_disk_to_h(double u, double v) {
  if (!(u * u + v * v < 1.0)) throw std::domain_error("disk point requires u^2 + v^2 < 1");
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> w(u, v);
  const std::complex<double> z = i * (1.0 + w) / (1.0 - w);
  // Im z = (1 - |w|^2) / |1 - w|^2, computed directly to keep it positive
  return {z.real(), (1.0 - std::norm(w)) / std::norm(1.0 - w)};
}

/// log |dz/dw|^2 for the inverse Cayley map; a density on H transfers to the disk as
/// p_disk(w) = p_H(z(w)) |dz/dw|^2.
inline double disk_log_jacobian(double u, double v) {
  const double n = std::norm(std::complex<double>(1.0 - u, -v));
  return std::log(4.0) - 2.0 * std::log(n);
}

}  // namespace hyperstat
