#pragma once

// Exact variate generation: generalized inverse Gaussian (GIG) mixing law,
// hyperboloid variates on L^2 as a normal variance-mean mixture, and Poincare
// variates pushed through the chart correspondence.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperstat/errors.hpp"
#include "hyperstat/geometry.hpp"
#include "hyperstat/numerics.hpp"
#include "hyperstat/rng.hpp"

namespace hyperstat {

/// Density proportional to x^{lambda - 1} exp(-(chi / x + psi x) / 2) on x > 0.
struct GigParams {
  double lambda = 0.5;
  double chi = 1.0;
  double psi = 1.0;

  void validate() const {
    if (!std::isfinite(lambda)) throw std::invalid_argument("GIG: lambda must be finite");
    if (!(chi > 0.0) || !std::isfinite(chi)) throw std::invalid_argument("GIG: chi > 0 required");
    if (!(psi > 0.0) || !std::isfinite(psi)) throw std::invalid_argument("GIG: psi > 0 required");
  }
};

enum class GigMethod { automatic, inverse_gaussian, ratio_of_uniforms };

class GigSampler {
 public:
  explicit GigSampler(const GigParams& p, GigMethod method = GigMethod::automatic) : p_(p) {
    p_.validate();
    const bool half = std::abs(std::abs(p_.lambda) - 0.5) == 0.0;
    if (method == GigMethod::inverse_gaussian && !half) {
      throw std::invalid_argument("GIG: the inverse Gaussian transform needs lambda = +-1/2");
    }
    use_ig_ = half && method != GigMethod::ratio_of_uniforms;
    // 1/X ~ GIG(-lambda, psi, chi); reduce to lambda >= 0
    reciprocal_ = p_.lambda < 0.0;
    const double lam = std::abs(p_.lambda);
    const double chi = reciprocal_ ? p_.psi : p_.chi;
    const double psi = reciprocal_ ? p_.chi : p_.psi;
    if (use_ig_) {
      // GIG(1/2, chi, psi) = 1 / IG(mean sqrt(psi/chi), shape psi)
      ig_mean_ = std::sqrt(psi / chi);
      ig_shape_ = psi;
    } else {
      setup_rou(lam, chi, psi);
    }
  }

  double operator()(Rng& rng) {
    double x = use_ig_ ? 1.0 / inverse_gaussian(rng) : rou(rng);
    return reciprocal_ ? 1.0 / x : x;
  }

  [[nodiscard]] const GigParams& params() const { return p_; }
  /// Fraction of ratio-of-uniforms proposals accepted so far (1 for the exact transform).
  [[nodiscard]] double acceptance_rate() const {
    return proposed_ == 0 ? 1.0 : static_cast<double>(accepted_) / static_cast<double>(proposed_);
  }

 private:
  // Michael-Schucany-Haas transform.
  double inverse_gaussian(Rng& rng) const {
    const double mu = ig_mean_, lam = ig_shape_;
    const double z = rng.normal();
    const double y = z * z;
    const double my = mu * y;
    const double big = mu + mu * my / (2.0 * lam) + (mu / (2.0 * lam)) * std::sqrt(4.0 * my * lam + my * my);
    const double small = mu * mu / big;
    return rng.uniform() <= mu / (mu + small) ? small : mu * mu / small;
  }

  double log_kernel(double x) const { return (lam_ - 1.0) * std::log(x) - 0.5 * beta_ * (x + 1.0 / x); }

  void setup_rou(double lam, double chi, double psi) {
    lam_ = lam;
    beta_ = std::sqrt(chi * psi);
    scale_ = std::sqrt(chi / psi);
    mode_ = ((lam_ - 1.0) + std::sqrt((lam_ - 1.0) * (lam_ - 1.0) + beta_ * beta_)) / beta_;
    log_h_mode_ = log_kernel(mode_);
    // stationary points of (x - m) sqrt(h(x)) on each side of the mode
    auto phi = [&](double x) {
      return 2.0 / (x - mode_) + (lam_ - 1.0) / x - 0.5 * beta_ * (1.0 - 1.0 / (x * x));
    };
    double lo = 0.5 * mode_;
    while (phi(lo) < 0.0) lo *= 0.5;
    const double x_minus = bisect_root(phi, lo, mode_ * (1.0 - 1e-15));
    double hi = 2.0 * mode_ + 1.0;
    while (phi(hi) > 0.0) hi *= 2.0;
    const double x_plus = bisect_root(phi, mode_ * (1.0 + 1e-15), hi);
    v_minus_ = (x_minus - mode_) * std::exp(0.5 * (log_kernel(x_minus) - log_h_mode_));
    v_plus_ = (x_plus - mode_) * std::exp(0.5 * (log_kernel(x_plus) - log_h_mode_));
  }

  double rou(Rng& rng) {
    for (;;) {
      ++proposed_;
      const double u = rng.uniform();
      const double v = rng.uniform(v_minus_, v_plus_);
      const double x = v / u + mode_;
      if (x <= 0.0) continue;
      if (2.0 * std::log(u) <= log_kernel(x) - log_h_mode_) {
        ++accepted_;
        return scale_ * x;
      }
    }
  }

  GigParams p_;
  bool use_ig_ = false;
  bool reciprocal_ = false;
  double ig_mean_ = 0.0, ig_shape_ = 0.0;
  double lam_ = 0.0, beta_ = 0.0, scale_ = 1.0, mode_ = 1.0, log_h_mode_ = 0.0;
  double v_minus_ = 0.0, v_plus_ = 0.0;
  std::uint64_t proposed_ = 0, accepted_ = 0;
};

inline std::vector<double> gig_sample(const GigParams& p, std::size_t n, const RngStream& stream,
                                      GigMethod method = GigMethod::automatic) {
  GigSampler sampler(p, method);
  Rng rng(stream);
  std::vector<double> out(n);
  for (auto& x : out) x = sampler(rng);
  return out;
}

/// Draws from the hyperboloid law on L^2: s ~ GIG(1/2, 1, |theta|^2), x ~ N(s (theta_1, theta_2), s I).
class HyperboloidSampler {
 public:
  explicit HyperboloidSampler(const LorentzParam& theta)
      : theta_(require_d2(theta)), gig_(GigParams{0.5, 1.0, theta.minkowski_sq()}) {}

  HyperboloidPoint operator()(Rng& rng) {
    const double s = gig_(rng);
    const double sd = std::sqrt(s);
    const double x1 = s * theta_[1] + sd * rng.normal();
    const double x2 = s * theta_[2] + sd * rng.normal();
    return {x1, x2};
  }

 private:
  static const LorentzParam& require_d2(const LorentzParam& theta) {
    if (theta.d() != 2) throw unsupported_dimension("hyperboloid sampling is available for d = 2 only");
    return theta;
  }
  LorentzParam theta_;
  GigSampler gig_;
};

inline std::vector<HyperboloidPoint> hyperboloid_sample(const LorentzParam& theta, std::size_t n,
                                                        const RngStream& stream) {
  HyperboloidSampler sampler(theta);
  Rng rng(stream);
  std::vector<HyperboloidPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler(rng));
  return out;
}

class PoincareSampler {
 public:
  explicit PoincareSampler(const SpdParam2& theta) : inner_(param_h_to_l(theta)) {}
  UpperHalfPoint operator()(Rng& rng) { return point_l_to_h(inner_(rng)); }

 private:
  HyperboloidSampler inner_;
};

inline std::vector<UpperHalfPoint> poincare_sample(const SpdParam2& theta, std::size_t n, const RngStream& stream) {
  PoincareSampler sampler(theta);
  Rng rng(stream);
  std::vector<UpperHalfPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler(rng));
  return out;
}

/// Chart mean of n draws from P_{t x~}, where x~ is the lift of `center`.
inline Eigen::VectorXd concentration_probe(const HyperboloidPoint& center, double t, std::size_t n,
                                           const RngStream& stream) {
  if (!(t > 0.0)) throw std::invalid_argument("concentration_probe: t > 0 required");
  if (n == 0) throw std::invalid_argument("concentration_probe: n >= 1 required");
  const LorentzParam theta(Eigen::VectorXd(t * center.lift()));
  HyperboloidSampler sampler(theta);
  Rng rng(stream);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(center.d());
  for (std::size_t i = 0; i < n; ++i) {
    const HyperboloidPoint p = sampler(rng);
    mean += (p.chart() - mean) / static_cast<double>(i + 1);
  }
  return mean;
}

}  // namespace hyperstat
