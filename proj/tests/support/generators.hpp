#pragma once

// Random parameters for property tests.

#include <Eigen/Dense>
#include <cmath>

#include "hyperstat/geometry.hpp"
#include "hyperstat/rng.hpp"

namespace testgen {

/// SPD matrix with log-eigenvalues in [-1.5, 1.5] and a random rotation.
inline hyperstat::SpdParam2 random_spd(hyperstat::Rng& rng, double spread = 1.5) {
  const double l1 = std::exp(rng.uniform(-spread, spread));
  const double l2 = std::exp(rng.uniform(-spread, spread));
  const double phi = rng.uniform(0.0, 3.141592653589793);
  const double c = std::cos(phi), s = std::sin(phi);
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

/// SPD matrix with a prescribed determinant.
inline hyperstat::SpdParam2 random_spd_on_leaf(hyperstat::Rng& rng, double det) {
  const hyperstat::SpdParam2 p = random_spd(rng);
  const double s = std::sqrt(det / p.det());
  return {s * p.a(), s * p.b(), s * p.c()};
}

/// Forward-cone vector with |theta| in [0.3, 4] and bounded rapidity.
inline hyperstat::LorentzParam random_lorentz(hyperstat::Rng& rng, int d, double max_rapidity = 1.5) {
  const double t = std::exp(rng.uniform(std::log(0.3), std::log(4.0)));
  const double phi = rng.uniform(0.0, max_rapidity);
  Eigen::VectorXd dir(d);
  for (int i = 0; i < d; ++i) dir(i) = rng.normal();
  dir.normalize();
  Eigen::VectorXd v(d + 1);
  v(0) = t * std::cosh(phi);
  v.tail(d) = t * std::sinh(phi) * dir;
  return hyperstat::LorentzParam(v);
}

inline hyperstat::LorentzParam random_lorentz_on_leaf(hyperstat::Rng& rng, int d, double norm) {
  const hyperstat::LorentzParam p = random_lorentz(rng, d);
  return hyperstat::LorentzParam(Eigen::VectorXd(p.theta() * (norm / p.minkowski_norm())));
}

}  // namespace testgen
