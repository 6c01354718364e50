#pragma once

// Special functions shared by the Poincare and hyperboloid families:
// modified Bessel function of the second kind K_nu(x) for real order,
// its logarithmic derivative, and the scaled exponential integral e^x E_1(x).

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hyperstat {

/// A value together with its natural logarithm. `log_value` stays finite
/// when `value` underflows (e.g. K_nu(x) for x near 700).
struct SpecialValue {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline void require_positive_argument(double x, const char* fn) {
  if (!(x > 0.0)) {
    throw std::domain_error(std::string(fn) + ": argument must be > 0, got " + std::to_string(x));
  }
}

// Taylor coefficients of 1/Gamma(z) = sum_k c_k z^k (k >= 1).
inline constexpr std::array<double, 16> kRecipGammaCoeffs = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
};

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
// for |mu| <= 1/2, as needed by Temme's series.
struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

inline TemmeGammas temme_gammas(double mu) {
  TemmeGammas g{};
  g.gampl = 1.0 / std::tgamma(1.0 + mu);
  g.gammi = 1.0 / std::tgamma(1.0 - mu);
  g.gam2 = 0.5 * (g.gammi + g.gampl);
  if (std::abs(mu) > 0.1) {
    g.gam1 = (g.gammi - g.gampl) / (2.0 * mu);
  } else {
    // 1/Gamma(1+z) = sum_{k>=1} c_k z^{k-1}; the odd part gives gam1 without cancellation.
    const double mu2 = mu * mu;
    double acc = 0.0;
    double pw = 1.0;
    for (std::size_t k = 1; k < kRecipGammaCoeffs.size(); k += 2) {
      acc += kRecipGammaCoeffs[k] * pw;
      pw *= mu2;
    }
    g.gam1 = -acc;
  }
  return g;
}

// Scaled pair (e^x K_mu(x), e^x K_{mu+1}(x)) for |mu| <= 1/2 (Temme series for x <= 2,
// Steed's continued fraction otherwise).
inline std::array<double, 2> bessel_k_pair_scaled(double mu, double x) {
  constexpr double eps = 1e-16;
  constexpr int max_iter = 10000;
  const double mu2 = mu * mu;
  double kmu = 0.0;
  double k1 = 0.0;
  if (x <= 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i <= max_iter; ++i) {
      const double di = i;
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= di - mu;
      q /= di + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - di * ff);
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    const double scale = std::exp(x);
    kmu = sum * scale;
    k1 = sum1 * (2.0 / x) * scale;
  } else {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= max_iter; ++i) {
      a -= 2.0 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < eps) break;
    }
    h = a1 * h;
    kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    k1 = kmu * (mu + x + 0.5 - h) / x;
  }
  return {kmu, k1};
}

// e^x K_nu(x) for half-integer nu = n + 1/2 via the terminating series.
inline double bessel_k_half_integer_scaled(int n, double x) {
  double sum = 0.0;
  double term = 1.0;  // (n+k)! / (k! (n-k)! (2x)^k)
  for (int k = 0; k <= n; ++k) {
    sum += term;
    term *= static_cast<double>((n + k + 1) * (n - k)) / ((k + 1) * 2.0 * x);
  }
  return std::sqrt(std::numbers::pi / (2.0 * x)) * sum;
}

inline bool is_half_integer(double nu, int& n) {
  const double twice = 2.0 * nu;
  const double r = std::round(twice);
  if (std::abs(twice - r) > 1e-15 || static_cast<long long>(r) % 2 == 0) return false;
  n = static_cast<int>((r - 1.0) / 2.0);
  return true;
}

// Scaled pair (e^x K_nu(x), e^x K_{nu+1}(x)) for nu >= 0 by upward recurrence from |mu| <= 1/2.
inline std::array<double, 2> bessel_k_scaled_pair(double nu, double x) {
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  auto [kmu, k1] = bessel_k_pair_scaled(mu, x);
  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * (2.0 / x) * k1 + kmu;
    kmu = k1;
    k1 = next;
  }
  return {kmu, k1};
}

}  // namespace detail

/// K_order(x) for order >= 0 and x > 0. Half-integer orders use the closed form;
/// other orders use Temme's method with upward recurrence.
inline SpecialValue bessel_k(double order, double x) {
  detail::require_positive_argument(x, "bessel_k");
  if (order < 0.0) order = -order;
  double scaled = 0.0;
  int n = 0;
  if (detail::is_half_integer(order, n)) {
    scaled = detail::bessel_k_half_integer_scaled(n, x);
  } else {
    scaled = detail::bessel_k_scaled_pair(order, x)[0];
  }
  SpecialValue out;
  out.log_value = std::log(scaled) - x;
  out.value = std::exp(out.log_value);
  return out;
}

/// Ratio K_{order+1}(x) / K_order(x); overflow-free since both factors share the e^{-x} scale.
inline double bessel_k_ratio(double order, double x) {
  detail::require_positive_argument(x, "bessel_k_ratio");
  if (order < 0.0) order = -order;
  int n = 0;
  if (detail::is_half_integer(order, n)) {
    return detail::bessel_k_half_integer_scaled(n + 1, x) / detail::bessel_k_half_integer_scaled(n, x);
  }
  const auto pair = detail::bessel_k_scaled_pair(order, x);
  return pair[1] / pair[0];
}

/// d/dx log K_order(x) = -(K_{order-1} + K_{order+1}) / (2 K_order), always negative.
inline double bessel_k_logderiv(double order, double x) {
  detail::require_positive_argument(x, "bessel_k_logderiv");
  if (order < 0.0) order = -order;
  // K_{nu-1} = K_{nu+1} - (2 nu / x) K_nu, so the sum is 2 K_{nu+1} - (2 nu / x) K_nu.
  const double r = bessel_k_ratio(order, x);
  return -(r - order / x);
}

/// e^x * Gamma(0, x) = e^x * E_1(x), evaluated without forming e^x.
/// Continued fraction (modified Lentz) for x >= 1, power series for x < 1.
inline double exp_gamma0(double x) {
  detail::require_positive_argument(x, "exp_gamma0");
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  if (x >= 1.0) {
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
      const double an = -static_cast<double>(i) * i;
      b += 2.0;
      d = 1.0 / (an * d + b);
      c = b + an / c;
      const double del = c * d;
      h *= del;
      if (std::abs(del - 1.0) < eps) break;
    }
    return h;
  }
  // E_1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) < eps * std::abs(sum)) break;
  }
  const double e1 = -std::numbers::egamma - std::log(x) - sum;
  return std::exp(x) * e1;
}

}  // namespace hyperstat
