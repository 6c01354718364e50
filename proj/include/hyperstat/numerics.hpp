#pragma once

// Small numerical building blocks: 1-D minimization and root bracketing,
// compensated summation, and mergeable running moments.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>

namespace hyperstat {

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section minimization of a unimodal function on [lo, hi].
template <typename F>
Extremum golden_section_minimize(F&& f, double lo, double hi, double x_tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_tol) {
    if (fc <= fd) {
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
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// Root of a continuous f on [lo, hi] with f(lo), f(hi) of opposite sign (bisection
/// until the bracket is below the tolerance or floating point resolution).
template <typename F>
double bisect_root(F&& f, double lo, double hi, double x_tol = 0.0, int max_iter = 400) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw std::domain_error("bisect_root: root not bracketed");
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= x_tol) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Running mean / sum of squared deviations (Welford), mergeable by Chan's parallel update.
struct RunningMoments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    n += 1.0;
    const double delta = v - mean;
    mean += delta / n;
    m2 += delta * (v - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * (o.n / total);
    m2 += o.m2 + delta * delta * (n * o.n / total);
    n = total;
  }

  /// Unbiased sample variance.
  [[nodiscard]] double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
};

}  // namespace hyperstat
