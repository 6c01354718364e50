#pragma once

// Finite mixtures of Poincare or hyperboloid distributions and their EM fit
// (Bregman soft clustering in sufficient-statistic space).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hyperstat/errors.hpp"
#include "hyperstat/geometry.hpp"
#include "hyperstat/hyperboloid.hpp"
#include "hyperstat/numerics.hpp"
#include "hyperstat/poincare.hpp"
#include "hyperstat/rng.hpp"
#include "hyperstat/sampling.hpp"

namespace hyperstat {

struct PoincareFamily {
  using Point = UpperHalfPoint;
  using Param = SpdParam2;
  using Sampler = PoincareSampler;
  static constexpr const char* name = "poincare";

  static int dim(const Param&) { return 2; }
  static int dim(const Point&) { return 2; }
  static Eigen::VectorXd stat(const Point& z) { return poincare::sufficient_stat(z); }
  /// <theta, t> - F(theta)
  static double log_kernel(const Param& theta, const Eigen::VectorXd& t) {
    return poincare::pairing(theta, Eigen::Vector3d(t)) - poincare::cumulant(theta).reduced;
  }
  /// log p - log kernel
  static double log_carrier(const Point& z) { return -std::log(std::numbers::pi) - 2.0 * std::log(z.y()); }
  static double log_density(const Param& theta, const Point& z) { return poincare::log_density(theta, z); }
  static Param from_moment(const Eigen::VectorXd& eta) {
    return poincare::grad_conjugate(Moment2{eta(0), eta(1), eta(2)});
  }
};

struct HyperboloidFamily {
  using Point = HyperboloidPoint;
  using Param = LorentzParam;
  using Sampler = HyperboloidSampler;
  static constexpr const char* name = "hyperboloid";

  static int dim(const Param& theta) { return theta.d(); }
  static int dim(const Point& p) { return p.d(); }
  static Eigen::VectorXd stat(const Point& p) { return hyperboloid::sufficient_stat(p); }
  static double log_kernel(const Param& theta, const Eigen::VectorXd& t) {
    return theta.theta().dot(t) - hyperboloid::cumulant(theta);
  }
  static double log_carrier(const Point& p) { return -0.5 * std::log1p(p.chart().squaredNorm()); }
  static double log_density(const Param& theta, const Point& p) { return hyperboloid::log_density(theta, p); }
  static Param from_moment(const Eigen::VectorXd& eta) { return hyperboloid::grad_conjugate(eta); }
};

template <typename Family>
class Mixture {
 public:
  using Param = typename Family::Param;
  using Point = typename Family::Point;

  Mixture(std::vector<double> weights, std::vector<Param> components)
      : weights_(std::move(weights)), components_(std::move(components)) {
    if (weights_.empty() || weights_.size() != components_.size()) {
      throw std::invalid_argument("mixture: need as many weights as components (k >= 1)");
    }
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::invalid_argument("mixture: weights must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights must sum to 1");
    for (const auto& c : components_) {
      if (Family::dim(c) != Family::dim(components_.front())) throw dimension_mismatch("mixture: mixed dimensions");
    }
  }

  [[nodiscard]] std::size_t k() const { return weights_.size(); }
  [[nodiscard]] int d() const { return Family::dim(components_.front()); }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] const std::vector<Param>& components() const { return components_; }

 private:
  std::vector<double> weights_;
  std::vector<Param> components_;
};

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

}  // namespace detail

template <typename Family>
double mixture_log_density(const Mixture<Family>& m, const typename Family::Point& x) {
  if (Family::dim(x) != m.d()) throw dimension_mismatch("mixture_log_density: dimension mismatch");
  std::vector<double> terms(m.k());
  for (std::size_t j = 0; j < m.k(); ++j) {
    terms[j] = std::log(m.weights()[j]) + Family::log_density(m.components()[j], x);
  }
  return detail::log_sum_exp(terms);
}

template <typename Family>
double mixture_log_likelihood(const Mixture<Family>& m, std::span<const typename Family::Point> points) {
  CompensatedSum s;
  for (const auto& x : points) s.add(mixture_log_density(m, x));
  return s.value();
}

template <typename Family>
struct LabeledSample {
  std::vector<typename Family::Point> points;
  std::vector<std::size_t> labels;
};

/// Ancestral sampling: component ~ Categorical(w), then the component sampler.
template <typename Family>
LabeledSample<Family> mixture_sample_labeled(const Mixture<Family>& m, std::size_t n, const RngStream& stream) {
  std::vector<typename Family::Sampler> samplers;
  samplers.reserve(m.k());
  for (const auto& c : m.components()) samplers.emplace_back(c);
  std::vector<double> cumulative(m.k());
  double acc = 0.0;
  for (std::size_t j = 0; j < m.k(); ++j) cumulative[j] = (acc += m.weights()[j]);
  Rng rng(stream);
  LabeledSample<Family> out;
  out.points.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    std::size_t j = 0;
    while (j + 1 < m.k() && (u >= cumulative[j] || m.weights()[j] == 0.0)) ++j;
    out.labels.push_back(j);
    out.points.push_back(samplers[j](rng));
  }
  return out;
}

template <typename Family>
std::vector<typename Family::Point> mixture_sample(const Mixture<Family>& m, std::size_t n, const RngStream& stream) {
  return mixture_sample_labeled(m, n, stream).points;
}

struct EmOptions {
  std::size_t max_iter = 200;
  double tol = 1e-8;
  int max_restarts = 10;
  double min_effective_count = 2.0;
};

struct EmTrace {
  std::vector<double> avg_loglik;  // one entry per iteration
  std::vector<double> effective_counts;  // column sums of the final responsibilities
  std::size_t iterations = 0;
  int restarts = 0;
  bool converged = false;
};

template <typename Family>
struct EmResult {
  Mixture<Family> mixture;
  EmTrace trace;
  double loglik = 0.0;  // total log-likelihood of the data under the fit
};

namespace detail {

template <typename Family>
Eigen::MatrixXd stat_matrix(std::span<const typename Family::Point> points) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd t(n, Family::stat(points.front()).size());
  for (Eigen::Index i = 0; i < n; ++i) t.row(i) = Family::stat(points[static_cast<std::size_t>(i)]).transpose();
  return t;
}

// k-means++ seeding in statistic space, returned as hard responsibilities.
inline Eigen::MatrixXd kmeanspp_responsibilities(const Eigen::MatrixXd& t, std::size_t k, Rng& rng) {
  const Eigen::Index n = t.rows();
  std::vector<Eigen::Index> centers;
  centers.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (t.rowwise() - t.row(centers[0])).rowwise().squaredNorm();
  while (centers.size() < k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        u -= d2(pick);
        if (u <= 0.0 && d2(pick) > 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.push_back(pick);
    d2 = d2.cwiseMin((t.rowwise() - t.row(pick)).rowwise().squaredNorm());
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double dd = (t.row(i) - t.row(centers[j])).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        best = static_cast<Eigen::Index>(j);
      }
    }
    r(i, best) = 1.0;
  }
  return r;
}

struct Collapse {
  std::string reason;
};

// One EM run from given responsibilities. Returns the collapse reason on failure.
template <typename Family>
std::variant<EmResult<Family>, Collapse> em_run(std::span<const typename Family::Point> points, const Eigen::MatrixXd& t,
                                                Eigen::MatrixXd r, const EmOptions& opt) {
  using Param = typename Family::Param;
  const Eigen::Index n = t.rows();
  const Eigen::Index k = r.cols();
  CompensatedSum carrier_sum;
  for (const auto& x : points) carrier_sum.add(Family::log_carrier(x));
  const double carrier = carrier_sum.value();

  EmTrace trace;
  std::vector<double> weights(static_cast<std::size_t>(k));
  std::vector<Param> comps;
  double prev = -std::numeric_limits<double>::infinity();
  double total_ll = 0.0;
  std::vector<double> terms(static_cast<std::size_t>(k));
  Eigen::VectorXd counts(k);

  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    // M-step
    comps.clear();
    for (Eigen::Index j = 0; j < k; ++j) {
      CompensatedSum cnt;
      std::vector<CompensatedSum> eta(static_cast<std::size_t>(t.cols()));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = r(i, j);
        cnt.add(w);
        for (Eigen::Index c = 0; c < t.cols(); ++c) eta[static_cast<std::size_t>(c)].add(w * t(i, c));
      }
      const double nk = cnt.value();
      counts(j) = nk;
      if (!(nk >= opt.min_effective_count)) {
        return Collapse{"component " + std::to_string(j) + " collapsed (effective count " + std::to_string(nk) + ")"};
      }
      Eigen::VectorXd m(t.cols());
      for (Eigen::Index c = 0; c < t.cols(); ++c) m(c) = eta[static_cast<std::size_t>(c)].value() / nk;
      try {
        comps.push_back(Family::from_moment(m));
      } catch (const std::domain_error& e) {
        return Collapse{std::string("component ") + std::to_string(j) + ": " + e.what()};
      }
      weights[static_cast<std::size_t>(j)] = nk / static_cast<double>(n);
    }
    // E-step
    std::vector<double> log_w(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) log_w[static_cast<std::size_t>(j)] = std::log(weights[static_cast<std::size_t>(j)]);
    CompensatedSum ll;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd ti = t.row(i).transpose();
      for (Eigen::Index j = 0; j < k; ++j) {
        terms[static_cast<std::size_t>(j)] =
            log_w[static_cast<std::size_t>(j)] + Family::log_kernel(comps[static_cast<std::size_t>(j)], ti);
      }
      const double lse = log_sum_exp(terms);
      ll.add(lse);
      for (Eigen::Index j = 0; j < k; ++j) r(i, j) = std::exp(terms[static_cast<std::size_t>(j)] - lse);
    }
    total_ll = ll.value() + carrier;
    const double avg = total_ll / static_cast<double>(n);
    if (!std::isfinite(avg)) return Collapse{"non-finite log-likelihood"};
    trace.avg_loglik.push_back(avg);
    trace.iterations = iter + 1;
    if (std::abs(avg - prev) < opt.tol) {
      trace.converged = true;
      break;
    }
    prev = avg;
  }
  // normalize weights to sum to one exactly enough for the Mixture invariant
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  for (double& w : weights) w /= wsum;
  trace.effective_counts.assign(counts.data(), counts.data() + counts.size());
  return EmResult<Family>{Mixture<Family>(weights, comps), trace, total_ll};
}

}  // namespace detail

/// EM from caller-supplied initial responsibilities (n x k, rows summing to 1). No restarts.
template <typename Family>
EmResult<Family> em_fit_from_responsibilities(std::span<const typename Family::Point> points,
                                              const Eigen::MatrixXd& responsibilities, const EmOptions& opt = {}) {
  if (points.empty() || responsibilities.rows() != static_cast<Eigen::Index>(points.size())) {
    throw std::invalid_argument("em_fit: responsibilities must have one row per point");
  }
  const Eigen::MatrixXd t = detail::stat_matrix<Family>(points);
  auto out = detail::em_run<Family>(points, t, responsibilities, opt);
  if (auto* c = std::get_if<detail::Collapse>(&out)) throw em_failure("EM failed: " + c->reason);
  return std::get<EmResult<Family>>(std::move(out));
}

/// EM with k-means++ initialization; a collapsed run restarts from a fresh seeding.
template <typename Family>
EmResult<Family> em_fit(std::span<const typename Family::Point> points, std::size_t k, std::uint64_t seed,
                        const EmOptions& opt = {}) {
  if (k < 1) throw std::invalid_argument("em_fit: k >= 1 required");
  if (points.size() < 2 * k) throw std::invalid_argument("em_fit: at least 2k points required");
  const int d = Family::dim(points.front());
  for (const auto& x : points) {
    if (Family::dim(x) != d) throw dimension_mismatch("em_fit: mixed dimensions");
  }
  const Eigen::MatrixXd t = detail::stat_matrix<Family>(points);
  const RngStream base = purpose_stream(seed, StreamPurpose::init);
  std::string last;
  for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
    Rng rng(base.substream(static_cast<std::uint64_t>(attempt)));
    Eigen::MatrixXd r = detail::kmeanspp_responsibilities(t, k, rng);
    auto out = detail::em_run<Family>(points, t, std::move(r), opt);
    if (auto* res = std::get_if<EmResult<Family>>(&out)) {
      res->trace.restarts = attempt;
      return std::move(*res);
    }
    last = std::get<detail::Collapse>(out).reason;
  }
  throw em_failure("EM failed after " + std::to_string(opt.max_restarts) + " restarts: " + last);
}

template <typename Family>
EmResult<Family> em_fit(const std::vector<typename Family::Point>& points, std::size_t k, std::uint64_t seed,
                        const EmOptions& opt = {}) {
  return em_fit<Family>(std::span<const typename Family::Point>(points), k, seed, opt);
}

}  // namespace hyperstat
