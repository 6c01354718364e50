#pragma once

// Monte Carlo estimators of f-divergences between hyperboloid distributions on L^2
// (and, through the correspondence, Poincare distributions):
//   plug-in        mean of f(q/p) under p
//   MC1            importance sampling with a product proposal p_sigma x p_sigma
//   MC2            crude Monte Carlo after the polar change of variables
// All estimators shard their sample over independent substreams and merge the
// partial moments in shard order, so a result depends only on (seed, n, shards).

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hyperstat/geometry.hpp"
#include "hyperstat/hyperboloid.hpp"
#include "hyperstat/numerics.hpp"
#include "hyperstat/rng.hpp"
#include "hyperstat/sampling.hpp"

namespace hyperstat::mc {

enum class FKind { total_variation, kl, squared_hellinger, neyman_chi2, custom };

/// Convex generator f with f(1) = 0; D_f[p : q] = integral of p f(q / p).
class FGenerator {
 public:
  static FGenerator total_variation() { return FGenerator(FKind::total_variation, "tv"); }
  static FGenerator kl() { return FGenerator(FKind::kl, "kl"); }
  static FGenerator squared_hellinger() { return FGenerator(FKind::squared_hellinger, "hellinger"); }
  static FGenerator neyman_chi2() { return FGenerator(FKind::neyman_chi2, "neyman"); }
  static FGenerator custom(std::function<double(double)> f, std::string name = "custom") {
    FGenerator g(FKind::custom, std::move(name));
    g.f_ = std::move(f);
    return g;
  }

  [[nodiscard]] FKind kind() const { return kind_; }
  [[nodiscard]] const std::string& name() const { return name_; }

  /// f(u)
  [[nodiscard]] double operator()(double u) const {
    switch (kind_) {
      case FKind::total_variation: return 0.5 * std::abs(u - 1.0);
      case FKind::kl: return -std::log(u);
      case FKind::squared_hellinger: return 0.5 * (std::sqrt(u) - 1.0) * (std::sqrt(u) - 1.0);
      case FKind::neyman_chi2: return (u - 1.0) * (u - 1.0);
      case FKind::custom: return f_(u);
    }
    return 0.0;
  }

  /// exp(lw) * p * f(q / p) given lp = log p, lq = log q, evaluated in log space where possible.
  [[nodiscard]] double integrand(double lp, double lq, double lw) const {
    switch (kind_) {
      case FKind::total_variation: {
        const double hi = std::max(lp, lq);
        return 0.5 * std::exp(hi + lw) * -std::expm1(-std::abs(lp - lq));
      }
      case FKind::kl: return std::exp(lp + lw) * (lp - lq);
      case FKind::squared_hellinger: {
        const double d = std::exp(0.5 * (lq + lw)) - std::exp(0.5 * (lp + lw));
        return 0.5 * d * d;
      }
      case FKind::neyman_chi2: {
        // (q - p)^2 / p
        const double e = std::expm1(lq - lp);
        return std::exp(lp + lw) * e * e;
      }
      case FKind::custom: return std::exp(lp + lw) * f_(std::exp(lq - lp));
    }
    return 0.0;
  }

 private:
  FGenerator(FKind k, std::string name) : kind_(k), name_(std::move(name)) {}
  FKind kind_;
  std::string name_;
  std::function<double(double)> f_;
};

/// log p_theta on the chart of L^2 with the normalizer cached.
class ChartLogDensity2 {
 public:
  explicit ChartLogDensity2(const LorentzParam& theta) {
    if (theta.d() != 2) throw unsupported_dimension("Monte Carlo estimators are available for d = 2 only");
    t0_ = theta[0];
    t1_ = theta[1];
    t2_ = theta[2];
    log_norm_ = hyperboloid::log_normalizer(2, theta.minkowski_norm());
  }
  double operator()(double x1, double x2) const {
    const double r2 = x1 * x1 + x2 * x2;
    const double x0 = std::sqrt(1.0 + r2);
    return log_norm_ - (t0_ * x0 - t1_ * x1 - t2_ * x2) - 0.5 * std::log1p(r2);
  }

 private:
  double t0_ = 0.0, t1_ = 0.0, t2_ = 0.0, log_norm_ = 0.0;
};

enum class ProposalKind { logistic, student_t7 };

inline std::string to_string(ProposalKind k) { return k == ProposalKind::logistic ? "logistic" : "student_t7"; }

/// Scale family p_sigma(x) = p(x / sigma) / sigma of a standard logistic or Student t_7 law.
struct Proposal {
  ProposalKind kind = ProposalKind::logistic;
  double sigma = 1.0;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("proposal: sigma > 0 required");
  }

  static double standard_log_density(ProposalKind kind, double x) {
    if (kind == ProposalKind::logistic) {
      const double a = std::abs(x);
      return -a - 2.0 * std::log1p(std::exp(-a));
    }
    static const double log_c = std::lgamma(4.0) - std::lgamma(3.5) - 0.5 * std::log(7.0 * std::numbers::pi);
    return log_c - 4.0 * std::log1p(x * x / 7.0);
  }

  static double standard_draw(ProposalKind kind, Rng& rng) {
    if (kind == ProposalKind::logistic) {
      const double u = rng.uniform();
      return std::log(u) - std::log1p(-u);
    }
    const double z = rng.normal();
    double chi2 = 0.0;
    for (int i = 0; i < 7; ++i) {
      const double g = rng.normal();
      chi2 += g * g;
    }
    return z / std::sqrt(chi2 / 7.0);
  }

  [[nodiscard]] double log_density(double x) const { return standard_log_density(kind, x / sigma) - std::log(sigma); }
  double draw(Rng& rng) const { return sigma * standard_draw(kind, rng); }
};

enum class Method { plugin, mc1_logistic, mc1_t7, mc2 };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::plugin: return "plugin";
    case Method::mc1_logistic: return "mc1-logistic";
    case Method::mc1_t7: return "mc1-t7";
    case Method::mc2: return "mc2";
  }
  return "";
}

struct McEstimate {
  std::string method;
  double estimate = 0.0;
  double sample_variance = 0.0;
  std::size_t n = 0;
  RngStream seed;
  unsigned shards = 1;
  double ci95_lo = 0.0, ci95_hi = 0.0;
  std::optional<double> sup_bound;  // a probe-grid maximum (an estimate, never a proof) or user-supplied
  std::optional<double> sigma;
  std::optional<double> tail_index;  // Hill estimate on the largest |g| values
  bool infinite_variance_suspected = false;

  [[nodiscard]] double standard_error() const {
    return n > 0 ? std::sqrt(sample_variance / static_cast<double>(n)) : 0.0;
  }
};

struct McConfig {
  std::size_t n = 1000000;
  std::uint64_t seed = 0;
  unsigned shards = 1;
};

/// 2 min{s^2 / (s^2 + 4 n t^2), exp(-n t^2 / s^2)} for an integrand bounded by s.
inline double error_bound(double sup_bound, std::size_t n, double t) {
  if (!(sup_bound > 0.0) || n < 1 || !(t > 0.0)) throw std::invalid_argument("error_bound: sup > 0, n >= 1, t > 0");
  const double s2 = sup_bound * sup_bound;
  const double nt2 = static_cast<double>(n) * t * t;
  return 2.0 * std::min(s2 / (s2 + 4.0 * nt2), std::exp(-nt2 / s2));
}

/// Worker count: HYPERSTAT_THREADS if set, else hardware parallelism.
inline unsigned worker_limit() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HYPERSTAT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

namespace detail {

// Keeps the k largest values seen.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}
  void add(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) return;
    if (heap_.size() < k_) {
      heap_.push(v);
    } else if (v > heap_.top()) {
      heap_.pop();
      heap_.push(v);
    }
  }
  void merge(const TopK& o) {
    auto copy = o.heap_;
    while (!copy.empty()) {
      add(copy.top());
      copy.pop();
    }
  }
  [[nodiscard]] std::vector<double> sorted_desc() const {
    auto copy = heap_;
    std::vector<double> out;
    while (!copy.empty()) {
      out.push_back(copy.top());
      copy.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<double, std::vector<double>, std::greater<>> heap_;
};

// Hill estimator of the tail index from the k+1 largest values.
inline std::optional<double> hill_tail_index(const std::vector<double>& desc) {
  if (desc.size() < 11) return std::nullopt;
  const std::size_t k = desc.size() - 1;
  const double ref = desc[k];
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(desc[i] / ref);
  if (!(acc > 0.0)) return std::nullopt;
  return static_cast<double>(k) / acc;
}

struct ShardResult {
  RunningMoments moments;
  TopK top{1};
};

// Runs `body(rng, count, moments, top)` on each shard and merges in shard order.
template <typename Body>
McEstimate run_sharded(const std::string& method, const McConfig& cfg, const RngStream& base, Body&& body) {
  if (cfg.shards < 1) throw std::invalid_argument("shards >= 1 required");
  const std::size_t shards = cfg.shards;
  const std::size_t tail_k =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(cfg.n))), 10, 10000);
  std::vector<ShardResult> results(shards);
  for (auto& r : results) r.top = TopK(tail_k + 1);

  auto run_one = [&](std::size_t k) {
    const std::size_t count = cfg.n / shards + (k < cfg.n % shards ? 1 : 0);
    Rng rng(base.substream(k));
    body(rng, count, results[k].moments, results[k].top);
  };

  const unsigned workers = std::min<unsigned>(static_cast<unsigned>(shards), worker_limit());
  if (workers <= 1) {
    for (std::size_t k = 0; k < shards; ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < shards; k = next++) run_one(k);
      });
    }
    for (auto& t : pool) t.join();
  }

  RunningMoments total;
  TopK top(tail_k + 1);
  for (const auto& r : results) {
    total.merge(r.moments);
    top.merge(r.top);
  }
  McEstimate out;
  out.method = method;
  out.estimate = total.mean;
  out.sample_variance = total.variance();
  out.n = cfg.n;
  out.seed = base;
  out.shards = cfg.shards;
  const double half = 1.96 * out.standard_error();
  out.ci95_lo = out.estimate - half;
  out.ci95_hi = out.estimate + half;
  out.tail_index = hill_tail_index(top.sorted_desc());
  out.infinite_variance_suspected = out.tail_index.has_value() && *out.tail_index < 2.0;
  return out;
}

}  // namespace detail

inline RngStream estimation_stream(std::uint64_t seed) { return purpose_stream(seed, StreamPurpose::estimation); }

/// Mean of f(p_{theta'} / p_theta) over draws from P_theta.
inline McEstimate estimate_plugin(const FGenerator& f, const LorentzParam& theta, const LorentzParam& theta2,
                                  const McConfig& cfg) {
  const ChartLogDensity2 lp(theta), lq(theta2);
  return detail::run_sharded("plugin", cfg, estimation_stream(cfg.seed),
                             [&](Rng& rng, std::size_t count, RunningMoments& m, detail::TopK& top) {
                               HyperboloidSampler sampler(theta);
                               for (std::size_t i = 0; i < count; ++i) {
                                 const HyperboloidPoint x = sampler(rng);
                                 const double a = lp(x[0], x[1]);
                                 const double g = f.integrand(a, lq(x[0], x[1]), -a);
                                 m.add(g);
                                 top.add(std::abs(g));
                               }
                             });
}

/// Importance sampling with pairs drawn from p_sigma x p_sigma.
inline McEstimate estimate_mc1(const FGenerator& f, const LorentzParam& theta, const LorentzParam& theta2,
                               const Proposal& proposal, const McConfig& cfg) {
  proposal.validate();
  const ChartLogDensity2 lp(theta), lq(theta2);
  const std::string name = proposal.kind == ProposalKind::logistic ? "mc1-logistic" : "mc1-t7";
  McEstimate out = detail::run_sharded(name, cfg, estimation_stream(cfg.seed),
                                       [&](Rng& rng, std::size_t count, RunningMoments& m, detail::TopK& top) {
                                         for (std::size_t i = 0; i < count; ++i) {
                                           const double z = proposal.draw(rng);
                                           const double w = proposal.draw(rng);
                                           const double lw = -proposal.log_density(z) - proposal.log_density(w);
                                           const double g = f.integrand(lp(z, w), lq(z, w), lw);
                                           m.add(g);
                                           top.add(std::abs(g));
                                         }
                                       });
  out.sigma = proposal.sigma;
  return out;
}

/// Crude Monte Carlo over (r, zeta) in (0, 1 - eps) x (0, 2 pi) with x = r (cos zeta, sin zeta) / sqrt(1 - r^2).
/// The mass outside r < 1 - eps is dropped.
inline McEstimate estimate_mc2(const FGenerator& f, const LorentzParam& theta, const LorentzParam& theta2,
                               const McConfig& cfg, double eps = 1e-4) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("estimate_mc2: 0 < eps < 1 required");
  const ChartLogDensity2 lp(theta), lq(theta2);
  const double rmax = 1.0 - eps;
  const double log_const = std::log(2.0 * std::numbers::pi * rmax);
  return detail::run_sharded("mc2", cfg, estimation_stream(cfg.seed),
                             [&](Rng& rng, std::size_t count, RunningMoments& m, detail::TopK& top) {
                               for (std::size_t i = 0; i < count; ++i) {
                                 const double r = rng.uniform(0.0, rmax);
                                 const double zeta = rng.uniform(0.0, 2.0 * std::numbers::pi);
                                 const double one_m = (1.0 - r) * (1.0 + r);
                                 const double rho = r / std::sqrt(one_m);
                                 const double x1 = rho * std::cos(zeta), x2 = rho * std::sin(zeta);
                                 const double lw = log_const + std::log(r) - 2.0 * std::log(one_m);
                                 const double g = f.integrand(lp(x1, x2), lq(x1, x2), lw);
                                 m.add(g);
                                 top.add(std::abs(g));
                               }
                             });
}

struct SigmaSearch {
  double lo = 0.05;
  double hi = 50.0;
  int grid = 41;
  double log_tol = 1e-6;
  int rounds = 3;
};

/// Second moment of the MC1 integrand as a function of sigma, estimated on a fixed pilot
/// sample drawn from the proposal at scale `pilot_sigma` (common random numbers across sigma).
class SigmaObjective {
 public:
  SigmaObjective(const FGenerator& f, const LorentzParam& theta, const LorentzParam& theta2, ProposalKind kind,
                 std::size_t n_pilot, Rng& rng, double pilot_sigma = 1.0)
      : kind_(kind) {
    const ChartLogDensity2 lp(theta), lq(theta2);
    const Proposal pilot{kind, pilot_sigma};
    z_.reserve(n_pilot);
    w_.reserve(n_pilot);
    a_.reserve(n_pilot);
    for (std::size_t i = 0; i < n_pilot; ++i) {
      const double z = pilot_sigma * Proposal::standard_draw(kind, rng);
      const double w = pilot_sigma * Proposal::standard_draw(kind, rng);
      const double h = f.integrand(lp(z, w), lq(z, w), 0.0);
      if (h == 0.0 || !std::isfinite(h)) continue;
      z_.push_back(z);
      w_.push_back(w);
      a_.push_back(2.0 * std::log(std::abs(h)) - pilot.log_density(z) - pilot.log_density(w));
    }
    n_ = static_cast<double>(n_pilot);
  }

  double operator()(double sigma) const {
    const Proposal p{kind_, sigma};
    CompensatedSum s;
    for (std::size_t i = 0; i < a_.size(); ++i) s.add(std::exp(a_[i] - p.log_density(z_[i]) - p.log_density(w_[i])));
    return s.value() / n_;
  }

 private:
  ProposalKind kind_;
  std::vector<double> z_, w_, a_;
  double n_ = 1.0;
};

namespace detail {

inline double minimize_objective(const SigmaObjective& obj, const SigmaSearch& search) {
  const double llo = std::log(search.lo), lhi = std::log(search.hi);
  const double step = (lhi - llo) / (search.grid - 1);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < search.grid; ++i) {
    const double v = obj(std::exp(llo + step * i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = llo + step * std::max(0, best - 1);
  const double b = llo + step * std::min(search.grid - 1, best + 1);
  return std::exp(golden_section_minimize([&](double ls) { return obj(std::exp(ls)); }, a, b, search.log_tol).x);
}

}  // namespace detail

/// Minimizes the pilot second moment over sigma. Each round redraws the pilot at the previous
/// round's optimum; a unit-scale pilot alone undersamples the tails that decide large sigma.
inline double optimize_sigma(const FGenerator& f, const LorentzParam& theta, const LorentzParam& theta2,
                             ProposalKind kind, std::size_t n_pilot, std::uint64_t seed,
                             const SigmaSearch& search = {}) {
  if (n_pilot < 10000) throw std::invalid_argument("optimize_sigma: n_pilot >= 10^4 required");
  if (search.rounds < 1) throw std::invalid_argument("optimize_sigma: rounds >= 1 required");
  Rng rng(purpose_stream(seed, StreamPurpose::pilot));
  double sigma = 1.0;
  for (int r = 0; r < search.rounds; ++r) {
    const SigmaObjective obj(f, theta, theta2, kind, n_pilot, rng, sigma);
    sigma = detail::minimize_objective(obj, search);
  }
  return sigma;
}

/// Largest |g| of the MC1 integrand over a grid x = sigma sinh(u), u in [-span, span]^2.
/// A probe only: the true supremum may be larger.
inline double probe_sup_mc1(const FGenerator& f, const LorentzParam& theta, const LorentzParam& theta2,
                            const Proposal& proposal, int grid = 1000, double span = 12.0) {
  const ChartLogDensity2 lp(theta), lq(theta2);
  std::vector<double> xs(static_cast<std::size_t>(grid)), lpx(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    xs[static_cast<std::size_t>(i)] = proposal.sigma * std::sinh(-span + 2.0 * span * i / (grid - 1));
    lpx[static_cast<std::size_t>(i)] = proposal.log_density(xs[static_cast<std::size_t>(i)]);
  }
  double sup = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double z = xs[static_cast<std::size_t>(i)], w = xs[static_cast<std::size_t>(j)];
      const double lw = -lpx[static_cast<std::size_t>(i)] - lpx[static_cast<std::size_t>(j)];
      const double g = std::abs(f.integrand(lp(z, w), lq(z, w), lw));
      if (std::isfinite(g)) sup = std::max(sup, g);
    }
  }
  return sup;
}

struct EstimateOptions {
  std::optional<double> sigma;  // MC1 scale; optimized on the pilot stream when absent
  std::size_t n_pilot = 100000;
  double eps = 1e-4;            // MC2 truncation
  bool probe_sup = false;
};

/// Dispatches to one of the four estimators.
inline McEstimate estimate(const FGenerator& f, const LorentzParam& theta, const LorentzParam& theta2, Method method,
                           const McConfig& cfg, const EstimateOptions& opt = {}) {
  switch (method) {
    case Method::plugin: return estimate_plugin(f, theta, theta2, cfg);
    case Method::mc2: return estimate_mc2(f, theta, theta2, cfg, opt.eps);
    case Method::mc1_logistic:
    case Method::mc1_t7: {
      const ProposalKind kind = method == Method::mc1_logistic ? ProposalKind::logistic : ProposalKind::student_t7;
      const double sigma = opt.sigma ? *opt.sigma : optimize_sigma(f, theta, theta2, kind, opt.n_pilot, cfg.seed);
      const Proposal p{kind, sigma};
      McEstimate out = estimate_mc1(f, theta, theta2, p, cfg);
      if (opt.probe_sup) out.sup_bound = probe_sup_mc1(f, theta, theta2, p);
      return out;
    }
  }
  throw std::invalid_argument("unknown method");
}

/// Poincare pair: mapped to L^2 by param_h_to_l; f-divergences are unchanged by the map.
inline McEstimate estimate_for_poincare(const FGenerator& f, const SpdParam2& theta, const SpdParam2& theta2,
                                        Method method, const McConfig& cfg, const EstimateOptions& opt = {}) {
  return estimate(f, param_h_to_l(theta), param_h_to_l(theta2), method, cfg, opt);
}

}  // namespace hyperstat::mc
