#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "hyperstat/hyperboloid.hpp"
#include "hyperstat/montecarlo.hpp"
#include "hyperstat/poincare.hpp"
#include "oracles.hpp"
#include "stats.hpp"

using namespace hyperstat;
using namespace hyperstat::mc;
namespace hb = hyperstat::hyperboloid;
namespace pc = hyperstat::poincare;

namespace {

const LorentzParam k100{1, 0, 0}, k211{2, 1, 1}, k311{3, 1, 1}, k411{4, 1, 1}, k432{4, 3, 2};

McConfig cfg(std::size_t n, std::uint64_t seed, unsigned shards = 4) { return McConfig{n, seed, shards}; }

void expect_same(const McEstimate& a, const McEstimate& b) {
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.sample_variance, b.sample_variance);
  EXPECT_EQ(a.ci95_lo, b.ci95_lo);
  EXPECT_EQ(a.tail_index, b.tail_index);
}

}  // namespace

TEST(FGenerator, ValuesAndIntegrand) {
  const auto tv = FGenerator::total_variation(), kl = FGenerator::kl(), he = FGenerator::squared_hellinger(),
             ny = FGenerator::neyman_chi2();
  for (const auto* f : {&tv, &kl, &he, &ny}) EXPECT_EQ((*f)(1.0), 0.0) << f->name();
  EXPECT_DOUBLE_EQ(tv(3.0), 1.0);
  EXPECT_DOUBLE_EQ(kl(std::exp(-2.0)), 2.0);
  EXPECT_DOUBLE_EQ(he(4.0), 0.5);
  EXPECT_DOUBLE_EQ(ny(3.0), 4.0);
  const auto cu = FGenerator::custom([](double u) { return u * std::log(u); }, "rkl");
  EXPECT_EQ(cu.name(), "rkl");
  for (double lp : {-3.0, 0.2}) {
    for (double lq : {-5.0, -3.0, 1.0}) {
      for (double lw : {0.0, 1.5}) {
        const double p = std::exp(lp), q = std::exp(lq), w = std::exp(lw);
        for (const auto* f : {&tv, &kl, &he, &ny, &cu}) {
          const double ref = w * p * (*f)(q / p);
          EXPECT_NEAR(f->integrand(lp, lq, lw), ref, 1e-12 * std::max(1.0, std::abs(ref))) << f->name();
        }
      }
    }
  }
  // deep tails underflow to zero rather than NaN
  EXPECT_EQ(tv.integrand(-800, -900, 0), 0.0);
  EXPECT_EQ(he.integrand(-800, -900, 0), 0.0);
  EXPECT_FALSE(std::isnan(ny.integrand(-800, -790, 0)));
}

TEST(Proposal, DensitiesNormalizedAndScaled) {
  for (auto kind : {ProposalKind::logistic, ProposalKind::student_t7}) {
    for (double s : {0.5, 1.0, 2.13}) {
      const Proposal p{kind, s};
      const double mass =
          oracle::integrate([&](double x) { return std::exp(p.log_density(x)); }, -oracle::kInf, oracle::kInf);
      EXPECT_NEAR(mass, 1.0, 1e-10);
      EXPECT_NEAR(p.log_density(0.7 * s), Proposal::standard_log_density(kind, 0.7) - std::log(s), 1e-14);
    }
  }
  boost::math::students_t t7(7);
  for (double x : {-3.0, 0.0, 1.2}) {
    EXPECT_NEAR(Proposal::standard_log_density(ProposalKind::student_t7, x), std::log(boost::math::pdf(t7, x)), 1e-13);
    EXPECT_NEAR(Proposal::standard_log_density(ProposalKind::logistic, x),
                -x - 2 * std::log1p(std::exp(-x)), 1e-13);
  }
  EXPECT_THROW((Proposal{ProposalKind::logistic, 0.0}.validate()), std::invalid_argument);
}

TEST(Proposal, DrawsFollowTheLaw) {
  boost::math::students_t t7(7);
  for (auto kind : {ProposalKind::logistic, ProposalKind::student_t7}) {
    const Proposal p{kind, 1.7};
    Rng rng({90, static_cast<std::uint64_t>(kind)});
    std::vector<double> xs(100000);
    for (auto& x : xs) x = p.draw(rng);
    std::sort(xs.begin(), xs.end());
    std::vector<double> cdf(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double z = xs[i] / p.sigma;
      cdf[i] = kind == ProposalKind::logistic ? 1.0 / (1.0 + std::exp(-z)) : boost::math::cdf(t7, z);
    }
    EXPECT_GT(stats::ks_pvalue(stats::ks_statistic(cdf), static_cast<double>(xs.size())), 0.01) << to_string(kind);
  }
}

TEST(ErrorBound, Examples) {
  EXPECT_DOUBLE_EQ(error_bound(1.0, 1000000, 0.01), 2.0 * std::exp(-100.0));
  EXPECT_NEAR(error_bound(1.0, 1, 1e-9), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(error_bound(10.0, 100, 0.1), 2.0 * std::min(100.0 / 104.0, std::exp(-0.01)));
  double prev = 3.0;
  for (std::size_t n = 1; n < 10000000; n *= 3) {
    const double b = error_bound(2.0, n, 0.05);
    EXPECT_LE(b, prev);
    prev = b;
  }
  EXPECT_THROW(error_bound(0.0, 10, 0.1), std::invalid_argument);
  EXPECT_THROW(error_bound(1.0, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(error_bound(1.0, 10, 0.0), std::invalid_argument);
}

TEST(Estimators, IdenticalParametersGiveZero) {
  const auto tv = FGenerator::total_variation();
  for (Method m : {Method::plugin, Method::mc1_logistic, Method::mc1_t7, Method::mc2}) {
    EstimateOptions opt;
    opt.sigma = 1.3;
    const McEstimate e = estimate(tv, k211, k211, m, cfg(20000, 1), opt);
    EXPECT_EQ(e.estimate, 0.0) << to_string(m);
    EXPECT_EQ(e.sample_variance, 0.0);
  }
  const McEstimate p = estimate_for_poincare(FGenerator::kl(), SpdParam2(2, 0.3, 1), SpdParam2(2, 0.3, 1),
                                             Method::plugin, cfg(20000, 2));
  EXPECT_EQ(p.estimate, 0.0);
}

TEST(Estimators, DeterministicForFixedSeedAndShards) {
  const auto tv = FGenerator::total_variation();
  for (Method m : {Method::plugin, Method::mc1_logistic, Method::mc1_t7, Method::mc2}) {
    EstimateOptions opt;
    opt.n_pilot = 10000;
    const McEstimate a = estimate(tv, k100, k211, m, cfg(50000, 7, 8), opt);
    const McEstimate b = estimate(tv, k100, k211, m, cfg(50000, 7, 8), opt);
    expect_same(a, b);
    EXPECT_EQ(a.sigma, b.sigma);
    const McEstimate c = estimate(tv, k100, k211, m, cfg(50000, 8, 8), opt);
    EXPECT_NE(a.estimate, c.estimate);
  }
}

TEST(Estimators, IndependentOfWorkerCount) {
  const auto tv = FGenerator::total_variation();
  setenv("HYPERSTAT_THREADS", "1", 1);
  const McEstimate a = estimate_mc2(tv, k100, k432, cfg(40000, 3, 6));
  setenv("HYPERSTAT_THREADS", "5", 1);
  const McEstimate b = estimate_mc2(tv, k100, k432, cfg(40000, 3, 6));
  unsetenv("HYPERSTAT_THREADS");
  expect_same(a, b);
}

TEST(Estimators, ConfidenceIntervalShape) {
  const McEstimate e = estimate_plugin(FGenerator::total_variation(), k311, k411, cfg(100000, 4));
  EXPECT_EQ(e.n, 100000u);
  EXPECT_EQ(e.method, "plugin");
  EXPECT_GE(e.sample_variance, 0.0);
  EXPECT_NEAR(e.ci95_hi - e.estimate, 1.96 * std::sqrt(e.sample_variance / e.n), 1e-15);
  EXPECT_NEAR(e.estimate - e.ci95_lo, 1.96 * std::sqrt(e.sample_variance / e.n), 1e-15);
  EXPECT_EQ(e.seed, purpose_stream(4, StreamPurpose::estimation));
}

TEST(Estimators, ClosedFormGeneratorsWithinFourStandardErrors) {
  const std::vector<std::pair<LorentzParam, LorentzParam>> pairs = {{k100, k211}, {k311, k411}};
  std::uint64_t seed = 100;
  for (const auto& [p, q] : pairs) {
    const std::vector<std::pair<FGenerator, double>> gens = {{FGenerator::kl(), hb::kld(p, q)},
                                                            {FGenerator::squared_hellinger(), hb::hellinger_sq(p, q)}};
    for (const auto& [f, exact] : gens) {
      for (Method m : {Method::plugin, Method::mc1_logistic, Method::mc1_t7, Method::mc2}) {
        EstimateOptions opt;
        opt.n_pilot = 20000;
        const McEstimate e = estimate(f, p, q, m, cfg(200000, seed++), opt);
        EXPECT_NEAR(e.estimate, exact, 4 * e.standard_error()) << f.name() << " " << to_string(m);
      }
    }
  }
}

TEST(Estimators, MatchQuadratureOfTotalVariation) {
  // total variation has no closed form; the oracle integrates |p - q| / 2 directly
  const double tv = oracle::hyperboloid_tv({1, 0, 0}, {2, 1, 1});
  EXPECT_NEAR(tv, 0.4686, 5e-3);
  for (Method m : {Method::plugin, Method::mc1_logistic, Method::mc1_t7, Method::mc2}) {
    EstimateOptions opt;
    opt.n_pilot = 20000;
    const McEstimate e = estimate(FGenerator::total_variation(), k100, k211, m, cfg(400000, 11), opt);
    EXPECT_NEAR(e.estimate, tv, 4 * e.standard_error() + 1e-4) << to_string(m);
  }
}

TEST(SigmaOptimization, ReferenceOptima) {
  const auto tv = FGenerator::total_variation();
  const double s_logis = optimize_sigma(tv, k100, k211, ProposalKind::logistic, 100000, 1);
  const double s_t7 = optimize_sigma(tv, k100, k211, ProposalKind::student_t7, 100000, 1);
  EXPECT_NEAR(s_logis, 1.35, 0.1);
  EXPECT_NEAR(s_t7, 2.13, 0.15);
  for (auto kind : {ProposalKind::logistic, ProposalKind::student_t7}) {
    const double s = kind == ProposalKind::logistic ? s_logis : s_t7;
    Rng rng(purpose_stream(1, StreamPurpose::pilot));
    const SigmaObjective obj(tv, k100, k211, kind, 100000, rng, s);
    EXPECT_LE(obj(s), obj(1.0));
    EXPECT_LE(obj(s), obj(s * 1.05));
    EXPECT_LE(obj(s), obj(s / 1.05));
  }
  EXPECT_THROW(optimize_sigma(tv, k100, k211, ProposalKind::logistic, 9999, 1), std::invalid_argument);
}

TEST(SigmaOptimization, ReducesRealizedVariance) {
  const auto tv = FGenerator::total_variation();
  const double s = optimize_sigma(tv, k100, k211, ProposalKind::logistic, 100000, 2);
  const McEstimate opt = estimate_mc1(tv, k100, k211, {ProposalKind::logistic, s}, cfg(200000, 3));
  const McEstimate unit = estimate_mc1(tv, k100, k211, {ProposalKind::logistic, 1.0}, cfg(200000, 3));
  EXPECT_LT(opt.sample_variance, unit.sample_variance);
  EXPECT_EQ(opt.sigma, s);
}

TEST(TailDiagnostics, FlagsInfiniteVariancePlugin) {
  // the plug-in weight p'/p has infinite variance iff 2 theta' - theta leaves the cone
  const auto tv = FGenerator::total_variation();
  ASSERT_FALSE(combination_in_cone(2.0, k432, -1.0, k100));
  ASSERT_TRUE(combination_in_cone(2.0, k411, -1.0, k311));
  const McEstimate heavy = estimate_plugin(tv, k100, k432, cfg(1000000, 5));
  const McEstimate light = estimate_plugin(tv, k311, k411, cfg(1000000, 5));
  ASSERT_TRUE(heavy.tail_index.has_value());
  ASSERT_TRUE(light.tail_index.has_value());
  EXPECT_TRUE(heavy.infinite_variance_suspected) << *heavy.tail_index;
  EXPECT_FALSE(light.infinite_variance_suspected) << *light.tail_index;
}

TEST(SupProbe, BoundsObservedIntegrandForT7) {
  const auto tv = FGenerator::total_variation();
  const Proposal p{ProposalKind::student_t7, 2.1};
  const double sup = probe_sup_mc1(tv, k100, k211, p, 400);
  EXPECT_TRUE(std::isfinite(sup));
  EXPECT_GT(sup, 0.0);
  const ChartLogDensity2 lp(k100), lq(k211);
  Rng rng({91, 0});
  double seen = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double z = p.draw(rng), w = p.draw(rng);
    seen = std::max(seen, tv.integrand(lp(z, w), lq(z, w), -p.log_density(z) - p.log_density(w)));
  }
  EXPECT_LE(seen, sup * 1.01);
  EstimateOptions opt;
  opt.sigma = 2.1;
  opt.probe_sup = true;
  const McEstimate e = estimate(tv, k100, k211, Method::mc1_t7, cfg(1000, 1), opt);
  ASSERT_TRUE(e.sup_bound.has_value());
}

TEST(PoincareBridge, ClosedFormsThroughCorrespondence) {
  const SpdParam2 a(4, 0.25, 0.5), b(0.5, 0.25, 2);
  EstimateOptions opt;
  opt.n_pilot = 20000;
  const McEstimate k = estimate_for_poincare(FGenerator::kl(), a, b, Method::mc1_t7, cfg(1000000, 12), opt);
  EXPECT_NEAR(k.estimate, 5.3606, 0.05);
  EXPECT_NEAR(k.estimate, pc::kld(a, b), 4 * k.standard_error());
  const McEstimate h = estimate_for_poincare(FGenerator::squared_hellinger(), SpdParam2::identity(),
                                             SpdParam2(0.5, 0, 2), Method::plugin, cfg(1000000, 13));
  EXPECT_NEAR(h.estimate, 0.164907, 0.005);
  EXPECT_NEAR(h.estimate, pc::hellinger_sq(SpdParam2::identity(), SpdParam2(0.5, 0, 2)), 4 * h.standard_error());
}

TEST(Estimators, RejectOtherDimensions) {
  EXPECT_THROW(estimate_mc2(FGenerator::kl(), LorentzParam{2, 0, 0, 0}, LorentzParam{3, 0, 0, 0}, cfg(10, 1)),
               unsupported_dimension);
  EXPECT_THROW(estimate_mc2(FGenerator::kl(), k100, k211, cfg(10, 1), 0.0), std::invalid_argument);
  EXPECT_THROW(estimate_plugin(FGenerator::kl(), k100, k211, cfg(10, 1, 0)), std::invalid_argument);
}
