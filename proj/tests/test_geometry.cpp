#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "hyperstat/geometry.hpp"

using namespace hyperstat;

namespace {

void expect_param_eq(const SpdParam2& p, double a, double b, double c, double tol) {
  EXPECT_NEAR(p.a(), a, tol);
  EXPECT_NEAR(p.b(), b, tol);
  EXPECT_NEAR(p.c(), c, tol);
}

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST(SpdParam2, ConeValidation) {
  EXPECT_NO_THROW(SpdParam2(1, 0, 1));
  try {
    SpdParam2(1, 2, 1);
    FAIL();
  } catch (const cone_violation& e) {
    EXPECT_NE(std::string(e.what()).find("ac - b^2 > 0"), std::string::npos);
  }
  try {
    SpdParam2(-1, 0, 1);
    FAIL();
  } catch (const cone_violation& e) {
    EXPECT_NE(std::string(e.what()).find("a > 0"), std::string::npos);
  }
  EXPECT_THROW(SpdParam2(1, 0, -1), cone_violation);
  EXPECT_THROW(SpdParam2(1, 1, 1), cone_violation);
  EXPECT_THROW(SpdParam2(1e6, 1e6 * (1 - 1e-14), 1e6), cone_violation);
}

TEST(SpdParam2, FromMatrixRejectsAsymmetry) {
  Eigen::Matrix2d m;
  m << 4, 0.5, 0.25, 0.5;
  EXPECT_THROW(SpdParam2::from_matrix(m), cone_violation);
  m << 4, 0.25, 0.25, 0.5;
  EXPECT_NEAR(SpdParam2::from_matrix(m).det(), 1.9375, 1e-15);
}

TEST(Minkowski, InnerProduct) {
  EXPECT_EQ(minkowski_inner(vec3(1, 0, 0), vec3(1, 0, 0)), 1.0);
  EXPECT_EQ(minkowski_inner(vec3(2, 1, 1), vec3(2, 1, 1)), 2.0);
  EXPECT_EQ(minkowski_inner(vec3(2, 1, 1), vec3(1, 0, 0)), 2.0);
  EXPECT_THROW(minkowski_inner(vec3(1, 0, 0), Eigen::VectorXd::Zero(4)), dimension_mismatch);
}

TEST(LorentzParam, ConeValidation) {
  EXPECT_NO_THROW((LorentzParam{2, 1, 1}));
  EXPECT_THROW((LorentzParam{1, 1, 0}), cone_violation);
  EXPECT_THROW((LorentzParam{-2, 0, 0}), cone_violation);
  EXPECT_THROW((LorentzParam{1, 0}), unsupported_dimension);
}

TEST(Mobius, ActPointExamples) {
  const UpperHalfPoint z(0.3, 1.7);
  const UpperHalfPoint w = mobius_act_point(Mobius::identity(), z);
  EXPECT_EQ(w.x(), z.x());
  EXPECT_EQ(w.y(), z.y());
  const UpperHalfPoint v = mobius_act_point(Mobius(1, 1, 1, 2), UpperHalfPoint(0, 1));
  EXPECT_NEAR(v.x(), 0.6, 1e-15);
  EXPECT_NEAR(v.y(), 0.2, 1e-15);
  EXPECT_THROW(Mobius(1, 1, 1, 1), std::domain_error);
}

TEST(Mobius, PreservesDistance) {
  Rng rng({11, 0});
  for (int i = 0; i < 200; ++i) {
    const Mobius g = random_mobius(rng);
    const UpperHalfPoint p(rng.uniform(-2, 2), std::exp(rng.uniform(-1, 1)));
    const UpperHalfPoint q(rng.uniform(-2, 2), std::exp(rng.uniform(-1, 1)));
    const double d0 = upper_half_distance(p, q);
    EXPECT_NEAR(upper_half_distance(mobius_act_point(g, p), mobius_act_point(g, q)), d0, 1e-12 * std::max(1.0, d0));
  }
}

TEST(Mobius, ActParamExamples) {
  const Mobius g(1, 1, 1, 2);
  expect_param_eq(mobius_act_param(Mobius::identity(), SpdParam2(4, 0.25, 0.5)), 4, 0.25, 0.5, 0.0);
  expect_param_eq(mobius_act_param(g, SpdParam2(4, 0.25, 0.5)), 15.5, -7.75, 4.0, 1e-12);
  expect_param_eq(mobius_act_param(g, SpdParam2(0.5, 0.25, 2)), 3.0, -2.25, 2.0, 1e-12);
}

TEST(Mobius, ActParamPreservesDeterminant) {
  Rng rng({12, 0});
  for (int i = 0; i < 500; ++i) {
    const SpdParam2 th = testgen::random_spd(rng);
    const SpdParam2 gth = mobius_act_param(random_mobius(rng), th);
    EXPECT_NEAR(gth.det() / th.det(), 1.0, 1e-12);
  }
}

TEST(PoincareInvariant, Examples) {
  const InvariantTriple s = poincare_invariant(SpdParam2::identity(), SpdParam2::identity());
  EXPECT_EQ(s.s1, 1.0);
  EXPECT_EQ(s.s2, 1.0);
  EXPECT_EQ(s.s3, 2.0);
  const InvariantTriple e = poincare_invariant(SpdParam2(4, 0.25, 0.5), SpdParam2(0.5, 0.25, 2));
  EXPECT_NEAR(e.s1, 1.9375, 1e-15);
  EXPECT_NEAR(e.s2, 0.9375, 1e-15);
  EXPECT_NEAR(e.s3, 4.193548387096774, 1e-12);
}

TEST(PoincareInvariant, InvariantUnderGroup) {
  Rng rng({13, 0});
  for (int i = 0; i < 100; ++i) {
    const SpdParam2 p = testgen::random_spd(rng), q = testgen::random_spd(rng);
    const Mobius g = random_mobius(rng);
    const InvariantTriple a = poincare_invariant(p, q);
    const InvariantTriple b = poincare_invariant(mobius_act_param(g, p), mobius_act_param(g, q));
    EXPECT_NEAR(a.s1, b.s1, 1e-10 * a.s1);
    EXPECT_NEAR(a.s2, b.s2, 1e-10 * a.s2);
    EXPECT_NEAR(a.s3, b.s3, 1e-10 * a.s3);
    // trace bound for SPD pairs
    EXPECT_GE(a.s3, 2.0 * std::sqrt(a.s2 / a.s1) * (1 - 1e-12));
  }
}

TEST(PoincareInvariant, DeterminantIdentities) {
  Rng rng({14, 0});
  for (int i = 0; i < 1000; ++i) {
    const SpdParam2 p = testgen::random_spd(rng), q = testgen::random_spd(rng);
    const InvariantTriple s = poincare_invariant(p, q);
    const double sum_det = (p.a() + q.a()) * (p.c() + q.c()) - (p.b() + q.b()) * (p.b() + q.b());
    EXPECT_NEAR(sum_det, s.s1 + s.s2 + s.s1 * s.s3, 1e-10 * std::max(1.0, sum_det));
    const double ma = 2 * q.a() - p.a(), mb = 2 * q.b() - p.b(), mc = 2 * q.c() - p.c();
    const double lhs = ma * mc - mb * mb;
    EXPECT_NEAR(lhs, 4 * s.s2 + s.s1 - 2 * s.s1 * s.s3, 1e-10 * std::max(1.0, std::abs(s.s1 * s.s3)));
  }
}

TEST(LorentzInvariant, ExamplesAndGroupInvariance) {
  const InvariantTriple a = lorentz_invariant(LorentzParam{1, 0, 0}, LorentzParam{1, 0, 0});
  EXPECT_EQ(a.s1, 1.0);
  EXPECT_EQ(a.s2, 1.0);
  EXPECT_EQ(a.s3, 1.0);
  const InvariantTriple b = lorentz_invariant(LorentzParam{2, 1, 1}, LorentzParam{1, 0, 0});
  EXPECT_EQ(b.s1, 2.0);
  EXPECT_EQ(b.s2, 1.0);
  EXPECT_EQ(b.s3, 2.0);
  Rng rng({15, 0});
  for (int i = 0; i < 100; ++i) {
    const LorentzParam p = testgen::random_lorentz(rng, 2), q = testgen::random_lorentz(rng, 2);
    const LorentzTransform A = lorentz_random_element(2, {15, static_cast<std::uint64_t>(i + 1)});
    const InvariantTriple s = lorentz_invariant(p, q);
    const InvariantTriple t = lorentz_invariant(lorentz_act_param(A, p), lorentz_act_param(A, q));
    EXPECT_NEAR(s.s1, t.s1, 1e-10 * s.s1);
    EXPECT_NEAR(s.s2, t.s2, 1e-10 * s.s2);
    EXPECT_NEAR(s.s3, t.s3, 1e-10 * s.s3);
  }
}

TEST(LorentzRandomElement, Contract) {
  for (int d : {2, 3, 5}) {
    const LorentzTransform A = lorentz_random_element(d, {99, 1});
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(d + 1, d + 1);
    G.diagonal().tail(d).setConstant(-1.0);
    EXPECT_LT((A.matrix().transpose() * G * A.matrix() - G).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(A.matrix()(0, 0), 0.0);
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(d + 1);
    e0(0) = 1.0;
    const Eigen::VectorXd y = A.matrix() * e0;
    EXPECT_NEAR(minkowski_inner(y, y), 1.0, 1e-10);
  }
  const LorentzTransform A = lorentz_random_element(2, {1, 1});
  const LorentzTransform B = lorentz_random_element(2, {2, 1});
  EXPECT_GT((A.matrix() - B.matrix()).cwiseAbs().maxCoeff(), 1e-6);
  const LorentzTransform C = lorentz_random_element(2, {1, 1});
  EXPECT_EQ(A.matrix(), C.matrix());
}

TEST(LorentzTransform, RejectsNonLorentz) {
  EXPECT_THROW(LorentzTransform(Eigen::MatrixXd::Identity(3, 3) * 2.0), std::domain_error);
  Eigen::MatrixXd flip = Eigen::MatrixXd::Identity(3, 3);
  flip(0, 0) = -1.0;
  EXPECT_THROW(LorentzTransform{flip}, std::domain_error);
}

TEST(Correspondence, ParamExamples) {
  const LorentzParam l = param_h_to_l(SpdParam2::identity());
  EXPECT_EQ(l[0], 2.0);
  EXPECT_EQ(l[1], 0.0);
  EXPECT_EQ(l[2], 0.0);
  const LorentzParam e = param_h_to_l(SpdParam2(4, 0.25, 0.5));
  EXPECT_EQ(e[0], 4.5);
  EXPECT_EQ(e[1], 3.5);
  EXPECT_EQ(std::abs(e[2]), 0.5);
  EXPECT_NEAR(e.minkowski_sq(), 7.75, 1e-14);
  expect_param_eq(param_l_to_h(LorentzParam{2, 0, 0}), 1, 0, 1, 0.0);
  expect_param_eq(param_l_to_h(e), 4, 0.25, 0.5, 1e-15);
  EXPECT_THROW(param_l_to_h(LorentzParam{2, 0, 0, 0}), unsupported_dimension);
}

TEST(Correspondence, ParamRoundtripAndConePreservation) {
  Rng rng({16, 0});
  for (int i = 0; i < 1000; ++i) {
    const SpdParam2 p = testgen::random_spd(rng);
    const SpdParam2 back = param_l_to_h(param_h_to_l(p));
    expect_param_eq(back, p.a(), p.b(), p.c(), 1e-14 * std::max({1.0, p.a(), p.c()}));
    const LorentzParam l = testgen::random_lorentz(rng, 2);
    EXPECT_NO_THROW(param_l_to_h(l));
  }
}

TEST(Correspondence, InvariantTriples) {
  Rng rng({17, 0});
  for (int i = 0; i < 100; ++i) {
    const SpdParam2 p = testgen::random_spd(rng), q = testgen::random_spd(rng);
    const InvariantTriple h = poincare_invariant(p, q);
    const InvariantTriple l = lorentz_invariant(param_h_to_l(p), param_h_to_l(q));
    EXPECT_NEAR(l.s1, 4 * h.s1, 1e-10 * l.s1);
    EXPECT_NEAR(l.s2, 4 * h.s2, 1e-10 * l.s2);
    EXPECT_NEAR(l.s3, 2 * h.s1 * h.s3, 1e-10 * l.s3);
  }
}

TEST(Correspondence, PointExamples) {
  const HyperboloidPoint c = point_h_to_l(UpperHalfPoint(0, 1));
  EXPECT_EQ(c[0], 0.0);
  EXPECT_EQ(c[1], 0.0);
  const HyperboloidPoint p = point_h_to_l(UpperHalfPoint(1, 1));
  EXPECT_NEAR(p[0], -0.5, 1e-15);
  EXPECT_NEAR(p[1], 1.0, 1e-15);
  const UpperHalfPoint z0 = point_l_to_h(HyperboloidPoint(0, 0));
  EXPECT_EQ(z0.x(), 0.0);
  EXPECT_EQ(z0.y(), 1.0);
  const UpperHalfPoint z1 = point_l_to_h(HyperboloidPoint(-0.5, 1));
  EXPECT_NEAR(z1.x(), 1.0, 1e-15);
  EXPECT_NEAR(z1.y(), 1.0, 1e-15);
}

TEST(Correspondence, PointRoundtrip) {
  Rng rng({18, 0});
  for (int i = 0; i < 10000; ++i) {
    const HyperboloidPoint p(rng.normal() * 5, rng.normal() * 5);
    const UpperHalfPoint z = point_l_to_h(p);
    EXPECT_GT(z.y(), 0.0);
    const HyperboloidPoint back = point_h_to_l(z);
    EXPECT_NEAR(back[0], p[0], 1e-12 * std::max(1.0, std::abs(p[0])));
    EXPECT_NEAR(back[1], p[1], 1e-12 * std::max(1.0, std::abs(p[1])));
    const UpperHalfPoint w(rng.normal() * 3, std::exp(rng.uniform(-3, 3)));
    const UpperHalfPoint w2 = point_l_to_h(point_h_to_l(w));
    EXPECT_NEAR(w2.x(), w.x(), 1e-12 * std::max(1.0, std::abs(w.x())));
    EXPECT_NEAR(w2.y(), w.y(), 1e-12 * std::max(1.0, w.y()));
  }
}

TEST(Disk, ExamplesAndRoundtrip) {
  const auto c = point_h_to_disk(UpperHalfPoint(0, 1));
  EXPECT_NEAR(c.first, 0.0, 1e-16);
  EXPECT_NEAR(c.second, 0.0, 1e-16);
  const auto w = point_h_to_disk(UpperHalfPoint(1, 1));
  EXPECT_NEAR(w.first, 0.2, 1e-15);
  EXPECT_NEAR(w.second, -0.4, 1e-15);
  Rng rng({19, 0});
  for (int i = 0; i < 1000; ++i) {
    const UpperHalfPoint z(rng.normal() * 2, std::exp(rng.uniform(-2, 2)));
    const auto d = point_h_to_disk(z);
    EXPECT_LT(d.first * d.first + d.second * d.second, 1.0);
    const UpperHalfPoint back = point_disk_to_h(d.first, d.second);
    EXPECT_NEAR(back.x(), z.x(), 1e-12 * std::max(1.0, std::abs(z.x())));
    EXPECT_NEAR(back.y(), z.y(), 1e-12 * std::max(1.0, z.y()));
  }
  EXPECT_THROW(point_disk_to_h(1.0, 0.0), std::domain_error);
}

TEST(Disk, JacobianMatchesFiniteDifferences) {
  Rng rng({20, 0});
  for (int i = 0; i < 50; ++i) {
    const double r = 0.9 * std::sqrt(rng.uniform()), phi = rng.uniform(0, 6.283185307179586);
    const double u = r * std::cos(phi), v = r * std::sin(phi);
    const double h = 1e-6;
    const UpperHalfPoint pu = point_disk_to_h(u + h, v), mu = point_disk_to_h(u - h, v);
    const UpperHalfPoint pv = point_disk_to_h(u, v + h), mv = point_disk_to_h(u, v - h);
    const double j11 = (pu.x() - mu.x()) / (2 * h), j21 = (pu.y() - mu.y()) / (2 * h);
    const double j12 = (pv.x() - mv.x()) / (2 * h), j22 = (pv.y() - mv.y()) / (2 * h);
    const double det = std::abs(j11 * j22 - j12 * j21);
    EXPECT_NEAR(std::log(det), disk_log_jacobian(u, v), 1e-6);
  }
}
