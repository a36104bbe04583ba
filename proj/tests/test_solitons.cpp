#include <gtest/gtest.h>

#include <cmath>

#include "gqe/construct.hpp"
#include "gqe/solitons.hpp"

using namespace gqe;

namespace {

Expr T = ex::var("t");

// Shared profile: integration to s = 50 takes a moment.
const SolitonProfile& bryant4() {
  static const SolitonProfile p = bryant_integrate(4, 50.0);
  return p;
}

}  // namespace

TEST(Hamilton, GaussianAndSphere) {
  for (int n : {3, 4, 6}) {
    const double l = 0.7;
    auto g = make_warped(n, {0.0, kInf}, RealFunction::from_expr(T), ChartKind::polar_left, EinsteinFiber{n - 1, n - 2.0},
                         Gauge::g);
    auto s = make_structure(g, OfBase{RealFunction::from_expr(0.5 * l * T * T)}, ScalarField::constant(0.0),
                            CoefficientKind::lambda, ScalarField::constant(l));
    auto d = hamilton_identity_drift(s);
    EXPECT_LE(d.drift, 1e-10);
    EXPECT_NEAR(d.mean, n * l, 1e-10);
    EXPECT_LT(max_residual(s, 100), 1e-12);
  }
  auto sphere = make_warped(4, {0.0, M_PI}, RealFunction::from_expr(ex::sin(T)), ChartKind::polar_both,
                            EinsteinFiber{3, 2.0}, Gauge::g);
  auto s = make_structure(sphere, ConstantPotential{0.3}, ScalarField::constant(0.0), CoefficientKind::lambda,
                          ScalarField::constant(3.0));
  EXPECT_EQ(hamilton_identity_drift(s).drift, 0.0);
}

TEST(Hamilton, RejectsNonSolitons) {
  auto g = make_warped(4, {-kInf, kInf}, RealFunction::constant(1.0), ChartKind::rectangular, EinsteinFiber{3, 1.0},
                       Gauge::g);
  auto s = make_structure(g, OfBase{RealFunction::from_expr(T)}, ScalarField::constant(0.2), CoefficientKind::lambda,
                          ScalarField::constant(1.0));
  EXPECT_THROW(hamilton_identity_drift(s), Error);
}

TEST(KimKim, CosineQuasiEinstein) {
  // dt^2 + g_N with N Einstein lambda, f = -m ln cos(k t), k^2 = lambda/m, mu = k^2 (m - 1)
  for (double m : {1.0, 2.0, 3.5}) {
    const int n = 4;
    const double lam = 1.5, k = std::sqrt(lam / m);
    WarpedOptions wo;
    wo.sample_box = Interval{-1.0, 1.0};
    auto g = make_warped(n, {-M_PI / (2 * k), M_PI / (2 * k)}, RealFunction::constant(1.0), ChartKind::rectangular,
                         EinsteinFiber{n - 1, lam}, Gauge::g, wo);
    auto s = make_structure(g, OfBase{RealFunction::from_expr(-m * ex::ln(ex::cos(k * T)))},
                            ScalarField::constant(-1.0 / m), CoefficientKind::lambda, ScalarField::constant(lam));
    EXPECT_LT(max_residual(s, 100), 1e-11);
    const double mu = k * k * (m - 1.0);
    EXPECT_NEAR(kimkim_mu(s, 0.3), mu, 1e-12);
    auto r = kimkim_identity_drift(s, mu);
    EXPECT_LE(r.drift.drift, 1e-10);
    EXPECT_NEAR(r.drift.mean, 0.0, 1e-10);
    EXPECT_LE(r.Q_gap, 1e-12);
    EXPECT_GT(r.Q.relative, 1e-3);  // f non-constant, Q non-constant
  }
}

TEST(KimKim, ConstantPotential) {
  auto g = make_warped(4, {-kInf, kInf}, RealFunction::from_expr(ex::exp(T)), ChartKind::rectangular,
                       EinsteinFiber{3, 0.0}, Gauge::g);
  auto s = make_structure(g, ConstantPotential{0.4}, ScalarField::constant(-1.0), CoefficientKind::lambda,
                          ScalarField::constant(-3.0));
  auto r = kimkim_identity_drift(s, kimkim_mu(s, 0.0));
  EXPECT_EQ(r.drift.drift, 0.0);
  EXPECT_TRUE(r.Q.constant);
  EXPECT_THROW(kimkim_identity_drift(make_structure(g, ConstantPotential{0.4}, ScalarField::constant(0.0),
                                                    CoefficientKind::lambda, ScalarField::constant(-3.0)),
                                     0.0),
               Error);
}

TEST(KimKim, ConstructedStructureIsNotQuasiEinstein) {
  // alpha = -1/m from the potential construction: lambda comes out non-constant
  const int n = 4;
  const double m = 2.0;
  auto h = make_warped(n, {-kInf, kInf}, RealFunction::from_expr(ex::exp(T)), ChartKind::rectangular,
                       EinsteinFiber{n - 1, -1.0}, Gauge::h);
  auto sol = solve_f_from_alpha(h, RealFunction::from_expr(Expr(-1.0 / m)));
  auto g = from_h(sol.structure).result;
  EXPECT_LT(max_residual(g, 60), 1e-7);
  auto l = constancy([&g](double x) { return g.coefficient(x); }, g.metric.sample_box, 60, 1e-8);
  EXPECT_FALSE(l.constant);
  // freezing lambda at its mean breaks both the equation and the identity
  auto frozen = g;
  frozen.alpha = ScalarField::constant(-1.0 / m);
  frozen.coefficient = ScalarField::constant(l.mean);
  EXPECT_GT(max_residual(frozen, 60), 1e-3);
  auto r = kimkim_identity_drift(frozen, kimkim_mu(frozen, 0.0));
  EXPECT_GT(r.drift.drift, 1e-3);
}

TEST(ProductSoliton, SteadyGlobalChange) {
  const int n = 4;
  auto r = product_soliton(n, 0.0, 1.0, 0.0, -0.5);
  ASSERT_TRUE(r.change.has_value());
  EXPECT_TRUE(r.positivity.zeros.empty());
  EXPECT_LT(max_residual(r.g1, 100), 1e-12);
  EXPECT_LT(hamilton_identity_drift(r.g1).drift, 1e-12);
  EXPECT_LT(max_residual(r.change->structure, 60), 1e-7);
  EXPECT_TRUE(r.nonconstant);
  for (double s : {-1.0, 0.5, 2.0}) {
    Jet u = r.change->u.jet(s);
    EXPECT_NEAR(u.v, -0.5 - std::exp(-s), 1e-12);
    EXPECT_NEAR(r.change->lambda2(s), 3.0 * (u.v * u.d2 - u.d1 * u.d1) + u.v * u.d1, 1e-10);
  }
  // same signs: u has a zero
  auto z = product_soliton(n, 0.0, 1.0, 0.0, 0.5);
  ASSERT_FALSE(z.positivity.zeros.empty());
  EXPECT_NEAR(z.positivity.zeros.front(), -std::log(0.5), 1e-9);
}

TEST(ProductSoliton, ShrinkingBoundedU) {
  const int n = 4;
  const double bound = 0.5 * std::sqrt(M_PI * (n - 2.0));
  auto r = product_soliton(n, 1.0, 0.0, 0.0, bound + 0.5);
  EXPECT_TRUE(r.positivity.zeros.empty());
  ASSERT_TRUE(r.change.has_value());
  EXPECT_LT(max_residual(r.change->structure, 60), 1e-7);
  EXPECT_TRUE(r.nonconstant);
  EXPECT_LT(hamilton_identity_drift(r.g1).drift, 1e-12);
  auto small = product_soliton(n, 1.0, 0.0, 0.0, bound - 0.5);
  EXPECT_FALSE(small.positivity.zeros.empty());
  auto expanding = product_soliton(n, -1.0, 0.0, 0.0, 3.0);
  EXPECT_FALSE(expanding.positivity.zeros.empty());
}

TEST(ProductSoliton, EinsteinCaseSkipsConstancy) {
  auto r = product_soliton(4, 0.0, 0.0, 0.3, 5.0, {-3.0, 3.0});
  EXPECT_TRUE(r.constancy_skipped);
  EXPECT_FALSE(r.nonconstant);
  EXPECT_THROW(product_soliton(4, 1.0, 0.5, 0.0, 3.0), Error);
}

TEST(GaussianSoliton, NonConstantLambda2) {
  const int n = 4;
  auto r = gaussian_soliton(n, 1.0, 2.0);
  EXPECT_TRUE(r.positivity.zeros.empty());
  EXPECT_LT(max_residual(r.g1, 100), 1e-12);
  EXPECT_LT(hamilton_identity_drift(r.g1).drift, 1e-10);
  ASSERT_TRUE(r.change.has_value());
  EXPECT_LT(max_residual(r.change->structure, 60), 1e-7);
  EXPECT_TRUE(r.nonconstant);
  EXPECT_GT(r.lambda2.spread, 10 * 1e-6);
  // origin limit
  EXPECT_NEAR(r.change->lambda2(1e-7), gaussian_lambda2_at_origin(n, 1.0, 2.0), 1e-6);
  // Q from the h gauge is non-constant too
  auto h = to_h(r.g1).result;
  auto q = constancy([&h](double x) { return h.coefficient(x); }, h.metric.sample_box, 50, 1e-8);
  EXPECT_GT(q.relative, 1e-3);
}

TEST(GaussianSoliton, ZeroOfUIsReported) {
  try {
    gaussian_soliton(4, 1.0, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::domain);
    EXPECT_NE(std::string(e.what()).find("s = 1.177"), std::string::npos) << e.what();
  }
  EXPECT_THROW(gaussian_soliton(4, -1.0, -0.2), Error);
  auto neg = gaussian_soliton(4, -1.0, 0.5, {0.01, 3.0});
  EXPECT_TRUE(neg.nonconstant);
}

TEST(Bryant, ProfileAndAsymptotics) {
  const auto& p = bryant4();
  EXPECT_NEAR(p.c, 1.0, 1e-6);
  auto c = bryant_checks(p);
  EXPECT_LE(c.invariant_drift, 1e-5);
  EXPECT_GE(c.fp_end, -1.05);
  EXPECT_LE(c.fp_end, -0.95);
  EXPECT_GT(c.w_ratio_lo, 0.5);
  EXPECT_LT(c.w_ratio_hi / c.w_ratio_lo, 1.5);
  EXPECT_GT(c.min_radial, 0.0);
  EXPECT_GT(c.min_tangential, 0.0);
  auto s = p.structure();
  EXPECT_LE(max_residual(s, 200), 1e-5);
  EXPECT_LE(hamilton_identity_drift(s, 200).drift, 1e-5);
}

TEST(Bryant, StepHalvingAudit) {
  // halve the node step and the start grading together; the default profile is the reference
  BryantOptions o;
  o.tail_tol = 1.0;
  const double ref = bryant_integrate(3, 10.0, o).w(9.5).v;
  o.step = 0.05;
  o.start_ratio = 20.0;
  std::vector<double> err;
  for (int k = 0; k < 3; ++k) {
    err.push_back(std::fabs(bryant_integrate(3, 10.0, o).w(9.5).v - ref));
    o.step /= 2;
    o.start_ratio *= 2;
  }
  EXPECT_LT(err.back(), 1e-8);
  EXPECT_GT(err[0] / err[1], 10.0);
  EXPECT_GT(err[1] / err[2], 10.0);
}

TEST(Bryant, Lambda2LimitsAndNonConstancy) {
  const auto& p = bryant4();
  for (double C : {0.5, 1.0, 3.0}) {
    auto r = bryant_conformal_lambda2(p, C);
    EXPECT_NEAR(r.limit_origin, r.limit_expected, 0.1 * std::fabs(r.limit_expected));
    EXPECT_NEAR(r.tail_ratio, r.tail_expected, 0.1 * std::fabs(r.tail_expected));
    EXPECT_TRUE(r.decreasing_tail);
    EXPECT_TRUE(r.nonconstant);
  }
  EXPECT_THROW(bryant_conformal_lambda2(p, 0.0), Error);
}

TEST(Bryant, Lambda2AgreesWithGenericChange) {
  auto p = bryant_integrate(4, 6.0, {1e-3, 1e-3, 0.6});
  auto s = p.structure();
  auto gen = lambda2(s, 1.0);
  for (double x : {0.5, 2.0, 4.5}) EXPECT_NEAR(gen.lambda2(x), bryant_lambda2_at(p, 1.0, x), 1e-6 * (1 + std::fabs(gen.lambda2(x))));
  EXPECT_LT(max_residual(gen.structure, 40), 1e-6);
}

TEST(Bryant, ThreeDimensionalVariation) {
  auto p = bryant_integrate(3, 30.0, {1e-3, 1e-3, 0.1});
  auto r = bryant_conformal_lambda2(p, 1.0, {0.1, 30.0});
  EXPECT_GT(r.constancy.spread, 100 * 1e-5);
  auto c = bryant_checks(p);
  EXPECT_LE(c.invariant_drift, 1e-5);
}
