#include <gtest/gtest.h>

#include <cmath>

#include "gqe/gqe.hpp"

using namespace gqe;

namespace {

Expr T = ex::var("t");
Expr Y = ex::var("y");

GQEStructure sphere(int n) {
  auto m = make_warped(n, {0.0, M_PI}, RealFunction::from_expr(ex::sin(T)), ChartKind::polar_both,
                       EinsteinFiber{n - 1, n - 2.0}, Gauge::g);
  return make_structure(m, ConstantPotential{0.7}, ScalarField::constant(0.0), CoefficientKind::lambda,
                        ScalarField::constant(n - 1.0));
}

GQEStructure gaussian(int n, double l1) {
  WarpedOptions o;
  o.sample_box = Interval{0.1, 3.0};
  auto m = make_warped(n, {0.0, kInf}, RealFunction::from_expr(T), ChartKind::polar_left,
                       EinsteinFiber{n - 1, n - 2.0}, Gauge::g, o);
  return make_structure(m, OfBase{RealFunction::from_expr(0.5 * l1 * T * T)}, ScalarField::constant(0.0),
                        CoefficientKind::lambda, ScalarField::constant(l1));
}

// h = dt^2 + e^{2t} g_N with mu < 0, alpha = 0, f = sqrt(-mu(n-2)) e^{-t}.
GQEStructure exp_example(int n, double mu) {
  auto m = make_warped(n, {-kInf, kInf}, RealFunction::from_expr(ex::exp(T)), ChartKind::rectangular,
                       EinsteinFiber{n - 1, mu}, Gauge::h);
  Expr f = std::sqrt(-mu * (n - 2.0)) * ex::exp(-T);
  Expr Q = mu * ex::exp(-2.0 * T) - (n - 1.0);
  return make_structure(m, OfBase{RealFunction::from_expr(f)}, ScalarField::constant(0.0), CoefficientKind::Q,
                        ScalarField::from_expr(Q));
}

// v = 1 over the fiber dy^2 + (1+y^2) g_{S^2}, f = arctan y, alpha = 5/2, Q = 0.
GQEStructure fiber_example() {
  auto pf = make_product_fiber(3, ex::sqrt(1.0 + Y * Y), 1.0, {-1.5, 1.5});
  auto m = make_warped(4, {-kInf, kInf}, RealFunction::constant(1.0), ChartKind::rectangular, pf, Gauge::h);
  return make_structure(m, OfFiber{RealFunction::from_expr(ex::arctan(Y), "y")}, ScalarField::constant(2.5),
                        CoefficientKind::Q, ScalarField::constant(0.0));
}

double max_oracle_gap(const GQEStructure& s, int count, double margin = 0.05) {
  OracleSetup o = oracle_setup(s);
  bool product = std::holds_alternative<ProductFiber>(s.metric.fiber);
  double gap = 0.0;
  for (const auto& p : sample_points(o.chart, count, 7, margin)) {
    double reduced = residual_reduced(s, p[0], product ? p[1] : 0.0).max_abs();
    gap = std::max(gap, std::fabs(reduced - oracle_residual(s, o, p)));
  }
  return gap;
}

}  // namespace

TEST(Residual, EinsteinSphereVanishes) {
  auto s = sphere(4);
  for (double t : {0.3, 1.0, 2.0, 2.9}) {
    auto r = residual_reduced(s, t);
    EXPECT_NEAR(r.radial, 0.0, 1e-13);
    EXPECT_NEAR(r.tangential, 0.0, 1e-13);
  }
}

TEST(Residual, GaussianVanishesAtHundredSamples) {
  for (int n : {3, 4, 6}) EXPECT_LT(max_residual(gaussian(n, 0.5), 100), 1e-12) << n;
}

TEST(Residual, DetectsWrongLambda) {
  auto s = gaussian(4, 0.5);
  s.coefficient = ScalarField::constant(0.6);
  auto r = residual_reduced(s, 1.0);
  EXPECT_NEAR(r.radial, -0.1, 1e-12);
  EXPECT_NEAR(r.tangential, -0.1, 1e-12);
}

TEST(Structure, GaugeMismatchAndCriticalAlpha) {
  auto s = sphere(4);
  EXPECT_THROW(make_structure(s.metric, s.potential, s.alpha, CoefficientKind::Q, s.coefficient), Error);
  EXPECT_THROW(make_structure(s.metric, s.potential, ScalarField::constant(0.5), CoefficientKind::lambda,
                              s.coefficient),
               Error);
  EXPECT_NO_THROW(make_structure(s.metric, s.potential, ScalarField::constant(0.5), CoefficientKind::lambda,
                                 s.coefficient, true));
  EXPECT_THROW(make_structure(s.metric, OfFiber{RealFunction::from_expr(Y, "y")}, s.alpha, CoefficientKind::lambda,
                              s.coefficient),
               Error);
}

TEST(Structure, ConformallyEinsteinReducesToEinsteinH) {
  // alpha = 1/(n-2): Ric_h = Q h whatever f is.
  const int n = 5;
  auto m = make_warped(n, {0.0, M_PI}, RealFunction::from_expr(ex::sin(T)), ChartKind::polar_both,
                       EinsteinFiber{n - 1, n - 2.0}, Gauge::h);
  auto s = make_structure(m, OfBase{RealFunction::from_expr(ex::cos(3.0 * T) + T * T)},
                          ScalarField::constant(1.0 / (n - 2.0)), CoefficientKind::Q, ScalarField::constant(n - 1.0),
                          true);
  EXPECT_LT(max_residual(s, 64), 1e-12);
}

TEST(ToH, ConstantPotentialIsHomothety) {
  auto s = sphere(4);
  auto ch = to_h(s);
  const double c = 0.7, k = 0.5;
  const double scale = std::exp(-c * k);
  for (double x : {0.4, 1.3, 2.5}) {
    double t = ch.map.to_new(x);
    EXPECT_NEAR(t, scale * x, 1e-12);
    EXPECT_NEAR(ch.result.metric.warp(t), scale * std::sin(x), 1e-12);
    EXPECT_NEAR(ch.result.coefficient(t, 0.0), 3.0 * std::exp(2.0 * c * k), 1e-12);
  }
  EXPECT_LT(max_residual(ch.result, 100), 1e-9);
}

TEST(ToH, GaussianQMatchesHamiltonForm) {
  const int n = 4;
  const double l1 = 0.5;
  auto ch = to_h(gaussian(n, l1));
  for (double s : {0.2, 1.0, 2.5}) {
    double t = ch.map.to_new(s);
    double f = 0.5 * l1 * s * s;
    double expected = (-2.0 * l1 * f + n * l1 + (n - 2.0) * l1) * std::exp(2.0 * f / (n - 2.0)) / (n - 2.0);
    EXPECT_NEAR(ch.result.coefficient(t, 0.0), expected, 1e-10 * std::fabs(expected));
  }
  EXPECT_LT(max_residual(ch.result, 100), 1e-7);
}

TEST(ToH, SteadyProductSoliton) {
  const int n = 5;
  const double a = 0.8;
  auto m = make_warped(n, {-kInf, kInf}, RealFunction::constant(1.0), ChartKind::rectangular,
                       EinsteinFiber{n - 1, 0.0}, Gauge::g);
  auto s = make_structure(m, OfBase{RealFunction::from_expr(a * ex::var("t"))}, ScalarField::constant(0.0),
                          CoefficientKind::lambda, ScalarField::constant(0.0));
  EXPECT_LT(max_residual(s, 50), 1e-14);
  auto ch = to_h(s);
  // dt = e^{-as/(n-2)} ds anchored at 0, and v_h = e^{-as/(n-2)}.
  for (double x : {-1.5, 0.3, 1.7}) {
    double e = std::exp(-a * x / (n - 2.0));
    double t = ch.map.to_new(x);
    EXPECT_NEAR(t, (n - 2.0) / a * (1.0 - e), 1e-11);
    EXPECT_NEAR(ch.result.metric.warp(t), e, 1e-11);
  }
  EXPECT_LT(max_residual(ch.result, 100), 1e-7);
}

TEST(GaugeConsistency, ZeroIffZero) {
  // A valid g structure maps to a valid h structure; a wrong lambda stays wrong after the map.
  auto good = gaussian(4, 0.3);
  EXPECT_LT(max_residual(to_h(good).result, 80), 1e-7);
  auto bad = good;
  bad.coefficient = ScalarField::constant(0.35);
  auto hb = to_h(bad);
  EXPECT_GT(max_residual(bad, 80), 1e-3);
  EXPECT_GT(max_residual(hb.result, 80), 1e-3);
}

TEST(FromH, ExponentialExampleIsValid) {
  for (int n : {4, 5}) {
    auto h = exp_example(n, -1.5);
    EXPECT_LT(max_residual(h, 100), 1e-12);
    // lambda is implied by Q: (Q - Delta_h f/(n-2)) e^{-2f/(n-2)}, not constant here.
    auto g = from_h(h);
    EXPECT_LT(max_residual(g.result, 100), 1e-7) << n;
    const double c = std::sqrt(1.5 * (n - 2.0));
    for (double t : {-1.0, 0.5}) {
      double x = g.map.to_new(t);
      double expected = (-1.5 * std::exp(-2 * t) - (n - 1.0) + c * std::exp(-t)) * std::exp(-2 * c * std::exp(-t) / (n - 2.0));
      EXPECT_NEAR(g.result.coefficient(x, 0.0), expected, 1e-10);
    }
  }
}

TEST(FromH, RejectsInconsistentLambda) {
  auto h = exp_example(4, -1.5);
  FromHOptions opt;
  opt.lambda = ScalarField::constant(0.25);
  EXPECT_THROW(from_h(h, opt), Error);
}

TEST(FromH, RoundTripIsIdentity) {
  auto g = gaussian(4, 0.5);
  auto h = to_h(g);
  auto back = from_h(h.result);
  for (double x : {0.3, 0.9, 1.6, 2.4}) {
    double t = h.map.to_new(x);
    double x2 = back.map.to_new(t);
    EXPECT_NEAR(x2, x, 1e-10);
    EXPECT_NEAR(back.result.metric.warp(x2), x, 1e-10);
    EXPECT_NEAR(back.result.coefficient(x2, 0.0), 0.5, 1e-10);
    Jet f = potential_jet(back.result.potential, x2, 0.0);
    EXPECT_NEAR(f.v, 0.25 * x * x, 1e-10);
    EXPECT_NEAR(f.d1, 0.5 * x, 1e-10);
    EXPECT_NEAR(f.d2, 0.5, 1e-9);
  }
}

TEST(FiberPotential, HStructureAndGaugeTransfer) {
  auto h = fiber_example();
  EXPECT_LT(max_residual(h, 100), 1e-12);
  auto g = from_h(h);
  EXPECT_EQ(g.result.gauge(), Gauge::g);
  EXPECT_LT(max_residual(g.result, 100), 1e-12);
  auto h2 = to_h(g.result);
  for (auto [t, y] : sample_grid(h.metric, 20)) EXPECT_NEAR(h2.result.coefficient(t, y), 0.0, 1e-12);
}

TEST(OracleAgreement, ReducedMatchesFiniteDifferences) {
  EXPECT_LT(max_oracle_gap(sphere(4), 10), 1e-6);
  EXPECT_LT(max_oracle_gap(gaussian(4, 0.5), 10), 1e-6);
  EXPECT_LT(max_oracle_gap(exp_example(4, -1.0), 10), 1e-6);
  EXPECT_LT(max_oracle_gap(fiber_example(), 10), 1e-6);
  EXPECT_LT(max_oracle_gap(from_h(fiber_example()).result, 10), 1e-6);
  // Nonzero residuals must agree too.
  auto off = gaussian(4, 0.5);
  off.alpha = ScalarField::constant(0.9);
  EXPECT_LT(max_oracle_gap(off, 10), 1e-6);
  auto offh = fiber_example();
  offh.alpha = ScalarField::constant(1.0);
  EXPECT_LT(max_oracle_gap(offh, 10), 1e-6);
}
