#include <gtest/gtest.h>

#include <cmath>

#include "gqe/construct.hpp"

using namespace gqe;

namespace {

Expr T = ex::var("t");

WarpedMetric exp_h(int n, double mu) {
  return make_warped(n, {-kInf, kInf}, RealFunction::from_expr(ex::exp(T)), ChartKind::rectangular,
                     EinsteinFiber{n - 1, mu}, Gauge::h);
}

WarpedMetric polar_h(int n, const Expr& v, double hi) {
  return make_warped(n, {0.0, hi}, RealFunction::from_expr(v), ChartKind::polar_left, EinsteinFiber{n - 1, n - 2.0},
                     Gauge::h);
}

RealFunction constant_alpha(double a) { return RealFunction::from_expr(Expr(a)); }

double oracle_gap(const GQEStructure& s, int count) {
  OracleSetup o = oracle_setup(s);
  bool product = std::holds_alternative<ProductFiber>(s.metric.fiber);
  double gap = 0.0;
  for (const auto& p : sample_points(o.chart, count, 11, 0.05))
    gap = std::max(gap, std::fabs(residual_reduced(s, p[0], product ? p[1] : 0.0).max_abs() - oracle_residual(s, o, p)));
  return gap;
}

}  // namespace

TEST(SolveF, ExponentialNegativeMu) {
  // f = -+ sqrt(-mu(n-2)) e^{-t} + C with alpha = 0.
  for (int n : {4, 5, 7}) {
    const double mu = -2.0, c = std::sqrt(-mu * (n - 2.0));
    for (int sign : {1, -1}) {
      SolveOptions opt;
      opt.sign = sign;
      auto sol = solve_f_from_alpha(exp_h(n, mu), constant_alpha(0.0), opt);
      const auto& f = std::get<OfBase>(sol.structure.potential).f;
      for (double t : {-1.5, 0.0, 1.2}) {
        Jet j = f.jet(t);
        EXPECT_NEAR(j.d1, sign * c * std::exp(-t), 1e-12);
        EXPECT_NEAR(j.d2, -sign * c * std::exp(-t), 1e-10);
        EXPECT_NEAR(j.v, -sign * c * (std::exp(-t) - std::exp(-sol.t0)), 1e-10);
      }
      EXPECT_LT(max_residual(sol.structure, 100), 1e-10);
    }
  }
}

TEST(SolveF, ExponentialPositiveMuWithLargeAlpha) {
  const int n = 5;
  const double mu = 3.0;
  auto sol = solve_f_from_alpha(exp_h(n, mu), constant_alpha(2.0 / (n - 2.0)));
  const auto& f = std::get<OfBase>(sol.structure.potential).f;
  for (double t : {-1.0, 0.7}) EXPECT_NEAR(f.jet(t).d1, std::sqrt(mu * (n - 2.0)) * std::exp(-t), 1e-12);
  EXPECT_LT(max_residual(sol.structure, 100), 1e-10);
}

TEST(SolveF, ZeroMuGivesEinstein) {
  auto sol = solve_f_from_alpha(exp_h(4, 0.0), constant_alpha(0.0));
  EXPECT_TRUE(std::holds_alternative<ConstantPotential>(sol.structure.potential));
  EXPECT_LT(max_residual(sol.structure, 100), 1e-12);
}

TEST(SolveF, ErrorsOnInequalityAndCriticalAlpha) {
  try {
    solve_f_from_alpha(exp_h(4, 2.0), constant_alpha(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::check_failed);
    EXPECT_NE(std::string(e.what()).find("t = -1.92"), std::string::npos) << e.what();
  }
  try {
    solve_f_from_alpha(exp_h(4, -2.0), RealFunction::from_expr(0.5 + 0.1 * T));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::domain);
  }
}

TEST(SolveF, AlphaIsNotUnique) {
  auto h = exp_h(4, -1.0);
  for (Expr a : {Expr(0.0), Expr(-1.0), -0.3 + 0.1 * ex::sin(T)}) {
    auto sol = solve_f_from_alpha(h, RealFunction::from_expr(a));
    EXPECT_LT(max_residual(sol.structure, 100), 1e-10) << a.str();
    EXPECT_LT(max_residual(from_h(sol.structure).result, 60), 1e-7) << a.str();
  }
}

TEST(SolveF, OracleAgreesOnSolvedStructure) {
  auto sol = solve_f_from_alpha(exp_h(4, -1.0), RealFunction::from_expr(-0.3 + 0.1 * ex::sin(T)));
  EXPECT_LT(oracle_gap(sol.structure, 8), 1e-6);
  auto off = sol.structure;
  off.alpha = ScalarField::constant(0.2);
  EXPECT_LT(oracle_gap(off, 8), 1e-6);
}

TEST(Polar, SphereAndCubicPerturbation) {
  auto sphere = polar_h(4, ex::sin(T), M_PI);
  auto r = polar_extension_check(sphere, constant_alpha(0.3));
  EXPECT_TRUE(r.pass) << r.message;
  EXPECT_LT(r.fp.back(), 1e-10);

  auto cubic = polar_h(4, T + T * T * T, 2.0);
  auto ok = polar_extension_check(cubic, constant_alpha(0.0));
  EXPECT_TRUE(ok.pass) << ok.message;
  // f'(t) ~ sqrt(3(n-2)/(1/(n-2) - alpha)) t near the pole
  EXPECT_NEAR(ok.ratio.back(), std::sqrt(12.0), 1e-4);

  auto wrong_sign = polar_extension_check(cubic, constant_alpha(0.7));
  EXPECT_FALSE(wrong_sign.pass);
  EXPECT_NE(wrong_sign.message.find("inequality"), std::string::npos);

  auto fast = polar_extension_check(cubic, RealFunction::from_expr(0.5 - T * T * T * T));
  EXPECT_FALSE(fast.pass);
}

TEST(Polar, RequiresPolarChart) {
  EXPECT_THROW(polar_extension_check(exp_h(4, 1.0), constant_alpha(0.0)), Error);
}

TEST(AlmostSoliton, ProductLine) {
  const int n = 4;
  const double mu = -1.7;
  auto g = make_warped(n, {-kInf, kInf}, RealFunction::constant(1.0), ChartKind::rectangular, EinsteinFiber{n - 1, mu},
                       Gauge::g);
  auto a = almost_soliton_from_warped(g);
  for (double t : {-1.5, 0.4, 1.9}) {
    EXPECT_NEAR(a.f(t), 0.5 * mu * t * t, 1e-12);
    EXPECT_NEAR(a.lambda(t), mu, 1e-12);
  }
  EXPECT_LT(max_residual(a.structure, 100), 1e-12);
}

TEST(AlmostSoliton, RoundSphere) {
  const int n = 5;
  auto g = make_warped(n, {0.0, M_PI}, RealFunction::from_expr(ex::sin(T)), ChartKind::polar_both,
                       EinsteinFiber{n - 1, n - 2.0}, Gauge::g);
  auto a = almost_soliton_from_warped(g);
  for (double t : {0.3, 1.5, 2.8}) {
    EXPECT_NEAR(a.f.jet(t).d1, 0.0, 1e-12);
    EXPECT_NEAR(a.lambda(t), n - 1.0, 1e-12);
  }
}

TEST(AlmostSoliton, CoshNumeric) {
  for (double mu : {-3.0, 0.5, 2.0}) {
    auto g = make_warped(4, {-kInf, kInf}, RealFunction::from_expr(ex::cosh(T)), ChartKind::rectangular,
                         EinsteinFiber{3, mu}, Gauge::g);
    auto a = almost_soliton_from_warped(g, 0.3);
    EXPECT_LT(max_residual(a.structure, 100), 1e-8) << mu;
    EXPECT_LT(oracle_gap(a.structure, 6), 1e-6) << mu;
  }
}

TEST(SixCase, VPQIdentity) {
  for (int n : {4, 5, 8})
    for (SixCaseId id : all_six_cases()) EXPECT_LE(vpq_defect(six_case(id, n), n, 100), 1e-12) << to_string(id);
}

TEST(SixCase, DefaultStructuresSolveTheirEquation) {
  for (int n : {4, 5}) {
    for (SixCaseId id : all_six_cases()) {
      if (six_case(id, n).P == 0.0 && n != 4) continue;
      auto s = six_case_structure(id, n, default_fiber_data(id, n));
      EXPECT_LE(max_residual(s, 100), 1e-8) << to_string(id) << " n=" << n;
      EXPECT_LE(oracle_gap(s, 4), 1e-6) << to_string(id) << " n=" << n;
    }
  }
}

TEST(SixCase, CoshCaseViaOracle) {
  auto s = six_case_structure(SixCaseId::c3a, 4, default_fiber_data(SixCaseId::c3a, 4));
  OracleSetup o = oracle_setup(s);
  for (const auto& p : sample_points(o.chart, 20, 3, 0.05)) EXPECT_LT(oracle_residual(s, o, p), 1e-6);
}

TEST(SixCase, FlatCone) {
  const int n = 4;
  FiberData fd{EinsteinFiber{n - 1, n - 2.0}, ConstantPotential{1.0}, ScalarField::constant(0.0), n - 2.0};
  auto s = six_case_structure(SixCaseId::c1b, n, fd);
  EXPECT_LT(max_residual(s, 100), 1e-14);
  auto r = ricci_warped(s.metric, 1.3);
  EXPECT_NEAR(r.radial, 0.0, 1e-14);
  EXPECT_NEAR(r.tangential, 0.0, 1e-14);
}

TEST(SixCase, Errors) {
  EXPECT_THROW(six_case_structure(SixCaseId::c2a, 3, default_fiber_data(SixCaseId::c2a, 4)), Error);
  auto fd = default_fiber_data(SixCaseId::c2a, 4);
  fd.alpha = ScalarField::constant(2.0);
  EXPECT_THROW(six_case_structure(SixCaseId::c2a, 4, fd), Error);
  EXPECT_THROW(six_case_structure(SixCaseId::c1a, 4, default_fiber_data(SixCaseId::c2a, 4)), Error);
  EXPECT_EQ(parse_six_case("2b"), SixCaseId::c2b);
  EXPECT_THROW(parse_six_case("4a"), Error);
}
