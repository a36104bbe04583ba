#include <gtest/gtest.h>

#include <cmath>

#include "gqe/geometry.hpp"
#include "gqe/oracle.hpp"

using namespace gqe;

namespace {

RealFunction fn(const char* s) { return RealFunction::from_expr(parse(s, {"t"})); }

WarpedMetric warped(int n, const char* v, Interval I, ChartKind k, Fiber f, Interval box) {
  WarpedOptions o;
  o.sample_box = box;
  return make_warped(n, I, fn(v), k, std::move(f), Gauge::h, o);
}

// Oracle agreement of reduced Ricci and Hessian at random chart points.
double oracle_gap(const WarpedMetric& m, const RealFunction* f, int samples, std::uint64_t seed) {
  ExplicitChart c = build_chart(m);
  OracleOptions opt;
  double worst = 0.0;
  for (const auto& p : sample_points(c, samples, seed, 5 * opt.step)) {
    Connection conn(c, p, opt);
    double y = std::holds_alternative<ProductFiber>(m.fiber) ? p[1] : 0.0;
    Matrix pred = reduced_tensor(c, conn.metric(), ricci_warped(m, p[0], y));
    worst = std::max(worst, normalized_max_diff(conn.ricci(), pred, conn.metric()) / std::max(1.0, normalized_max_abs(pred, conn.metric())));
    if (f) {
      RealFunction ff = *f;
      ChartFunction cf = [ff](const double* q) { return ff(q[0]); };
      Matrix H = hessian_fd(conn, scalar_fd(cf, p, c.dim, opt));
      Matrix hp = reduced_tensor(c, conn.metric(), hess_potential(m, *f, p[0]));
      worst = std::max(worst, normalized_max_diff(H, hp, conn.metric()) / std::max(1.0, normalized_max_abs(hp, conn.metric())));
    }
  }
  return worst;
}

}  // namespace

TEST(RicciWarped, RoundS3) {
  auto m = warped(3, "sin(t)", {0, M_PI}, ChartKind::polar_both, EinsteinFiber{2, 1.0}, {0.1, 3.0});
  auto r = ricci_warped(m, 0.8);
  EXPECT_NEAR(r.radial, 2.0, 1e-14);
  EXPECT_NEAR(r.tangential, 2.0, 1e-14);
}

TEST(RicciWarped, FlatR4) {
  auto m = warped(4, "t", {0, kInf}, ChartKind::polar_left, EinsteinFiber{3, 2.0}, {0.1, 10});
  for (double t : {0.1, 1.0, 7.5}) {
    auto r = ricci_warped(m, t);
    EXPECT_EQ(r.radial, 0.0);
    EXPECT_NEAR(r.tangential, 0.0, 1e-15);
  }
}

TEST(RicciWarped, CoshAgainstOracle) {
  auto m = warped(3, "cosh(t)", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{2, 1.0}, {-1, 1});
  auto r = ricci_warped(m, 0.5);
  double s = std::sinh(0.5), c = std::cosh(0.5);
  EXPECT_NEAR(r.radial, -2.0, 1e-14);
  EXPECT_NEAR(r.tangential, (1 - s * s) / (c * c) - 1, 1e-14);
  ExplicitChart chart = build_chart(m);
  std::vector<double> p{0.5, 0.8, 0.3};
  Connection conn(chart, p);
  Matrix pred = reduced_tensor(chart, conn.metric(), r);
  EXPECT_LT(normalized_max_diff(conn.ricci(), pred, conn.metric()), 1e-8);
}

TEST(RicciWarped, ErrorsOutsideInterval) {
  auto m = warped(3, "sin(t)", {0, M_PI}, ChartKind::polar_both, EinsteinFiber{2, 1.0}, {0.1, 3.0});
  EXPECT_THROW(ricci_warped(m, 4.0), Error);
}

TEST(MakeWarped, Validation) {
  EXPECT_THROW(warped(2, "t", {0, 1}, ChartKind::rectangular, EinsteinFiber{1, 0.0}, {0.1, 0.9}), Error);
  EXPECT_THROW(warped(3, "t-0.5", {0, 1}, ChartKind::rectangular, EinsteinFiber{2, 1.0}, {0.1, 0.9}), Error);
  EXPECT_THROW(warped(3, "2*t", {0, 1}, ChartKind::polar_left, EinsteinFiber{2, 1.0}, {0.1, 0.9}), Error);
  EXPECT_THROW(warped(3, "t", {0, 1}, ChartKind::rectangular, EinsteinFiber{3, 1.0}, {0.1, 0.9}), Error);
  EXPECT_NO_THROW(warped(4, "t+t^3", {0, 1}, ChartKind::polar_left, EinsteinFiber{3, 2.0}, {0.1, 0.9}));
}

TEST(HessPotential, Examples) {
  auto m = warped(4, "1", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{3, 1.0}, {-2, 2});
  auto h = hess_potential(m, fn("1.5*t^2/2"), 0.7);
  EXPECT_DOUBLE_EQ(h.radial, 1.5);
  EXPECT_DOUBLE_EQ(h.tangential, 0.0);
  auto z = hess_potential(m, RealFunction::constant(3.0), 0.7);
  EXPECT_EQ(z.radial, 0.0);
  EXPECT_EQ(z.tangential, 0.0);
}

TEST(HessPotential, CoshAgainstOracle) {
  auto m = warped(3, "cosh(t)", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{2, 1.0}, {-1, 1});
  RealFunction f = fn("arctan(sinh(t))");  // f' = 1/cosh t
  ExplicitChart chart = build_chart(m);
  std::vector<double> p{0.3, 0.7, 0.1};
  Connection conn(chart, p);
  ChartFunction cf = [f](const double* q) { return f(q[0]); };
  Matrix H = hessian_fd(conn, scalar_fd(cf, p, 3, {}));
  Matrix pred = reduced_tensor(chart, conn.metric(), hess_potential(m, f, 0.3));
  EXPECT_LT(normalized_max_diff(H, pred, conn.metric()), 1e-6);
}

TEST(Laplacian, Examples) {
  auto flat = warped(4, "t", {0, kInf}, ChartKind::polar_left, EinsteinFiber{3, 2.0}, {0.1, 5});
  EXPECT_NEAR(laplacian_warped(flat, fn("t^2/2"), 1.3), 4.0, 1e-14);
  // v = cosh(kt): Laplacian = f'' + k (n-1) f' tanh(kt)
  const double k = 0.7;
  auto m = warped(5, "cosh(0.7*t)", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{4, -1.0}, {-2, 2});
  RealFunction f = fn("arctan(sinh(0.7*t))");
  for (double t : {-1.0, 0.2, 1.5}) {
    Jet j = f.jet(t);
    EXPECT_NEAR(laplacian_warped(m, f, t), j.d2 + k * 4 * j.d1 * std::tanh(k * t), 1e-13);
  }
}

TEST(Laplacian, TraceIdentity) {
  Rng rng(5);
  const char* warps[] = {"cosh(t)", "2+sin(t)", "exp(t/3)", "1+t^2"};
  const char* pots[] = {"sin(2*t)", "t^3 - t", "exp(-t^2)"};
  for (const char* v : warps)
    for (const char* f : pots) {
      auto m = warped(4, v, {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{3, 1.0}, {-1, 1});
      double t = rng.uniform(-1, 1);
      auto h = hess_potential(m, fn(f), t);
      EXPECT_NEAR(laplacian_warped(m, fn(f), t), h.radial + 3 * h.tangential, 1e-10);
    }
}

TEST(BuildChart, Components) {
  auto m = warped(3, "sin(t)", {0, M_PI}, ChartKind::polar_both, EinsteinFiber{2, 1.0}, {0.1, 3.0});
  ExplicitChart c = build_chart(m);
  ASSERT_EQ(c.dim, 3);
  Matrix g = c.metric_at({0.8, 1.1, 0.2});
  Matrix expect = Matrix::Zero(3, 3);
  expect.diagonal() << 1.0, std::pow(std::sin(0.8), 2), std::pow(std::sin(0.8) * std::sin(1.1), 2);
  EXPECT_LT((g - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(build_chart(warped(6, "cosh(t)", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{5, 1.0}, {-1, 1})), Error);
}

TEST(BuildChart, HyperbolicFiberIsEinstein) {
  auto m = warped(4, "1", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{3, -2.0}, {-1, 1});
  ExplicitChart c = build_chart(m);
  Matrix g = c.metric_at({0.0, 0.8, 1.2, 0.3});
  EXPECT_NEAR(g(2, 2), std::pow(std::sinh(0.8), 2), 1e-15);
  EXPECT_NEAR(g(3, 3), std::pow(std::sinh(0.8) * std::sin(1.2), 2), 1e-15);
  std::vector<double> p{0.1, 0.8, 1.2, 0.3};
  Connection conn(c, p);
  Matrix R = conn.ricci();
  Matrix pred = -2.0 * conn.metric();
  pred(0, 0) = 0.0;
  EXPECT_LT(normalized_max_diff(R, pred, conn.metric()), 1e-8);
}

TEST(Oracle, FlatAndSphereCharts) {
  auto flat = ExplicitChart::from_exprs({"x", "y", "z"}, {{"1", "", ""}, {"", "1", ""}, {"", "", "1"}}, {-1, -1, -1}, {1, 1, 1});
  EXPECT_LT(ricci_fd(flat, {0.1, 0.2, 0.3}).cwiseAbs().maxCoeff(), 1e-9);
  auto s3 = ExplicitChart::from_exprs({"a", "b", "c"},
                                      {{"1", "", ""}, {"", "sin(a)^2", ""}, {"", "", "sin(a)^2*sin(b)^2"}},
                                      {0.2, 0.2, -3}, {3, 3, 3});
  std::vector<double> p{1.0, 1.1, 0.9};
  Matrix R = ricci_fd(s3, p);
  Matrix g = s3.metric_at(p);
  EXPECT_LT((R - 2.0 * g).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((R - R.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Oracle, FlatPolarVanishes) {
  auto c = ExplicitChart::from_exprs({"t", "th", "ph"}, {{"1", "", ""}, {"", "t^2", ""}, {"", "", "t^2*sin(th)^2"}},
                                     {0.1, 0.2, -3}, {10, 3, 3});
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> p{rng.uniform(0.2, 9.9), rng.uniform(0.3, 2.8), rng.uniform(-1, 1)};
    Matrix R = ricci_fd(c, p);
    EXPECT_LT(normalized_max_abs(R, c.metric_at(p)), 1e-8);
  }
}

TEST(Oracle, StepHalvingConvergence) {
  auto m = warped(3, "cosh(t)", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{2, 1.0}, {-1, 1});
  ExplicitChart c = build_chart(m);
  std::vector<double> p{0.5, 0.8, 0.3};
  Matrix pred = reduced_tensor(c, c.metric_at(p), ricci_warped(m, 0.5));
  auto err = [&](double h) {
    OracleOptions o;
    o.step = h;
    o.richardson = false;
    return (ricci_fd(c, p, o) - pred).cwiseAbs().maxCoeff();
  };
  double e1 = err(0.04), e2 = err(0.02);
  EXPECT_GT(e1 / e2, 10.0);  // fourth order stencil: ideal ratio 16
}

TEST(Oracle, BoundaryProximityAndSingularity) {
  auto flat = ExplicitChart::from_exprs({"x", "y", "z"}, {{"1", "", ""}, {"", "1", ""}, {"", "", "1"}}, {-1, -1, -1}, {1, 1, 1});
  EXPECT_THROW(ricci_fd(flat, {0.999, 0.0, 0.0}), Error);
  auto deg = ExplicitChart::from_exprs({"x", "y", "z"}, {{"1", "", ""}, {"", "0", ""}, {"", "", "1"}}, {-1, -1, -1}, {1, 1, 1});
  EXPECT_THROW(ricci_fd(deg, {0.0, 0.0, 0.0}), Error);
}

TEST(Oracle, EquivalenceAcrossFamilies) {
  std::vector<WarpedMetric> ms{
      warped(4, "sin(t)", {0, M_PI}, ChartKind::polar_both, EinsteinFiber{3, 2.0}, {0.2, 2.9}),
      warped(4, "t", {0, kInf}, ChartKind::polar_left, EinsteinFiber{3, 2.0}, {0.2, 5}),
      warped(5, "cosh(t)", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{4, -3.0}, {-1.5, 1.5}),
      warped(3, "exp(t)", {-kInf, kInf}, ChartKind::rectangular, EinsteinFiber{2, 0.0}, {-1.5, 1.5}),
      warped(4, "exp(t)", {-kInf, kInf}, ChartKind::rectangular, ProductFiber(make_product_fiber(3, parse("sqrt(1+y^2)", {"y"}), 1.0)), {-1.5, 1.5}),
  };
  RealFunction f = fn("sin(t) + t^2/3");
  for (const auto& m : ms) EXPECT_LT(oracle_gap(m, &f, 20, 42), 1e-6);
}
