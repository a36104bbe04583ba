#pragma once

// Warped products dt^2 + v(t)^2 g_N over a one-dimensional base and their reduced curvature.

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "gqe/chart.hpp"
#include "gqe/function.hpp"

namespace gqe {

enum class ChartKind { rectangular, polar_left, polar_both };
enum class Gauge { g, h };

inline const char* to_string(ChartKind k) {
  switch (k) {
    case ChartKind::rectangular: return "rectangular";
    case ChartKind::polar_left: return "polar_left";
    case ChartKind::polar_both: return "polar_both";
  }
  return "?";
}
inline const char* to_string(Gauge g) { return g == Gauge::g ? "g" : "h"; }

// Einstein fiber: Ric_N = mu g_N, dim N = dim.
struct EinsteinFiber {
  int dim = 2;
  double mu = 0.0;
};

// g_N = dy^2 + rho(y)^2 g_F with F Einstein of dimension dim - 1 and constant sub_mu.
struct ProductFiber {
  int dim = 3;
  Expr rho = Expr(1.0);
  double sub_mu = 0.0;
  Interval y_box{-1.0, 1.0};
  RealFunction rho_f;  // compiled rho; filled by make_product_fiber

  RealFunction rho_fn() const { return rho_f.valid() ? rho_f : RealFunction::from_expr(rho, "y"); }
};

inline ProductFiber make_product_fiber(int dim, const Expr& rho, double sub_mu, Interval y_box = {-1.0, 1.0}) {
  ProductFiber p;
  p.dim = dim;
  p.rho = rho;
  p.sub_mu = sub_mu;
  p.y_box = y_box;
  p.rho_f = RealFunction::from_expr(rho, "y");
  return p;
}

using Fiber = std::variant<EinsteinFiber, ProductFiber>;

inline int fiber_dim(const Fiber& f) {
  return std::visit([](const auto& x) { return x.dim; }, f);
}

// Ricci eigenvalues of the fiber metric g_N relative to g_N at fiber coordinate y.
struct FiberRicci {
  double e_y;  // flat direction (equals e_F for Einstein fibers)
  double e_F;
};

inline FiberRicci fiber_ricci(const Fiber& fiber, double y = 0.0) {
  if (const auto* e = std::get_if<EinsteinFiber>(&fiber)) return {e->mu, e->mu};
  const auto& p = std::get<ProductFiber>(fiber);
  Jet r = p.rho_fn().jet(y);
  const double d = p.dim;
  return {-(d - 1.0) * r.d2 / r.v, (p.sub_mu - r.v * r.d2 - (d - 2.0) * r.d1 * r.d1) / (r.v * r.v)};
}

// Laplacian of a function of y on the fiber.
inline double fiber_laplacian(const Fiber& fiber, const Jet& f, double y) {
  const auto* p = std::get_if<ProductFiber>(&fiber);
  require(p != nullptr, Errc::invalid_argument, "fiber potentials need a product fiber");
  Jet r = p->rho_fn().jet(y);
  return f.d2 + (p->dim - 1.0) * r.d1 / r.v * f.d1;
}

struct WarpedMetric {
  int n = 3;
  Interval interval;
  Interval sample_box;
  RealFunction warp;
  ChartKind kind = ChartKind::rectangular;
  Fiber fiber = EinsteinFiber{};
  Gauge gauge = Gauge::g;
  std::string coordinate = "t";

  Jet v(double t) const { return warp.jet(t); }
};

inline Interval default_sample_box(Interval I) {
  double a = I.lo, b = I.hi;
  if (!std::isfinite(a) && !std::isfinite(b)) { a = -2.0; b = 2.0; }
  else if (!std::isfinite(b)) b = a + 4.0;
  else if (!std::isfinite(a)) a = b - 4.0;
  double pad = 0.02 * (b - a);
  return {a + pad, b - pad};
}

struct WarpedOptions {
  std::optional<Interval> sample_box;
  double polar_tol = 1e-6;
  int positivity_samples = 64;
  bool check_polar = true;
};

inline WarpedMetric make_warped(int n, Interval interval, RealFunction warp, ChartKind kind, Fiber fiber,
                                Gauge gauge, WarpedOptions opt = {}) {
  require(n >= 3, Errc::invalid_argument, "dimension must be at least 3");
  require(interval.lo < interval.hi, Errc::invalid_argument, "empty base interval");
  require(fiber_dim(fiber) == n - 1, Errc::invalid_argument,
          "fiber dimension " + std::to_string(fiber_dim(fiber)) + " must be n-1 = " + std::to_string(n - 1));
  if (const auto* p = std::get_if<ProductFiber>(&fiber)) {
    require(p->dim >= 2, Errc::invalid_argument, "product fiber needs a sub-fiber of dimension >= 1");
    require(p->dim - 1 >= 2 || p->sub_mu == 0.0, Errc::invalid_argument, "a circle sub-fiber has Einstein constant 0");
  } else {
    require(std::isfinite(std::get<EinsteinFiber>(fiber).mu), Errc::invalid_argument, "Einstein constant must be finite");
  }
  require(warp.valid(), Errc::invalid_argument, "missing warp function");
  WarpedMetric m;
  m.n = n;
  m.interval = interval;
  m.sample_box = opt.sample_box ? *opt.sample_box : default_sample_box(interval);
  m.warp = std::move(warp);
  m.kind = kind;
  m.fiber = std::move(fiber);
  m.gauge = gauge;
  const Interval& B = m.sample_box;
  require(B.finite() && B.lo < B.hi && B.lo >= interval.lo && B.hi <= interval.hi, Errc::invalid_argument,
          "sample box must be a finite subinterval of the base interval");
  for (int i = 0; i <= opt.positivity_samples; ++i) {
    double t = B.lo + (B.hi - B.lo) * i / opt.positivity_samples;
    if (!interval.contains(t)) continue;
    double v = m.warp(t);
    require(v > 0.0, Errc::invalid_argument, "warp is not positive at t = " + std::to_string(t));
  }
  if (kind != ChartKind::rectangular && opt.check_polar) {
    const auto* e = std::get_if<EinsteinFiber>(&m.fiber);
    require(e && e->mu > 0.0, Errc::invalid_argument, "polar charts need a round sphere fiber");
    double slope = std::sqrt(e->mu / (n - 2.0));
    auto check_end = [&](double a, double sign) {
      require(std::isfinite(a), Errc::invalid_argument, "polar end must be finite");
      Jet j = m.warp.jet(a);
      require(std::fabs(j.v) <= opt.polar_tol && std::fabs(j.d1 - sign * slope) <= opt.polar_tol,
              Errc::invalid_argument,
              "polar end at t = " + std::to_string(a) + " is not smooth: v = " + std::to_string(j.v) +
                  ", v' = " + std::to_string(j.d1));
    };
    check_end(interval.lo, 1.0);
    if (kind == ChartKind::polar_both) check_end(interval.hi, -1.0);
  }
  return m;
}

inline void require_interior(const WarpedMetric& m, double t) {
  require(m.interval.contains(t), Errc::out_of_range,
          "t = " + std::to_string(t) + " outside (" + std::to_string(m.interval.lo) + ", " +
              std::to_string(m.interval.hi) + ")");
}

// Eigenvalues relative to the metric: radial on dt^2, tangential on the fiber block
// (the g_F block for product fibers), mixed_fiber on dy^2 for product fibers.
struct RicciEigenpair {
  double radial = 0.0;
  double tangential = 0.0;
  std::optional<double> mixed_fiber;
};

inline RicciEigenpair ricci_warped(const WarpedMetric& m, double t, double y = 0.0) {
  require_interior(m, t);
  Jet v = m.v(t);
  require(v.v > 0.0, Errc::domain, "warp not positive at t = " + std::to_string(t));
  const double n = m.n;
  FiberRicci fr = fiber_ricci(m.fiber, y);
  auto tang = [&](double e) { return (e - v.v * v.d2 - (n - 2.0) * v.d1 * v.d1) / (v.v * v.v); };
  RicciEigenpair r;
  r.radial = -(n - 1.0) * v.d2 / v.v;
  r.tangential = tang(fr.e_F);
  if (std::holds_alternative<ProductFiber>(m.fiber)) r.mixed_fiber = tang(fr.e_y);
  return r;
}

inline RicciEigenpair hess_potential(const WarpedMetric& m, const Jet& f, double t) {
  require_interior(m, t);
  Jet v = m.v(t);
  RicciEigenpair r;
  r.radial = f.d2;
  r.tangential = f.d1 * v.d1 / v.v;
  if (std::holds_alternative<ProductFiber>(m.fiber)) r.mixed_fiber = r.tangential;
  return r;
}

inline RicciEigenpair hess_potential(const WarpedMetric& m, const RealFunction& f, double t) {
  return hess_potential(m, f.jet(t), t);
}

inline double laplacian_warped(const WarpedMetric& m, const Jet& f, double t) {
  require_interior(m, t);
  Jet v = m.v(t);
  return f.d2 + (m.n - 1.0) * v.d1 / v.v * f.d1;
}

inline double laplacian_warped(const WarpedMetric& m, const RealFunction& f, double t) {
  return laplacian_warped(m, f.jet(t), t);
}

// Explicit chart of the warped product: coordinates (t, fiber coordinates).
inline ExplicitChart build_chart(const WarpedMetric& m) {
  require(m.n <= 5, Errc::invalid_argument, "explicit charts are supported up to dimension 5");
  std::vector<std::string> names{m.coordinate};
  std::vector<std::function<double(const double*)>> comps{[](const double*) { return 1.0; }};
  std::vector<double> lo{m.sample_box.lo}, hi{m.sample_box.hi};
  std::vector<Block> blocks{Block::radial};
  std::vector<std::string> text{"1"};
  RealFunction w = m.warp;
  auto v2 = [w](const double* p) {
    double v = w(p[0]);
    return v * v;
  };
  if (const auto* e = std::get_if<EinsteinFiber>(&m.fiber)) {
    ModelPiece piece = model_space(e->dim, e->mu, 1, "");
    for (std::size_t i = 0; i < piece.names.size(); ++i) {
      auto c = piece.comps[i];
      names.push_back(piece.names[i]);
      comps.push_back([v2, c](const double* p) { return v2(p) * c(p); });
      lo.push_back(piece.lo[i]);
      hi.push_back(piece.hi[i]);
      blocks.push_back(Block::fiber_rest);
      text.push_back("v^2*" + piece.text[i]);
    }
  } else {
    const auto& pf = std::get<ProductFiber>(m.fiber);
    RealFunction rho = pf.rho_fn();
    names.push_back("y");
    comps.push_back(v2);
    lo.push_back(pf.y_box.lo);
    hi.push_back(pf.y_box.hi);
    blocks.push_back(Block::fiber_y);
    text.push_back("v^2");
    ModelPiece piece = model_space(pf.dim - 1, pf.sub_mu, 2, "F");
    for (std::size_t i = 0; i < piece.names.size(); ++i) {
      auto c = piece.comps[i];
      names.push_back(piece.names[i]);
      comps.push_back([v2, c, rho](const double* p) {
        double r = rho(p[1]);
        return v2(p) * r * r * c(p);
      });
      lo.push_back(piece.lo[i]);
      hi.push_back(piece.hi[i]);
      blocks.push_back(Block::fiber_rest);
      text.push_back("v^2*rho^2*" + piece.text[i]);
    }
  }
  return diagonal_chart(std::move(names), std::move(comps), std::move(lo), std::move(hi), std::move(blocks),
                        std::move(text));
}

// Tensor with the given block eigenvalues relative to a block-diagonal metric g.
inline Matrix reduced_tensor(const ExplicitChart& chart, const Matrix& g, const RicciEigenpair& e) {
  const int d = chart.dim;
  Matrix T = Matrix::Zero(d, d);
  auto eig = [&](Block b) {
    switch (b) {
      case Block::radial: return e.radial;
      case Block::fiber_y: return e.mixed_fiber.value_or(e.tangential);
      default: return e.tangential;
    }
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (chart.blocks[i] == chart.blocks[j]) T(i, j) = eig(chart.blocks[i]) * g(i, j);
  return T;
}

}  // namespace gqe
