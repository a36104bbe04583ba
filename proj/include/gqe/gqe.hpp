#pragma once

// GQE structures Ric + Hess f + alpha df(x)df = lambda g and the conformal gauge
// h = exp(-2f/(n-2)) g, in which Ric_h = (1/(n-2) - alpha) df(x)df + Q h.

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "gqe/geometry.hpp"
#include "gqe/oracle.hpp"

namespace gqe {

struct ConstantPotential {
  double value = 0.0;
};
struct OfBase {
  RealFunction f;  // function of the base coordinate
};
struct OfFiber {
  RealFunction f;  // function of the product-fiber coordinate y
};
using Potential = std::variant<ConstantPotential, OfBase, OfFiber>;

enum class CoefficientKind { lambda, Q };

// For g-gauge structures with an OfFiber potential, `metric` holds the h-shape and the
// GQE metric itself is exp(2f/(n-2)) * metric.
struct GQEStructure {
  WarpedMetric metric;
  Potential potential;
  ScalarField alpha;
  CoefficientKind kind = CoefficientKind::lambda;
  ScalarField coefficient;  // lambda in the g-gauge, Q in the h-gauge
  bool conformally_einstein = false;

  int n() const { return metric.n; }
  Gauge gauge() const { return metric.gauge; }
  bool fiber_potential() const { return std::holds_alternative<OfFiber>(potential); }
};

// Points (t, y) spread over the sample box; y only matters for product fibers.
inline std::vector<std::pair<double, double>> sample_grid(const WarpedMetric& m, int count) {
  std::vector<std::pair<double, double>> pts;
  Interval yb{0.0, 0.0};
  if (const auto* p = std::get_if<ProductFiber>(&m.fiber)) yb = p->y_box;
  const double golden = 0.6180339887498949;
  for (int i = 0; i < count; ++i) {
    double t = m.sample_box.lo + (m.sample_box.hi - m.sample_box.lo) * (i + 0.5) / count;
    double frac = std::fmod((i + 0.5) * golden, 1.0);
    pts.emplace_back(t, yb.lo + (yb.hi - yb.lo) * frac);
  }
  return pts;
}

inline GQEStructure make_structure(WarpedMetric metric, Potential potential, ScalarField alpha, CoefficientKind kind,
                                   ScalarField coefficient, bool conformally_einstein = false) {
  require((metric.gauge == Gauge::g) == (kind == CoefficientKind::lambda), Errc::invalid_argument,
          "gauge label does not match the coefficient (g pairs with lambda, h with Q)");
  if (std::holds_alternative<OfFiber>(potential))
    require(std::holds_alternative<ProductFiber>(metric.fiber), Errc::invalid_argument,
            "a fiber potential needs a product fiber");
  if (const auto* b = std::get_if<OfBase>(&potential)) require(b->f.valid(), Errc::invalid_argument, "missing potential");
  GQEStructure s{std::move(metric), std::move(potential), std::move(alpha), kind, std::move(coefficient), conformally_einstein};
  if (!conformally_einstein) {
    const double crit = 1.0 / (s.n() - 2.0);
    bool all_critical = true;
    for (auto [t, y] : sample_grid(s.metric, 16))
      if (std::fabs(s.alpha(t, y) - crit) > 1e-12) all_critical = false;
    require(!all_critical, Errc::invalid_argument,
            "alpha is identically 1/(n-2); set the conformally-Einstein flag to allow it");
  }
  return s;
}

inline Jet potential_jet(const Potential& p, double t, double y) {
  if (const auto* c = std::get_if<ConstantPotential>(&p)) return {c->value, 0.0, 0.0};
  if (const auto* b = std::get_if<OfBase>(&p)) return b->f.jet(t);
  return std::get<OfFiber>(p).f.jet(y);
}

struct BlockResidual {
  double radial = 0.0;
  double tangential = 0.0;
  std::optional<double> mixed_fiber;
  double max_abs() const {
    double m = std::max(std::fabs(radial), std::fabs(tangential));
    if (mixed_fiber) m = std::max(m, std::fabs(*mixed_fiber));
    return m;
  }
};

namespace detail {

// h-gauge residual blocks for a fiber potential, relative to h.
inline BlockResidual fiber_h_blocks(const GQEStructure& s, double t, double y, double Q) {
  RicciEigenpair ric = ricci_warped(s.metric, t, y);
  Jet f = std::get<OfFiber>(s.potential).f.jet(y);
  double v = s.metric.warp(t);
  const double n = s.n();
  BlockResidual r;
  r.radial = ric.radial - Q;
  r.tangential = ric.tangential - Q;
  r.mixed_fiber = *ric.mixed_fiber - (1.0 / (n - 2.0) - s.alpha(t, y)) * f.d1 * f.d1 / (v * v) - Q;
  return r;
}

inline double fiber_potential_laplacian_h(const GQEStructure& s, double t, double y) {
  Jet f = std::get<OfFiber>(s.potential).f.jet(y);
  double v = s.metric.warp(t);
  return fiber_laplacian(s.metric.fiber, f, y) / (v * v);
}

}  // namespace detail

// Eigenvalue residuals relative to the structure's own metric.
inline BlockResidual residual_reduced(const GQEStructure& s, double t, double y = 0.0) {
  const double n = s.n();
  const double a = s.alpha(t, y);
  const double c = s.coefficient(t, y);
  if (s.fiber_potential()) {
    if (s.kind == CoefficientKind::Q) return detail::fiber_h_blocks(s, t, y, c);
    double f = std::get<OfFiber>(s.potential).f(y);
    double e2 = std::exp(2.0 * f / (n - 2.0));
    double Q = detail::fiber_potential_laplacian_h(s, t, y) / (n - 2.0) + c * e2;
    BlockResidual r = detail::fiber_h_blocks(s, t, y, Q);
    r.radial /= e2;
    r.tangential /= e2;
    *r.mixed_fiber /= e2;
    return r;
  }
  RicciEigenpair ric = ricci_warped(s.metric, t, y);
  Jet f = potential_jet(s.potential, t, y);
  BlockResidual r;
  if (s.kind == CoefficientKind::lambda) {
    RicciEigenpair h = hess_potential(s.metric, f, t);
    r.radial = ric.radial + h.radial + a * f.d1 * f.d1 - c;
    r.tangential = ric.tangential + h.tangential - c;
    if (ric.mixed_fiber) r.mixed_fiber = *ric.mixed_fiber + *h.mixed_fiber - c;
  } else {
    r.radial = ric.radial - (1.0 / (n - 2.0) - a) * f.d1 * f.d1 - c;
    r.tangential = ric.tangential - c;
    if (ric.mixed_fiber) r.mixed_fiber = *ric.mixed_fiber - c;
  }
  return r;
}

inline double max_residual(const GQEStructure& s, int samples) {
  double m = 0.0;
  for (auto [t, y] : sample_grid(s.metric, samples)) m = std::max(m, residual_reduced(s, t, y).max_abs());
  return m;
}

// Explicit chart with the structure's potential, alpha and coefficient as chart functions.
struct OracleSetup {
  ExplicitChart chart;
  ChartFunction f, alpha, coefficient;
};

inline OracleSetup oracle_setup(const GQEStructure& s) {
  OracleSetup o;
  o.chart = build_chart(s.metric);
  bool product = std::holds_alternative<ProductFiber>(s.metric.fiber);
  auto yof = [product](const double* p) { return product ? p[1] : 0.0; };
  Potential pot = s.potential;
  o.f = [pot, yof](const double* p) { return potential_jet(pot, p[0], yof(p)).v; };
  ScalarField a = s.alpha, c = s.coefficient;
  o.alpha = [a, yof](const double* p) { return a(p[0], yof(p)); };
  o.coefficient = [c, yof](const double* p) { return c(p[0], yof(p)); };
  if (s.fiber_potential() && s.kind == CoefficientKind::lambda) {
    const double n = s.n();
    RealFunction f = std::get<OfFiber>(s.potential).f;
    o.chart = conformal_chart(o.chart, [f, n](const double* p) { return f(p[1]) / (n - 2.0); });
  }
  return o;
}

// Max normalized entry of the oracle residual matrix at a chart point.
inline double oracle_residual(const GQEStructure& s, const OracleSetup& o, const std::vector<double>& p,
                              const OracleOptions& opt = {}) {
  Matrix R = s.kind == CoefficientKind::lambda ? gqe_residual_fd(o.chart, o.f, o.alpha, o.coefficient, p, opt)
                                               : gqe_h_residual_fd(o.chart, o.f, o.alpha, o.coefficient, p, opt);
  return normalized_max_abs(R, o.chart.metric_at(p));
}

// ------------------------------------------------------------------ gauge change

namespace detail {

struct WorkingRange {
  double lo, hi, anchor;
  bool includes_lo_end, includes_hi_end;
};

inline WorkingRange working_range(const WarpedMetric& m, const std::function<double(double)>& density) {
  auto usable = [&](double x) {
    if (!std::isfinite(x)) return false;
    try {
      double d = density(x);
      return std::isfinite(d) && d != 0.0;
    } catch (const Error&) {
      return false;
    }
  };
  WorkingRange w;
  w.includes_lo_end = usable(m.interval.lo);
  w.lo = w.includes_lo_end ? m.interval.lo : m.sample_box.lo;
  w.includes_hi_end = usable(m.interval.hi);
  w.hi = w.includes_hi_end ? m.interval.hi : m.sample_box.hi;
  if (w.includes_lo_end) w.anchor = w.lo;
  else if (w.lo < 0.0 && 0.0 < w.hi) w.anchor = 0.0;
  else w.anchor = w.lo;
  for (int i = 0; i <= 256; ++i) {
    double x = w.lo + (w.hi - w.lo) * i / 256.0;
    require(usable(x), Errc::domain, "change-of-variables integrand is not finite at " + std::to_string(x));
  }
  return w;
}

inline WarpedMetric mapped_metric(const WarpedMetric& src, const CoordinateMap& map, RealFunction warp, Gauge gauge,
                                  const WorkingRange& w) {
  WarpedMetric m = src;
  m.warp = std::move(warp);
  m.gauge = gauge;
  m.interval = map.new_range();
  Interval box{map.to_new(src.sample_box.lo), map.to_new(src.sample_box.hi)};
  if (box.lo > box.hi) std::swap(box.lo, box.hi);
  box.lo = std::max(box.lo, m.interval.lo);
  box.hi = std::min(box.hi, m.interval.hi);
  m.sample_box = box;
  if (!w.includes_lo_end) m.kind = ChartKind::rectangular;
  else if (m.kind == ChartKind::polar_both && !w.includes_hi_end) m.kind = ChartKind::polar_left;
  return m;
}

}  // namespace detail

struct GaugeChange {
  GQEStructure result;
  CoordinateMap map;  // new base coordinate as a function of the old one
};

// g-gauge -> h-gauge.
inline GaugeChange to_h(const GQEStructure& s) {
  require(s.gauge() == Gauge::g, Errc::invalid_argument, "to_h expects a g-gauge structure");
  const double n = s.n();
  const double k = 1.0 / (n - 2.0);
  if (s.fiber_potential()) {
    GQEStructure h = s;
    h.metric.gauge = Gauge::h;
    h.kind = CoefficientKind::Q;
    GQEStructure src = s;
    h.coefficient = ScalarField::from_fn(
        [src, k](double t, double y) {
          double f = std::get<OfFiber>(src.potential).f(y);
          return detail::fiber_potential_laplacian_h(src, t, y) * k + src.coefficient(t, y) * std::exp(2.0 * k * f);
        },
        Dependence::both);
    return {h, CoordinateMap()};
  }
  Potential pot = s.potential;
  RealFunction density = RealFunction::from_jet([pot, k](double x) {
    Jet f = potential_jet(pot, x, 0.0);
    double e = std::exp(-k * f.v);
    return Jet{e, -k * f.d1 * e, e * (k * k * f.d1 * f.d1 - k * f.d2)};
  });
  auto w = detail::working_range(s.metric, [&density](double x) { return density(x); });
  CoordinateMap map(density, w.lo, w.hi, w.anchor, w.anchor);
  WarpedMetric gm = s.metric;
  RealFunction warp = RealFunction::from_jet([gm, pot, map, k](double t) {
    double x = map.to_old(t);
    Jet v = gm.v(x);
    Jet f = potential_jet(pot, x, 0.0);
    double e = std::exp(-k * f.v);
    return Jet{e * v.v, v.d1 - k * f.d1 * v.v, (v.d2 - k * (f.d2 * v.v + f.d1 * v.d1)) / e};
  });
  RealFunction fh = RealFunction::from_jet([pot, map, k](double t) {
    double x = map.to_old(t);
    Jet f = potential_jet(pot, x, 0.0);
    double ie = std::exp(k * f.v);
    return Jet{f.v, f.d1 * ie, ie * ie * (f.d2 + k * f.d1 * f.d1)};
  });
  GQEStructure h = s;
  h.metric = detail::mapped_metric(s.metric, map, warp, Gauge::h, w);
  h.potential = std::holds_alternative<ConstantPotential>(pot) ? pot : Potential(OfBase{fh});
  auto back = [map](double t) { return map.to_old(t); };
  h.alpha = s.alpha.compose_base(back);
  h.kind = CoefficientKind::Q;
  ScalarField lam = s.coefficient;
  h.coefficient = ScalarField::from_fn(
      [gm, pot, lam, map, k](double t, double y) {
        double x = map.to_old(t);
        Jet f = potential_jet(pot, x, 0.0);
        double lap = laplacian_warped(gm, f, x);
        return (lap - f.d1 * f.d1 + lam(x, y) / k) * std::exp(2.0 * k * f.v) * k;
      },
      lam.dependence() == Dependence::none ? Dependence::base : Dependence::both);
  return {h, map};
}

struct FromHOptions {
  std::optional<ScalarField> lambda;  // expected lambda on h coordinates; checked when given
  double tol = 1e-8;
  int check_samples = 50;
};

// h-gauge -> g-gauge. lambda is implied by Q; a supplied lambda is checked against it.
inline GaugeChange from_h(const GQEStructure& s, const FromHOptions& opt = {}) {
  require(s.gauge() == Gauge::h, Errc::invalid_argument, "from_h expects an h-gauge structure");
  const double n = s.n();
  const double k = 1.0 / (n - 2.0);
  GQEStructure src = s;
  auto implied = [src, k](double t, double y) {
    Jet f = potential_jet(src.potential, t, y);
    double lap = src.fiber_potential() ? detail::fiber_potential_laplacian_h(src, t, y)
                                       : laplacian_warped(src.metric, f, t);
    return (src.coefficient(t, y) - lap * k) * std::exp(-2.0 * k * f.v);
  };
  if (opt.lambda) {
    for (auto [t, y] : sample_grid(s.metric, opt.check_samples)) {
      double a = implied(t, y), b = (*opt.lambda)(t, y);
      require(std::fabs(a - b) <= opt.tol * std::max(1.0, std::fabs(a)), Errc::check_failed,
              "lambda inconsistent with Q at t = " + std::to_string(t) + ": implied " + std::to_string(a) +
                  ", given " + std::to_string(b));
    }
  }
  if (s.fiber_potential()) {
    GQEStructure g = s;
    g.metric.gauge = Gauge::g;
    g.kind = CoefficientKind::lambda;
    g.coefficient = ScalarField::from_fn(implied, Dependence::both);
    return {g, CoordinateMap()};
  }
  Potential pot = s.potential;
  RealFunction density = RealFunction::from_jet([pot, k](double x) {
    Jet f = potential_jet(pot, x, 0.0);
    double e = std::exp(k * f.v);
    return Jet{e, k * f.d1 * e, e * (k * k * f.d1 * f.d1 + k * f.d2)};
  });
  auto w = detail::working_range(s.metric, [&density](double x) { return density(x); });
  CoordinateMap map(density, w.lo, w.hi, w.anchor, w.anchor);
  WarpedMetric hm = s.metric;
  RealFunction warp = RealFunction::from_jet([hm, pot, map, k](double sc) {
    double t = map.to_old(sc);
    Jet v = hm.v(t);
    Jet f = potential_jet(pot, t, 0.0);
    double e = std::exp(k * f.v);
    return Jet{e * v.v, v.d1 + k * f.d1 * v.v, (v.d2 + k * (f.d2 * v.v + f.d1 * v.d1)) / e};
  });
  RealFunction fg = RealFunction::from_jet([pot, map, k](double sc) {
    double t = map.to_old(sc);
    Jet f = potential_jet(pot, t, 0.0);
    double ie = std::exp(-k * f.v);
    return Jet{f.v, f.d1 * ie, ie * ie * (f.d2 - k * f.d1 * f.d1)};
  });
  GQEStructure g = s;
  g.metric = detail::mapped_metric(s.metric, map, warp, Gauge::g, w);
  g.potential = std::holds_alternative<ConstantPotential>(pot) ? pot : Potential(OfBase{fg});
  auto back = [map](double sc) { return map.to_old(sc); };
  g.alpha = s.alpha.compose_base(back);
  g.kind = CoefficientKind::lambda;
  g.coefficient = ScalarField::from_fn([implied, map](double sc, double y) { return implied(map.to_old(sc), y); },
                                       Dependence::both);
  return {g, map};
}

}  // namespace gqe
