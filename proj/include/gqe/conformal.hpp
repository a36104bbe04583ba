#pragma once

// Conformal changes h2 = u^{-2} h1 by antiderivatives u of the warp, the resulting Q2 and
// lambda2, and the presentation of u^{-2} h1 as a warped product over dr = dt/u.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gqe/gqe.hpp"

namespace gqe {

// ------------------------------------------------------------------ utilities

// Closed-form antiderivative for sums and multiples of elementary functions of a linear argument.
inline std::optional<Expr> integrate_simple(const Expr& e, const std::string& var) {
  if (!e.free_variables().count(var)) return e * ex::var(var);
  auto linear_slope = [&](const Expr& arg) -> std::optional<double> {
    Expr d = differentiate(arg, var);
    if (d.is_constant() && d.constant_value() != 0.0) return d.constant_value();
    return std::nullopt;
  };
  switch (e.op()) {
    case Op::variable: return 0.5 * e * e;
    case Op::add:
    case Op::sub: {
      auto a = integrate_simple(e.lhs(), var), b = integrate_simple(e.rhs(), var);
      if (!a || !b) return std::nullopt;
      return e.op() == Op::add ? *a + *b : *a - *b;
    }
    case Op::neg: {
      auto a = integrate_simple(e.lhs(), var);
      if (!a) return std::nullopt;
      return -*a;
    }
    case Op::mul: {
      if (!e.lhs().free_variables().count(var)) {
        auto b = integrate_simple(e.rhs(), var);
        if (b) return e.lhs() * *b;
      }
      if (!e.rhs().free_variables().count(var)) {
        auto a = integrate_simple(e.lhs(), var);
        if (a) return *a * e.rhs();
      }
      return std::nullopt;
    }
    case Op::div: {
      if (e.rhs().free_variables().count(var)) return std::nullopt;
      auto a = integrate_simple(e.lhs(), var);
      if (!a) return std::nullopt;
      return *a / e.rhs();
    }
    case Op::pow: {
      if (!e.rhs().is_constant()) return std::nullopt;
      double p = e.rhs().constant_value();
      auto k = linear_slope(e.lhs());
      if (!k || p == -1.0) return std::nullopt;
      return ex::pow(e.lhs(), Expr(p + 1.0)) / ((p + 1.0) * *k);
    }
    case Op::sin:
    case Op::cos:
    case Op::sinh:
    case Op::cosh:
    case Op::exp: {
      Expr a = e.lhs();
      auto k = linear_slope(a);
      if (!k) return std::nullopt;
      switch (e.op()) {
        case Op::sin: return -ex::cos(a) / *k;
        case Op::cos: return ex::sin(a) / *k;
        case Op::sinh: return ex::cosh(a) / *k;
        case Op::cosh: return ex::sinh(a) / *k;
        default: return ex::exp(a) / *k;
      }
    }
    default: return std::nullopt;
  }
}

struct Constancy {
  double min = 0.0, max = 0.0, mean = 0.0;
  double spread = 0.0;    // max - min
  double relative = 0.0;  // spread / max(1, |mean|)
  bool constant = false;
};

inline Constancy constancy(const std::function<double(double)>& fn, Interval box, int samples, double rel_tol) {
  Constancy c;
  c.min = kInf;
  c.max = -kInf;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    double x = box.lo + (box.hi - box.lo) * (i + 0.5) / samples;
    double y = fn(x);
    c.min = std::min(c.min, y);
    c.max = std::max(c.max, y);
    sum += y;
  }
  c.mean = sum / samples;
  c.spread = c.max - c.min;
  c.relative = c.spread / std::max(1.0, std::fabs(c.mean));
  c.constant = c.relative <= rel_tol;
  return c;
}

struct PositivityDomain {
  Interval domain;            // maximal open subinterval around the anchor where u != 0
  bool lo_zero = false, hi_zero = false;
  std::vector<double> zeros;  // all zeros found in the scanned range
};

// Scan u on [lo, hi], bisect sign changes, and keep the zero-free piece containing `anchor`.
inline PositivityDomain positivity_domain(const std::function<double(double)>& u, double lo, double hi, double anchor,
                                          int scan = 1024) {
  require(lo <= anchor && anchor <= hi, Errc::invalid_argument, "anchor outside the scanned range");
  PositivityDomain pd;
  auto bisect = [&](double a, double b) {
    double fa = u(a);
    for (int i = 0; i < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(a)); ++i) {
      double m = 0.5 * (a + b), fm = u(m);
      if (fm == 0.0) return m;
      if ((fm > 0) == (fa > 0)) { a = m; fa = fm; } else b = m;
    }
    return 0.5 * (a + b);
  };
  double prev_x = lo, prev = u(lo);
  if (prev == 0.0) pd.zeros.push_back(lo);
  for (int i = 1; i <= scan; ++i) {
    double x = lo + (hi - lo) * i / scan, fx = u(x);
    if (fx == 0.0) pd.zeros.push_back(x);
    else if (prev != 0.0 && (fx > 0) != (prev > 0)) pd.zeros.push_back(bisect(prev_x, x));
    prev_x = x;
    prev = fx;
  }
  require(u(anchor) != 0.0, Errc::domain, "u vanishes at the anchor t = " + std::to_string(anchor));
  pd.domain = {lo, hi};
  for (double z : pd.zeros) {
    if (z < anchor && z >= pd.domain.lo) { pd.domain.lo = z; pd.lo_zero = true; }
    if (z > anchor && z <= pd.domain.hi) { pd.domain.hi = z; pd.hi_zero = true; }
  }
  return pd;
}

// ------------------------------------------------------------------ reparametrization

struct ReparamOptions {
  std::optional<double> anchor;       // r(anchor) = anchor; defaults to a pole or the sample box start
  std::optional<Interval> request;    // subinterval of t that must be free of zeros of u
  int scan = 1024;
  int isometry_samples = 20;
  double isometry_tol = 1e-7;
};

struct Reparam {
  WarpedMetric metric;        // u^{-2} h1 = dr^2 + (v/u)^2 g_N
  CoordinateMap map;          // r as a function of t
  PositivityDomain positivity;
  Interval working;           // t-range covered by the map
  RealFunction u;             // u with its sign normalized to be positive on the domain
  double isometry_defect = 0.0;
};

namespace detail {

inline bool finite_at(const std::function<double(double)>& f, double x) {
  if (!std::isfinite(x)) return false;
  try {
    return std::isfinite(f(x));
  } catch (const Error&) {
    return false;
  }
}

// Ricci eigenvalues of u^{-2} h1 relative to itself from the conformal-change formula.
inline RicciEigenpair conformal_ricci(const WarpedMetric& h1, const Jet& u, double t, double y) {
  RicciEigenpair r1 = ricci_warped(h1, t, y);
  Jet v = h1.v(t);
  const double n = h1.n;
  double hr = u.d2, ht = u.d1 * v.d1 / v.v;
  double lap = u.d2 + (n - 1.0) * v.d1 / v.v * u.d1;
  double common = u.v * lap - (n - 1.0) * u.d1 * u.d1;
  double s = u.v * u.v;
  RicciEigenpair r;
  r.radial = s * r1.radial + (n - 2.0) * u.v * hr + common;
  r.tangential = s * r1.tangential + (n - 2.0) * u.v * ht + common;
  if (r1.mixed_fiber) r.mixed_fiber = s * *r1.mixed_fiber + (n - 2.0) * u.v * ht + common;
  return r;
}

}  // namespace detail

// Presents u^{-2} h1 as a warped product in r with dr = dt/u; the result is checked against the
// conformal-change formula for Ricci at sample points.
inline Reparam reparametrize(const WarpedMetric& h1, const RealFunction& u_in, ReparamOptions opt = {}) {
  std::function<double(double)> uf = [&u_in](double t) { return u_in(t); };
  auto vf = [&h1](double t) { return h1.warp(t); };
  bool lo_end = detail::finite_at(vf, h1.interval.lo) && detail::finite_at(uf, h1.interval.lo);
  bool hi_end = detail::finite_at(vf, h1.interval.hi) && detail::finite_at(uf, h1.interval.hi);
  double lo = lo_end ? h1.interval.lo : h1.sample_box.lo;
  double hi = hi_end ? h1.interval.hi : h1.sample_box.hi;
  double anchor = opt.anchor ? *opt.anchor : h1.sample_box.lo + 0.5 * (h1.sample_box.hi - h1.sample_box.lo);
  Reparam out;
  out.positivity = positivity_domain(uf, lo, hi, anchor, opt.scan);
  const PositivityDomain& pd = out.positivity;
  if (opt.request) {
    for (double z : pd.zeros)
      require(!(z >= opt.request->lo && z <= opt.request->hi), Errc::domain,
              "u vanishes at t = " + std::to_string(z) + " inside the requested interval");
  }
  double wlo = pd.domain.lo, whi = pd.domain.hi;
  double width = whi - wlo;
  if (pd.lo_zero) wlo += 0.02 * width;
  if (pd.hi_zero) whi -= 0.02 * width;
  out.working = {wlo, whi};
  // u^{-2} h1 only sees |u|
  RealFunction u = u_in;
  if (uf(anchor) < 0.0)
    u = RealFunction::from_jet([u_in](double t) {
      Jet j = u_in.jet(t);
      return Jet{-j.v, -j.d1, -j.d2};
    });
  out.u = u;
  bool keep_lo_pole = h1.kind != ChartKind::rectangular && lo_end && !pd.lo_zero && wlo == h1.interval.lo;
  bool keep_hi_pole = h1.kind == ChartKind::polar_both && hi_end && !pd.hi_zero && whi == h1.interval.hi;
  const double a = opt.anchor ? *opt.anchor : (keep_lo_pole ? wlo : std::clamp(anchor, wlo, whi));
  RealFunction density = RealFunction::from_jet([u](double t) {
    Jet j = u.jet(t);
    return Jet{1.0 / j.v, -j.d1 / (j.v * j.v), (2.0 * j.d1 * j.d1 - j.v * j.d2) / (j.v * j.v * j.v)};
  });
  out.map = CoordinateMap(density, wlo, whi, a, a);
  CoordinateMap map = out.map;
  RealFunction w1 = h1.warp;
  RealFunction warp = RealFunction::from_jet([w1, u, map](double r) {
    double t = map.to_old(r);
    Jet v = w1.jet(t), U = u.jet(t);
    double W = v.v / U.v;
    double W1 = v.d1 - v.v * U.d1 / U.v;
    double W2 = U.v * (v.d2 - (v.d1 * U.d1 + v.v * U.d2) / U.v + v.v * U.d1 * U.d1 / (U.v * U.v));
    return Jet{W, W1, W2};
  });
  WarpedMetric m = h1;
  m.warp = warp;
  m.interval = map.new_range();
  double blo = std::max(h1.sample_box.lo, wlo), bhi = std::min(h1.sample_box.hi, whi);
  if (!(blo < bhi)) {
    blo = wlo + 0.02 * (whi - wlo);
    bhi = whi - 0.02 * (whi - wlo);
  }
  Interval box{map.to_new(blo), map.to_new(bhi)};
  if (box.lo > box.hi) std::swap(box.lo, box.hi);
  m.sample_box = box;
  m.kind = keep_lo_pole && keep_hi_pole ? ChartKind::polar_both
           : keep_lo_pole               ? ChartKind::polar_left
                                        : ChartKind::rectangular;
  out.metric = m;

  double defect = 0.0;
  Interval yb{0.0, 0.0};
  if (const auto* p = std::get_if<ProductFiber>(&h1.fiber)) yb = p->y_box;
  for (int i = 0; i < opt.isometry_samples; ++i) {
    double t = blo + (bhi - blo) * (i + 0.5) / opt.isometry_samples;
    double y = yb.lo + (yb.hi - yb.lo) * (i + 0.5) / opt.isometry_samples;
    RicciEigenpair want = detail::conformal_ricci(h1, u.jet(t), t, y);
    RicciEigenpair got = ricci_warped(out.metric, map.to_new(t), y);
    auto rel = [](double x, double ref) { return std::fabs(x - ref) / std::max(1.0, std::fabs(ref)); };
    defect = std::max({defect, rel(got.radial, want.radial), rel(got.tangential, want.tangential)});
    if (want.mixed_fiber) defect = std::max(defect, rel(*got.mixed_fiber, *want.mixed_fiber));
  }
  out.isometry_defect = defect;
  require(defect <= opt.isometry_tol, Errc::check_failed,
          "reparametrized metric does not match u^{-2} h: Ricci defect " + std::to_string(defect));
  return out;
}

namespace detail {

// Potential, alpha and metric of the structure after reparametrization.
inline GQEStructure carry_structure(const GQEStructure& s, const Reparam& rp) {
  GQEStructure out = s;
  RealFunction u = rp.u;
  out.metric = rp.metric;
  CoordinateMap map = rp.map;
  if (const auto* b = std::get_if<OfBase>(&s.potential)) {
    RealFunction f = b->f;
    out.potential = OfBase{RealFunction::from_jet([f, u, map](double r) {
      double t = map.to_old(r);
      Jet F = f.jet(t), U = u.jet(t);
      return Jet{F.v, U.v * F.d1, U.v * (U.d1 * F.d1 + U.v * F.d2)};
    })};
  }
  out.alpha = s.alpha.compose_base([map](double r) { return map.to_old(r); });
  return out;
}

inline RealFunction antiderivative_u(const std::function<Jet(double)>& integrand, double C, double lo, double hi,
                                     double anchor) {
  RealFunction g = RealFunction::from_jet(integrand);
  RealFunction I = antiderivative(g, lo, hi, anchor);
  return RealFunction::from_jet([I, C](double t) {
    Jet j = I.jet(t);
    return Jet{C + j.v, j.d1, j.d2};
  });
}

inline void verify_antiderivative(const RealFunction& U, const std::function<Jet(double)>& want, Interval box,
                                  int samples = 50, double tol = 1e-8) {
  for (int i = 0; i < samples; ++i) {
    double t = box.lo + (box.hi - box.lo) * (i + 0.5) / samples;
    Jet a = U.jet(t), b = want(t);
    bool ok = std::fabs(a.d1 - b.v) <= tol * std::max(1.0, std::fabs(b.v)) &&
              std::fabs(a.d2 - b.d1) <= tol * std::max(1.0, std::fabs(b.d1));
    require(ok, Errc::check_failed,
            "supplied antiderivative has (U', U'') = (" + std::to_string(a.d1) + ", " + std::to_string(a.d2) +
                ") but expected (" + std::to_string(b.v) + ", " + std::to_string(b.d1) + ") at t = " + std::to_string(t));
  }
}

// Default anchor of the integration constant: the left end when finite and usable, else 0 or the box start.
inline double u_anchor(const WarpedMetric& m, const std::function<double(double)>& integrand) {
  if (finite_at(integrand, m.interval.lo)) return m.interval.lo;
  if (m.sample_box.contains(0.0)) return 0.0;
  return m.sample_box.lo;
}

inline Interval u_range(const WarpedMetric& m, const std::function<double(double)>& integrand) {
  return {finite_at(integrand, m.interval.lo) ? m.interval.lo : m.sample_box.lo,
          finite_at(integrand, m.interval.hi) ? m.interval.hi : m.sample_box.hi};
}

}  // namespace detail

// ------------------------------------------------------------------ change in the h gauge

struct ConformalOptions {
  std::optional<RealFunction> U;  // explicit antiderivative; u = C + U
  ReparamOptions reparam;
  int constancy_samples = 50;
  double constancy_tol = 1e-10;
};

struct ConformalChangeRecord {
  std::optional<Expr> U;
  double C = 0.0;
  double u_anchor = 0.0;  // u(u_anchor) = C when U is not supplied
  RealFunction u;         // in the old base coordinate t
  ScalarField Q2;         // in the old base coordinate t
  Constancy Q2_constancy;
  Interval positivity_domain;
  std::vector<double> zeros;
  CoordinateMap map;
  double isometry_defect = 0.0;
};

struct ConformalResult {
  GQEStructure structure;
  ConformalChangeRecord record;
};

// h2 = u^{-2} h1 with u' = v: same f and alpha, Q2 = Q1 u^2 + (n-1)(2 u u'' - (u')^2).
inline ConformalResult conformal_change(const GQEStructure& s, double C, ConformalOptions opt = {}) {
  require(s.gauge() == Gauge::h, Errc::invalid_argument, "conformal_change expects an h-gauge structure");
  const WarpedMetric& h = s.metric;
  RealFunction warp = h.warp;
  std::function<double(double)> vfun = [warp](double t) { return warp(t); };
  ConformalChangeRecord rec;
  rec.C = C;
  RealFunction u;
  if (!opt.U && h.warp.expr()) {
    if (auto U = integrate_simple(*h.warp.expr(), h.warp.variable())) opt.U = RealFunction::from_expr(*U, h.warp.variable());
  }
  if (opt.U) {
    detail::verify_antiderivative(*opt.U, [warp](double t) { return warp.jet(t); }, h.sample_box);
    RealFunction U = *opt.U;
    rec.U = U.expr();
    u = RealFunction::from_jet([U, C](double t) {
      Jet j = U.jet(t);
      return Jet{C + j.v, j.d1, j.d2};
    });
  } else {
    Interval r = detail::u_range(h, vfun);
    rec.u_anchor = detail::u_anchor(h, vfun);
    u = detail::antiderivative_u([warp](double t) { return warp.jet(t); }, C, r.lo, r.hi, rec.u_anchor);
  }
  rec.u = u;
  Reparam rp = reparametrize(h, u, opt.reparam);
  rec.positivity_domain = rp.positivity.domain;
  rec.zeros = rp.positivity.zeros;
  rec.map = rp.map;
  rec.isometry_defect = rp.isometry_defect;
  const double n = s.n();
  ScalarField Q1 = s.coefficient;
  rec.Q2 = ScalarField::from_fn(
      [Q1, u, warp, n](double t, double y) {
        Jet U = u.jet(t);
        Jet v = warp.jet(t);
        return Q1(t, y) * U.v * U.v + (n - 1.0) * (2.0 * U.v * v.d1 - v.v * v.v);
      },
      Dependence::both);
  Interval tb{std::max(h.sample_box.lo, rp.working.lo), std::min(h.sample_box.hi, rp.working.hi)};
  ScalarField Q2 = rec.Q2;
  rec.Q2_constancy = constancy([Q2](double t) { return Q2(t, 0.0); }, tb, opt.constancy_samples, opt.constancy_tol);
  GQEStructure out = detail::carry_structure(s, rp);
  CoordinateMap map = rp.map;
  out.coefficient = ScalarField::from_fn([Q2, map](double r, double y) { return Q2(map.to_old(r), y); }, Dependence::both);
  return {out, rec};
}

// ------------------------------------------------------------------ change in the g gauge

struct Lambda2Options {
  std::optional<RealFunction> U;  // explicit antiderivative of the u-integrand; u = C + U
  ReparamOptions reparam;
  int constancy_samples = 200;
  double constancy_tol = 1e-6;
};

struct Lambda2Result {
  GQEStructure structure;  // g2 = u^{-2} g1 reparametrized, with lambda2
  RealFunction u;          // in the original coordinate s
  ScalarField lambda2;     // in the original coordinate s
  Constancy lambda2_constancy;
  Reparam reparam;
};

// g2 = u^{-2} g1 where u is the concircular factor of the h gauge:
// du/ds = e^{-2f/(n-2)} v for a base potential, du/dt = v for fiber or constant potentials.
// lambda2 = lambda1 u^2 + (n-1)(u u'' - u'^2 + u u' v'/v) + u u' f' in s.
inline Lambda2Result lambda2(const GQEStructure& s, double C, Lambda2Options opt = {}) {
  require(s.gauge() == Gauge::g, Errc::invalid_argument, "lambda2 expects a g-gauge structure");
  const double n = s.n();
  const double k = 1.0 / (n - 2.0);
  const WarpedMetric& g = s.metric;
  RealFunction warp = g.warp;
  Potential pot = s.potential;
  bool base = std::holds_alternative<OfBase>(pot);
  auto integrand = [warp, pot, base, k](double x) {
    Jet v = warp.jet(x);
    if (!base) return v;
    Jet f = potential_jet(pot, x, 0.0);
    double e = std::exp(-2.0 * k * f.v);
    return Jet{e * v.v, e * (v.d1 - 2.0 * k * f.d1 * v.v), 0.0};
  };
  std::function<double(double)> ival = [integrand](double x) { return integrand(x).v; };
  RealFunction u;
  if (!opt.U && !base && g.warp.expr()) {
    if (auto U = integrate_simple(*g.warp.expr(), g.warp.variable())) opt.U = RealFunction::from_expr(*U, g.warp.variable());
  }
  if (opt.U) {
    detail::verify_antiderivative(*opt.U, integrand, g.sample_box);
    RealFunction U = *opt.U;
    u = RealFunction::from_jet([U, C](double x) {
      Jet j = U.jet(x);
      return Jet{C + j.v, j.d1, j.d2};
    });
  } else {
    Interval r = detail::u_range(g, ival);
    u = detail::antiderivative_u(integrand, C, r.lo, r.hi, detail::u_anchor(g, ival));
  }
  Reparam rp = reparametrize(g, u, opt.reparam);
  ScalarField lam1 = s.coefficient;
  ScalarField l2;
  if (base) {
    l2 = ScalarField::from_fn(
        [lam1, u, warp, pot, n](double x, double y) {
          Jet U = u.jet(x), v = warp.jet(x);
          Jet f = potential_jet(pot, x, y);
          return lam1(x, y) * U.v * U.v + (n - 1.0) * (U.v * U.d2 - U.d1 * U.d1 + U.v * U.d1 * v.d1 / v.v) +
                 U.v * U.d1 * f.d1;
        },
        Dependence::both);
  } else {
    l2 = ScalarField::from_fn(
        [lam1, u, pot, n, k](double x, double y) {
          Jet U = u.jet(x);
          double e2 = std::exp(2.0 * k * potential_jet(pot, x, y).v);
          return (lam1(x, y) * e2 * U.v * U.v + (n - 1.0) * (2.0 * U.v * U.d2 - U.d1 * U.d1)) / e2;
        },
        Dependence::both);
  }
  Interval sb{std::max(g.sample_box.lo, rp.working.lo), std::min(g.sample_box.hi, rp.working.hi)};
  Lambda2Result out;
  out.u = u;
  out.lambda2 = l2;
  out.lambda2_constancy =
      constancy([l2](double x) { return l2(x, 0.0); }, sb, opt.constancy_samples, opt.constancy_tol);
  out.structure = detail::carry_structure(s, rp);
  CoordinateMap map = rp.map;
  out.structure.coefficient =
      ScalarField::from_fn([l2, map](double r, double y) { return l2(map.to_old(r), y); }, Dependence::both);
  out.reparam = std::move(rp);
  return out;
}

// ------------------------------------------------------------------ sphere family

enum class SphereClass { round_sphere, flat_stereographic, hyperbolic_portion };

inline const char* to_string(SphereClass c) {
  switch (c) {
    case SphereClass::round_sphere: return "round_sphere";
    case SphereClass::flat_stereographic: return "flat_stereographic";
    case SphereClass::hyperbolic_portion: return "hyperbolic_portion";
  }
  return "?";
}

struct SphereFamilyResult {
  SphereClass kind;
  double Q2 = 0.0;          // (n-1)(c^2 - 1)
  double curvature = 0.0;   // sampled sectional curvature of the result
  double einstein_defect = 0.0;  // max |Ric eigenvalue - mean| over samples
  Interval positivity_domain;
  ConformalResult change;
};

inline GQEStructure round_sphere_h(int n) {
  auto m = make_warped(n, {0.0, M_PI}, RealFunction::from_expr(ex::sin(ex::var("t"))), ChartKind::polar_both,
                       EinsteinFiber{n - 1, n - 2.0}, Gauge::h);
  return make_structure(m, ConstantPotential{0.0}, ScalarField::constant(0.0), CoefficientKind::Q,
                        ScalarField::constant(n - 1.0));
}

// u = c - cos t on the unit sphere: c > 1 round sphere, c = 1 flat, 0 < c < 1 part of hyperbolic space.
inline SphereFamilyResult sphere_family_classify(double c, int n = 4, int samples = 50) {
  require(c > 0.0, Errc::invalid_argument, "c must be positive; c < 0 is the reflection t -> pi - t of -c");
  SphereFamilyResult out;
  ConformalOptions opt;
  opt.U = RealFunction::from_expr(-ex::cos(ex::var("t")));
  opt.reparam.anchor = 0.5 * (M_PI + std::acos(std::min(1.0, c) * 0.999999));
  out.change = conformal_change(round_sphere_h(n), c, opt);
  out.positivity_domain = out.change.record.positivity_domain;
  out.Q2 = (n - 1.0) * (c * c - 1.0);
  const WarpedMetric& m = out.change.structure.metric;
  double lo = kInf, hi = -kInf, sum = 0.0;
  int count = 0;
  for (int i = 0; i < samples; ++i) {
    double r = m.sample_box.lo + (m.sample_box.hi - m.sample_box.lo) * (i + 0.5) / samples;
    RicciEigenpair e = ricci_warped(m, r);
    for (double x : {e.radial, e.tangential}) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      sum += x;
      ++count;
    }
  }
  double mean = sum / count;
  out.curvature = mean / (n - 1.0);
  out.einstein_defect = std::max(hi - mean, mean - lo);
  const double tol = 1e-12 * (n - 1.0);
  out.kind = std::fabs(out.Q2) <= tol ? SphereClass::flat_stereographic
             : out.Q2 > 0.0          ? SphereClass::round_sphere
                                     : SphereClass::hyperbolic_portion;
  return out;
}

}  // namespace gqe
