#pragma once

// Example factories: potentials solved from alpha, almost-soliton potentials on warped
// products, and the six normalized (v, Q, P) cases with a potential on the fiber.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gqe/gqe.hpp"
#include "gqe/quadrature.hpp"

namespace gqe {

namespace detail {

inline void require_einstein_fiber(const WarpedMetric& m, const char* what) {
  require(std::holds_alternative<EinsteinFiber>(m.fiber), Errc::invalid_argument,
          std::string(what) + " needs an Einstein fiber");
}

inline std::vector<double> box_grid(Interval box, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = box.lo + (box.hi - box.lo) * i / (count - 1.0);
  return t;
}

}  // namespace detail

// ------------------------------------------------------------------ f from alpha

struct SolvedPotential {
  GQEStructure structure;    // h-gauge, Q = tangential Ricci eigenvalue
  std::optional<Expr> fp_squared;  // closed form of (f')^2 when v and alpha have one
  double t0 = 0.0;                 // f(t0) = 0
};

struct SolveOptions {
  int sign = 1;
  std::optional<double> t0;
  int check_samples = 257;
  double zero_tol = 1e-13;  // relative size below which (f')^2 counts as zero
  ChebyshevOptions cheb{};
};

// (1/(n-2) - alpha)(f')^2 = ((n-2)((v')^2 - v v'') - mu)/v^2 with alpha = alpha(t).
inline SolvedPotential solve_f_from_alpha(const WarpedMetric& h, const RealFunction& alpha, SolveOptions opt = {}) {
  detail::require_einstein_fiber(h, "solve_f_from_alpha");
  require(opt.sign == 1 || opt.sign == -1, Errc::invalid_argument, "sign must be +1 or -1");
  const double n = h.n;
  const double mu = std::get<EinsteinFiber>(h.fiber).mu;
  const double crit = 1.0 / (n - 2.0);
  RealFunction warp = h.warp;
  auto numerator = [warp, n, mu](double t) {
    Jet v = warp.jet(t);
    return ((n - 2.0) * (v.d1 * v.d1 - v.v * v.d2) - mu) / (v.v * v.v);
  };
  auto q = [numerator, alpha, crit](double t) { return numerator(t) / (crit - alpha(t)); };

  std::optional<Expr> qexpr;
  if (h.warp.expr() && alpha.expr()) {
    Expr v = *h.warp.expr();
    Expr v1 = differentiate(v, h.warp.variable());
    Expr v2 = differentiate(v1, h.warp.variable());
    qexpr = ((n - 2.0) * (v1 * v1 - v * v2) - mu) / (v * v) / (crit - *alpha.expr());
  }

  double scale = 0.0;
  for (double t : detail::box_grid(h.sample_box, opt.check_samples)) {
    double a = alpha(t);
    require(std::fabs(a - crit) > 1e-12, Errc::domain, "alpha reaches 1/(n-2) at t = " + std::to_string(t));
    scale = std::max(scale, std::fabs(numerator(t)));
  }
  scale = std::max(scale, 1.0);
  bool zero = true;
  for (double t : detail::box_grid(h.sample_box, opt.check_samples)) {
    double num = numerator(t), val = q(t);
    bool num_zero = std::fabs(num) <= opt.zero_tol * scale;
    require(num_zero || val > 0.0, Errc::check_failed,
            "differential inequality violated at t = " + std::to_string(t) + ": (f')^2 would be " + std::to_string(val));
    if (!num_zero) zero = false;
  }

  const double t0 = opt.t0 ? *opt.t0 : h.sample_box.lo;
  require(h.sample_box.contains_closed(t0), Errc::invalid_argument, "t0 must lie in the sample box");
  Potential pot;
  if (zero) {
    pot = ConstantPotential{0.0};
  } else {
    const double sgn = opt.sign;
    auto fp = [q, sgn](double t) { return sgn * std::sqrt(std::max(q(t), 0.0)); };
    auto fit = std::make_shared<PiecewiseChebyshev>(
        PiecewiseChebyshev::fit(fp, h.sample_box.lo, h.sample_box.hi, opt.cheb));
    auto F = std::make_shared<PiecewiseChebyshev>(fit->antiderivative(t0));
    auto dfit = std::make_shared<PiecewiseChebyshev>(fit->derivative());
    std::shared_ptr<Program> dq;
    if (qexpr) dq = std::make_shared<Program>(differentiate(*qexpr, h.warp.variable()), std::vector<std::string>{h.warp.variable()});
    double qscale = scale;
    pot = OfBase{RealFunction::from_jet(
        [F, fp, dfit, dq, q, sgn, qscale](double t) {
          double qt = q(t), d1 = fp(t);
          // exact f'' away from zeros of (f')^2, interpolant derivative near them
          double d2 = dq && qt > 1e-8 * qscale ? sgn * (*dq)(t) / (2.0 * std::sqrt(qt)) : (*dfit)(t);
          return Jet{(*F)(t), d1, d2};
        },
        [F](double t) { return (*F)(t); })};
  }
  RealFunction w = h.warp;
  ScalarField Q = ScalarField::from_fn(
      [w, mu, n](double t, double) {
        Jet v = w.jet(t);
        return (mu - v.v * v.d2 - (n - 2.0) * v.d1 * v.d1) / (v.v * v.v);
      },
      Dependence::base);
  WarpedMetric hm = h;
  hm.gauge = Gauge::h;
  SolvedPotential out{make_structure(hm, pot, ScalarField::of_base(alpha), CoefficientKind::Q, Q), qexpr, t0};
  return out;
}

// ------------------------------------------------------------------ polar check

struct PolarOptions {
  double t0 = 0.25;
  int halvings = 16;
  double fp_tol = 1e-4;
  double growth = 2.0;
};

struct PolarReport {
  bool pass = false;
  std::vector<double> t, fp, ratio;  // ratio = |f'(t)|/t
  std::string message;
};

// Smooth extension of f over the pole t = a of a polar chart: f'(t) -> 0 with f'(t)/t bounded.
// The numerator (n-2)((v')^2 - v v'') - mu is integrated from the pole, where it vanishes for
// a smooth metric, to avoid cancellation as v -> 0.
inline PolarReport polar_extension_check(const WarpedMetric& h, const RealFunction& alpha, PolarOptions opt = {}) {
  require(h.kind != ChartKind::rectangular, Errc::invalid_argument, "polar_extension_check needs a polar chart");
  detail::require_einstein_fiber(h, "polar_extension_check");
  require(h.warp.expr().has_value(), Errc::invalid_argument, "polar_extension_check needs a closed-form warp");
  const double n = h.n;
  const double mu = std::get<EinsteinFiber>(h.fiber).mu;
  const double a = h.interval.lo;
  const std::string var = h.warp.variable();
  Expr v = *h.warp.expr();
  Expr v1 = differentiate(v, var), v2 = differentiate(v1, var), v3 = differentiate(v2, var);
  Program pv(v, {var}), pv1(v1, {var}), pv2(v2, {var}), pv3(v3, {var});
  double w0 = pv1(a) * pv1(a) - mu / (n - 2.0);
  if (std::fabs(w0) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, mu)) w0 = 0.0;
  auto w = [&](double t) {
    auto r = adaptive_simpson([&](double s) { return pv1(s) * pv2(s) - pv(s) * pv3(s); }, a, t,
                                1e-14 * (t - a) * (t - a));
    return w0 + r.value;
  };
  PolarReport rep;
  const double crit = 1.0 / (n - 2.0);
  for (int k = 0; k <= opt.halvings; ++k) {
    double t = a + opt.t0 * std::ldexp(1.0, -k);
    double vt = pv(t);
    double q = (n - 2.0) * w(t) / (vt * vt) / (crit - alpha(t));
    if (!(q >= 0.0)) {
      rep.message = "differential inequality violated near the pole at t = " + std::to_string(t);
      return rep;
    }
    rep.t.push_back(t);
    rep.fp.push_back(std::sqrt(q));
    rep.ratio.push_back(std::sqrt(q) / (t - a));
  }
  const int K = opt.halvings;
  double fpK = rep.fp[K];
  double rK = rep.ratio[K], rH = rep.ratio[K / 2];
  bool small = fpK <= opt.fp_tol;
  bool bounded = rK <= opt.growth * rH + 1e-12;
  rep.pass = small && bounded;
  rep.message = rep.pass ? "f' -> 0 with f'/t bounded"
                         : (!small ? "f' does not tend to 0 at the pole" : "f'/t grows toward the pole");
  return rep;
}

// ------------------------------------------------------------------ almost solitons

struct AlmostSoliton {
  GQEStructure structure;  // g-gauge, alpha = 0, lambda = f'' - (n-1) v''/v
  RealFunction f;
  RealFunction lambda;
};

// (f'/v)' = (mu + (n-2)(v v'' - (v')^2))/v^3 with f'/v = k0 at t0.
inline AlmostSoliton almost_soliton_from_warped(const WarpedMetric& g, double k0 = 0.0,
                                                std::optional<double> t0 = std::nullopt, ChebyshevOptions cheb = {}) {
  detail::require_einstein_fiber(g, "almost_soliton_from_warped");
  require(g.gauge == Gauge::g, Errc::invalid_argument, "almost_soliton_from_warped expects a g-gauge metric");
  const double n = g.n;
  const double mu = std::get<EinsteinFiber>(g.fiber).mu;
  const Interval box = g.sample_box;
  const double anchor = t0 ? *t0 : (box.contains(0.0) ? 0.0 : box.lo);
  require(box.contains_closed(anchor), Errc::invalid_argument, "t0 must lie in the sample box");
  RealFunction w = g.warp;
  auto R = [w, n, mu](double t) {
    Jet v = w.jet(t);
    return (mu + (n - 2.0) * (v.v * v.d2 - v.d1 * v.d1)) / (v.v * v.v * v.v);
  };
  auto IR = std::make_shared<PiecewiseChebyshev>(PiecewiseChebyshev::fit(R, box.lo, box.hi, cheb).antiderivative(anchor));
  auto fp = [w, IR, k0](double t) { return w(t) * (k0 + (*IR)(t)); };
  auto F = std::make_shared<PiecewiseChebyshev>(PiecewiseChebyshev::fit(fp, box.lo, box.hi, cheb).antiderivative(anchor));
  RealFunction f = RealFunction::from_jet(
      [w, IR, F, R, k0](double t) {
        Jet v = w.jet(t);
        double d1 = v.v * (k0 + (*IR)(t));
        return Jet{(*F)(t), d1, v.d1 * d1 / v.v + v.v * R(t)};
      },
      [F](double t) { return (*F)(t); });
  RealFunction lambda = RealFunction::from_jet([f, w, n](double t) {
    Jet v = w.jet(t);
    return Jet{f.jet(t).d2 - (n - 1.0) * v.d2 / v.v, 0.0, 0.0};
  });
  GQEStructure s = make_structure(g, OfBase{f}, ScalarField::constant(0.0), CoefficientKind::lambda,
                                  ScalarField::of_base(lambda));
  return {s, f, lambda};
}

// ------------------------------------------------------------------ six cases

enum class SixCaseId { c1a, c1b, c1c, c2a, c2b, c3a };

inline const std::vector<SixCaseId>& all_six_cases() {
  static const std::vector<SixCaseId> ids{SixCaseId::c1a, SixCaseId::c1b, SixCaseId::c1c,
                                          SixCaseId::c2a, SixCaseId::c2b, SixCaseId::c3a};
  return ids;
}

inline const char* to_string(SixCaseId id) {
  switch (id) {
    case SixCaseId::c1a: return "1a";
    case SixCaseId::c1b: return "1b";
    case SixCaseId::c1c: return "1c";
    case SixCaseId::c2a: return "2a";
    case SixCaseId::c2b: return "2b";
    case SixCaseId::c3a: return "3a";
  }
  return "?";
}

inline SixCaseId parse_six_case(const std::string& s) {
  for (SixCaseId id : all_six_cases())
    if (s == to_string(id)) return id;
  fail(Errc::invalid_argument, "unknown case '" + s + "' (expected 1a, 1b, 1c, 2a, 2b or 3a)");
}

struct SixCase {
  SixCaseId id;
  Expr v;
  double Q, P;
  Interval interval, box;
};

inline SixCase six_case(SixCaseId id, int n) {
  Expr t = ex::var("t");
  const double d = n - 1.0, e = n - 2.0;
  switch (id) {
    case SixCaseId::c1a: return {id, ex::sin(t), d, e, {0.0, M_PI}, {0.2, 2.9}};
    case SixCaseId::c1b: return {id, t, 0.0, e, {0.0, kInf}, {0.2, 3.0}};
    case SixCaseId::c1c: return {id, ex::sinh(t), -d, e, {0.0, kInf}, {0.2, 3.0}};
    case SixCaseId::c2a: return {id, Expr(1.0), 0.0, 0.0, {-kInf, kInf}, {-2.0, 2.0}};
    case SixCaseId::c2b: return {id, ex::exp(t), -d, 0.0, {-kInf, kInf}, {-2.0, 2.0}};
    case SixCaseId::c3a: return {id, ex::cosh(t), -d, -e, {-kInf, kInf}, {-2.0, 2.0}};
  }
  fail(Errc::invalid_argument, "unknown case");
}

// Max of |(v')^2 + (Q/(n-1)) v^2 - P/(n-2)| over the case's box.
inline double vpq_defect(const SixCase& c, int n, int samples = 100) {
  RealFunction v = RealFunction::from_expr(c.v);
  double m = 0.0;
  for (double t : detail::box_grid(c.box, samples)) {
    Jet j = v.jet(t);
    m = std::max(m, std::fabs(j.d1 * j.d1 + c.Q / (n - 1.0) * j.v * j.v - c.P / (n - 2.0)));
  }
  return m;
}

// GQE data on the fiber N: Ric_N = (1/(n-2) - alpha) df(x)df + P g_N.
struct FiberData {
  Fiber fiber;
  Potential potential;  // ConstantPotential or OfFiber
  ScalarField alpha;    // function of y
  double P = 0.0;
};

// Max reduced defect of the fiber equation over the fiber sample range.
inline double fiber_defect(const FiberData& fd, int n, int samples = 50) {
  const double crit = 1.0 / (n - 2.0);
  if (const auto* e = std::get_if<EinsteinFiber>(&fd.fiber)) {
    require(!std::holds_alternative<OfFiber>(fd.potential), Errc::invalid_argument,
            "a fiber potential needs a product fiber");
    return std::fabs(e->mu - fd.P);
  }
  const auto& pf = std::get<ProductFiber>(fd.fiber);
  double m = 0.0;
  for (double y : detail::box_grid(pf.y_box, samples)) {
    FiberRicci r = fiber_ricci(fd.fiber, y);
    Jet f = potential_jet(fd.potential, 0.0, y);
    m = std::max(m, std::fabs(r.e_y - (crit - fd.alpha(0.0, y)) * f.d1 * f.d1 - fd.P));
    if (pf.dim >= 3) m = std::max(m, std::fabs(r.e_F - fd.P));
  }
  return m;
}

// Fiber data used for each value of P: an Einstein-product fiber with f = k y for P = n-2,
// dy^2 + (1+y^2) g_{S^2} with f = arctan y for P = 0 (n = 4 only), and a hyperbolic
// product with f = (n-2) y for P = -(n-2).
inline FiberData default_fiber_data(SixCaseId id, int n) {
  require(n >= 4, Errc::invalid_argument, "fiber potentials need n >= 4");
  const double P = six_case(id, n).P;
  Expr y = ex::var("y");
  FiberData fd;
  fd.P = P;
  if (P > 0.0) {
    double k = (n - 2.0) / std::sqrt(n - 3.0);
    fd.fiber = make_product_fiber(n - 1, Expr(1.0), n - 2.0);
    fd.potential = OfFiber{RealFunction::from_expr(k * y, "y")};
    fd.alpha = ScalarField::constant(1.0);
  } else if (P == 0.0) {
    require(n == 4, Errc::invalid_argument, "the P = 0 fiber example is four-dimensional");
    fd.fiber = make_product_fiber(3, ex::sqrt(1.0 + y * y), 1.0, {-1.5, 1.5});
    fd.potential = OfFiber{RealFunction::from_expr(ex::arctan(y), "y")};
    fd.alpha = ScalarField::constant(2.5);
  } else {
    fd.fiber = make_product_fiber(n - 1, Expr(1.0), -(n - 2.0));
    fd.potential = OfFiber{RealFunction::from_expr((n - 2.0) * y, "y")};
    fd.alpha = ScalarField::constant(0.0);
  }
  return fd;
}

inline GQEStructure six_case_structure(SixCaseId id, int n, const FiberData& fd, double tol = 1e-10) {
  require(n >= 4, Errc::invalid_argument, "fiber potentials are impossible for n = 3");
  SixCase c = six_case(id, n);
  require(std::fabs(fd.P - c.P) <= 1e-12, Errc::invalid_argument,
          std::string("case ") + to_string(id) + " needs P = " + std::to_string(c.P));
  double vpq = vpq_defect(c, n);
  require(vpq <= 1e-12, Errc::check_failed, "v-P-Q identity defect " + std::to_string(vpq));
  double defect = fiber_defect(fd, n);
  require(defect <= tol, Errc::check_failed, "fiber data violates its equation by " + std::to_string(defect));
  WarpedOptions opt;
  opt.sample_box = c.box;
  auto m = make_warped(n, c.interval, RealFunction::from_expr(c.v), ChartKind::rectangular, fd.fiber, Gauge::h, opt);
  return make_structure(m, fd.potential, fd.alpha, CoefficientKind::Q, ScalarField::constant(c.Q));
}

}  // namespace gqe
