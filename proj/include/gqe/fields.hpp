#pragma once

// Conformal vector fields V = v0 d/dt + V_t on warped products, the sigma ODE
// sigma = sigma''(A + omega r) + omega with its conserved K, closed-form families,
// alpha from the field data, and completeness of the resulting metrics.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gqe/gqe.hpp"
#include "gqe/ode.hpp"
#include "gqe/quadrature.hpp"

namespace gqe {

// ------------------------------------------------------------------ conformal fields

enum class FiberPart { killing, homothetic, fiber_conformal };

// All expressions are over the coordinate names of build_chart(h): the base coordinate
// followed by the fiber coordinates.
struct ConformalFieldSpec {
  Expr v0;
  FiberPart kind = FiberPart::killing;
  double omega = 0.0;                  // homothetic factor
  std::optional<Expr> omega_t;         // fiber-conformal factor
  std::vector<Expr> fiber_components;  // V_t, one per fiber coordinate (empty = zero)
  std::optional<Expr> sigma;           // declared expansion factor
};

struct FieldCheckOptions {
  int samples = 20;
  std::uint64_t seed = 1;
  double margin = 0.05;
  OracleOptions oracle{};
  std::optional<Expr> potential;  // f on chart coordinates, for D_V f
  double dvf = 0.0;               // declared D_V f
};

struct FieldReport {
  double cond1 = 0.0;  // L_{V_t} g_N - 2 omega_t g_N
  double cond2 = 0.0;  // d/dt(v0/u) - omega_t/u
  double cond3 = 0.0;  // dV_t/dt + u^{-2} grad^N v0
  double lie = 0.0;    // L_V h - 2 sigma h (finite differences)
  double sigma_mismatch = 0.0;  // declared sigma vs d v0/dt
  double dvf = 0.0;             // |D_V f - declared|
  Expr sigma;                   // recovered d v0/dt
  bool conditions_pass(double tol) const { return cond1 <= tol && cond2 <= tol && cond3 <= tol; }
  bool pass(double tol) const { return conditions_pass(tol) && lie <= tol && sigma_mismatch <= tol && dvf <= tol; }
};

inline FieldReport check_conformal_field(const WarpedMetric& h, const ConformalFieldSpec& V, FieldCheckOptions opt = {}) {
  ExplicitChart chart = build_chart(h);
  const int d = chart.dim;
  const std::vector<std::string>& names = chart.coords;
  const std::string& tn = names[0];
  std::vector<Expr> comps = V.fiber_components;
  if (comps.empty()) comps.assign(d - 1, Expr(0.0));
  require(static_cast<int>(comps.size()) == d - 1, Errc::invalid_argument,
          "fiber part needs " + std::to_string(d - 1) + " components");
  Expr omega_t;
  switch (V.kind) {
    case FiberPart::killing: omega_t = Expr(0.0); break;
    case FiberPart::homothetic: omega_t = Expr(V.omega); break;
    case FiberPart::fiber_conformal:
      require(V.omega_t.has_value(), Errc::invalid_argument, "fiber-conformal part needs omega_t");
      omega_t = *V.omega_t;
      break;
  }
  auto prog = [&names](const Expr& e) { return std::make_shared<Program>(e, names); };
  Expr sigma = differentiate(V.v0, tn);
  auto p_v0 = prog(V.v0), p_sigma = prog(sigma), p_omega = prog(omega_t), p_v0t = prog(sigma);
  std::vector<std::shared_ptr<Program>> p_grad, p_comp, p_compt;
  for (int i = 1; i < d; ++i) {
    p_grad.push_back(prog(differentiate(V.v0, names[i])));
    p_comp.push_back(prog(comps[i - 1]));
    p_compt.push_back(prog(differentiate(comps[i - 1], tn)));
  }
  std::shared_ptr<Program> p_declared = V.sigma ? prog(*V.sigma) : nullptr;
  std::shared_ptr<Program> p_dvf;
  if (opt.potential) {
    Expr dv = V.v0 * differentiate(*opt.potential, tn);
    for (int i = 1; i < d; ++i) dv = dv + comps[i - 1] * differentiate(*opt.potential, names[i]);
    p_dvf = prog(dv);
  }
  std::vector<ChartFunction> Vfull{chart_function(V.v0, chart)};
  for (const auto& c : comps) Vfull.push_back(chart_function(c, chart));
  ChartFunction sigma_fn = p_declared ? chart_function(*V.sigma, chart) : chart_function(sigma, chart);

  FieldReport rep;
  rep.sigma = sigma;
  for (const auto& p : sample_points(chart, opt.samples, opt.seed, opt.margin)) {
    std::span<const double> x(p.data(), d);
    const double t = p[0];
    Jet u = h.v(t);
    Matrix g = chart.metric_at(p);
    Matrix gN = g.bottomRightCorner(d - 1, d - 1) / (u.v * u.v);
    double om = (*p_omega)(x);

    // (1) on the fiber at frozen t
    ExplicitChart fiber;
    fiber.dim = d - 1;
    fiber.coords.assign(names.begin() + 1, names.end());
    fiber.lo.assign(chart.lo.begin() + 1, chart.lo.end());
    fiber.hi.assign(chart.hi.begin() + 1, chart.hi.end());
    fiber.blocks.assign(d - 1, Block::other);
    auto full_metric = chart.metric;
    const double uv2 = u.v * u.v;
    fiber.metric = [full_metric, t, d, uv2](const double* q, Matrix& out) {
      std::vector<double> z(d);
      z[0] = t;
      for (int i = 1; i < d; ++i) z[i] = q[i - 1];
      Matrix G(d, d);
      full_metric(z.data(), G);
      out = G.bottomRightCorner(d - 1, d - 1) / uv2;
    };
    std::vector<ChartFunction> Vt;
    for (int i = 1; i < d; ++i) {
      auto pc = p_comp[i - 1];
      Vt.push_back([pc, t, d](const double* q) {
        std::vector<double> z(d);
        z[0] = t;
        for (int k = 1; k < d; ++k) z[k] = q[k - 1];
        return (*pc)(std::span<const double>(z.data(), d));
      });
    }
    std::vector<double> xf(p.begin() + 1, p.end());
    Matrix L1 = lie_derivative_fd(fiber, Vt, xf, opt.oracle);
    rep.cond1 = std::max(rep.cond1, normalized_max_diff(L1, 2.0 * om * gN, gN));

    // (2)
    double v0 = (*p_v0)(x), v0t = (*p_v0t)(x);
    double c2 = (v0t * u.v - v0 * u.d1) / uv2 - om / u.v;
    rep.cond2 = std::max(rep.cond2, std::fabs(c2));

    // (3)
    Vector grad(d - 1), dVt(d - 1);
    for (int i = 0; i < d - 1; ++i) {
      grad(i) = (*p_grad[i])(x);
      dVt(i) = (*p_compt[i])(x);
    }
    Vector R = dVt + gN.inverse() * grad / uv2;
    rep.cond3 = std::max(rep.cond3, std::sqrt(std::fabs(R.dot(gN * R))));

    // full Lie derivative
    Matrix L = lie_derivative_fd(chart, Vfull, p, opt.oracle);
    rep.lie = std::max(rep.lie, normalized_max_diff(L, 2.0 * sigma_fn(p.data()) * g, g));

    if (p_declared) rep.sigma_mismatch = std::max(rep.sigma_mismatch, std::fabs((*p_declared)(x) - (*p_sigma)(x)));
    if (p_dvf) rep.dvf = std::max(rep.dvf, std::fabs((*p_dvf)(x) - opt.dvf));
  }
  return rep;
}

// Fields from the integrated formulas v0 = u (A + omega int dt/u), sigma = u'(A + omega int dt/u) + omega,
// with V_t = omega * (position vector) on a flat fiber, or V_t = 0 when omega = 0.
inline ConformalFieldSpec field_from_integrated(const WarpedMetric& h, double A, double omega) {
  require(h.warp.expr().has_value(), Errc::invalid_argument, "needs a closed-form warp");
  ExplicitChart chart = build_chart(h);
  const std::string& tn = chart.coords[0];
  Expr u = *h.warp.expr();
  ConformalFieldSpec V;
  V.kind = omega == 0.0 ? FiberPart::killing : FiberPart::homothetic;
  V.omega = omega;
  if (omega == 0.0) {
    V.v0 = A * u;
    V.sigma = A * differentiate(u, tn);
    return V;
  }
  const auto* e = std::get_if<EinsteinFiber>(&h.fiber);
  require(e && e->mu == 0.0, Errc::invalid_argument, "a non-Killing homothetic fiber part needs a flat fiber");
  std::optional<Expr> I;  // int dt/u, for constant or exponential warps
  Expr du = differentiate(u, tn);
  if (u.is_constant()) I = ex::var(tn) / u;
  else if (u.op() == Op::exp) {
    Expr a = differentiate(u.lhs(), tn);
    require(a.is_constant(), Errc::invalid_argument, "unsupported warp");
    I = -ex::exp(-u.lhs()) / a;
  }
  require(I.has_value(), Errc::invalid_argument, "no closed-form integral of 1/u for this warp");
  V.v0 = u * (A + omega * *I);
  V.sigma = du * (A + omega * *I) + omega;
  for (std::size_t i = 1; i < chart.coords.size(); ++i) V.fiber_components.push_back(omega * ex::var(chart.coords[i]));
  return V;
}

// h = dt^2 + cosh^2 t g_N with V = cosh t d/dt; sigma = sinh t, f = gd(t), D_V f = 1.
struct CoshExample {
  GQEStructure structure;  // h gauge, alpha = 1/(n-2) + n-2 + mu, Q = (mu + n-2) sech^2 t - (n-1)
  ConformalFieldSpec field;
  Expr f;
  double eta_shift;  // eta = sigma + eta_shift for g = e^{2f/(n-2)} h
};

inline CoshExample example_cosh(int n, double mu) {
  Expr t = ex::var("t");
  auto m = make_warped(n, {-kInf, kInf}, RealFunction::from_expr(ex::cosh(t)), ChartKind::rectangular,
                       EinsteinFiber{n - 1, mu}, Gauge::h);
  Expr f = 2.0 * ex::arctan(ex::tanh(0.5 * t));
  double alpha = 1.0 / (n - 2.0) + (n - 2.0) + mu;
  Expr Q = (mu + n - 2.0) / ex::pow(ex::cosh(t), Expr(2.0)) - (n - 1.0);
  CoshExample ex_;
  ex_.structure = make_structure(m, OfBase{RealFunction::from_expr(f)}, ScalarField::constant(alpha),
                                 CoefficientKind::Q, ScalarField::from_expr(Q), alpha == 1.0 / (n - 2.0));
  ex_.field.v0 = ex::cosh(t);
  ex_.field.kind = FiberPart::killing;
  ex_.field.sigma = ex::sinh(t);
  ex_.f = f;
  ex_.eta_shift = 1.0 / (n - 2.0);
  return ex_;
}

// h = dt^2 + cosh^2 t (dy^2 + cosh^2 y g_F) with V = v0 d/dt + phi(t) cosh y d/dy.
// corrected: phi = sech t, v0 = sinh t sinh y, sigma = cosh t sinh y.
// literal: phi = sin(2 arctan(tanh(t/2))) = tanh t, which violates dV_t/dt = -u^{-2} grad v0.
struct VaryingFieldExample {
  WarpedMetric metric;
  ConformalFieldSpec field;
};

inline VaryingFieldExample varying_field_example(bool corrected = true, int n = 4, double sub_mu = -1.0) {
  Expr t = ex::var("t"), y = ex::var("y");
  auto pf = make_product_fiber(n - 1, ex::cosh(y), sub_mu, {-1.0, 1.0});
  WarpedOptions o;
  o.sample_box = Interval{-1.5, 1.5};
  VaryingFieldExample out;
  out.metric = make_warped(n, {-kInf, kInf}, RealFunction::from_expr(ex::cosh(t)), ChartKind::rectangular, pf,
                           Gauge::h, o);
  ExplicitChart chart = build_chart(out.metric);
  Expr phi, integral;
  if (corrected) {
    phi = Expr(1.0) / ex::cosh(t);
    integral = ex::tanh(t);  // int_0^t phi / cosh
  } else {
    phi = ex::sin(2.0 * ex::arctan(ex::tanh(0.5 * t)));
    integral = Expr(1.0) - Expr(1.0) / ex::cosh(t);  // int_0^t tanh / cosh
  }
  ConformalFieldSpec& V = out.field;
  V.v0 = ex::cosh(t) * ex::sinh(y) * integral;
  V.kind = FiberPart::fiber_conformal;
  V.omega_t = phi * ex::sinh(y);
  V.fiber_components.assign(chart.dim - 1, Expr(0.0));
  V.fiber_components[0] = phi * ex::cosh(y);
  V.sigma = ex::sinh(y) * (ex::sinh(t) * integral + phi);
  return out;
}

// ------------------------------------------------------------------ sigma ODE

enum class SigmaFamily { omega0, omega_nonzero, numeric };
enum class Omega0Shape { cos, exp, sinh, cosh };

inline const char* to_string(Omega0Shape s) {
  switch (s) {
    case Omega0Shape::cos: return "cos";
    case Omega0Shape::exp: return "exp";
    case Omega0Shape::sinh: return "sinh";
    case Omega0Shape::cosh: return "cosh";
  }
  return "?";
}

inline Omega0Shape parse_shape(const std::string& s) {
  if (s == "cos" || s == "sin") return Omega0Shape::cos;
  if (s == "exp") return Omega0Shape::exp;
  if (s == "sinh") return Omega0Shape::sinh;
  if (s == "cosh") return Omega0Shape::cosh;
  fail(Errc::invalid_argument, "unknown sigma shape '" + s + "' (expected cos, sin, exp, sinh or cosh)");
}

struct SigmaSolution {
  SigmaFamily family = SigmaFamily::numeric;
  Omega0Shape shape = Omega0Shape::sinh;
  double A = 0.0, omega = 0.0, K = 0.0;
  double B = 0.0, C = 1.0;  // omega = 1, A = 0 closed forms
  int branch = 0;           // B <= 0: 0 for (0, 1/C), 1 for (1/C, inf); B > 0: the integer k
  bool literal_tanh = false;  // B < 0 tanh form (decreasing in r, not a solution)
  Interval domain;          // in t for omega0, in r for omega_nonzero
  Expr sigma, dsigma;       // closed forms (in t or r)
  // numeric trajectories, indexed by t
  std::vector<double> t, s, ds, r, k_along;
  double max_K_drift() const {
    double m = 0.0;
    for (double k : k_along) m = std::max(m, std::fabs(k - k_along.front()));
    return m;
  }
};

// sigma'' = sigma / A with kappa = 1: cos (A = -1), exp, sinh, cosh (A = 1).
inline SigmaSolution omega0_solution(Omega0Shape shape) {
  Expr t = ex::var("t");
  SigmaSolution s;
  s.family = SigmaFamily::omega0;
  s.shape = shape;
  s.omega = 0.0;
  switch (shape) {
    case Omega0Shape::cos:
      s.A = -1.0; s.sigma = ex::cos(t); s.domain = {0.0, M_PI}; break;
    case Omega0Shape::exp:
      s.A = 1.0; s.sigma = ex::exp(t); s.domain = {-kInf, kInf}; break;
    case Omega0Shape::sinh:
      s.A = 1.0; s.sigma = ex::sinh(t); s.domain = {-kInf, kInf}; break;
    case Omega0Shape::cosh:
      s.A = 1.0; s.sigma = ex::cosh(t); s.domain = {0.0, kInf}; break;
  }
  s.dsigma = differentiate(s.sigma, "t");
  double t0 = 0.5;
  double sv = eval_at(s.sigma, "t", t0), dv = eval_at(s.dsigma, "t", t0);
  s.K = s.A * dv * dv - sv * sv;
  return s;
}

// omega = 1, A = 0, K = B + 1/4. B = 0: 1/2 - 1/ln(Cr); B > 0: 1/2 + sqrt(B) tan(sqrt(B) ln(Cr));
// B < 0: 1/2 - sqrt(-B) coth(sqrt(-B) ln(Cr)), the branch with d sigma/dr > 0.
// literal_tanh selects 1/2 + sqrt(-B) tanh(sqrt(-B) ln(Cr)) on (0, inf) instead; it does not
// satisfy the separated equation and is kept for comparison.
inline SigmaSolution closed_form_sigma(double B, double C, int branch = 0, bool literal_tanh = false) {
  require(C > 0.0, Errc::invalid_argument, "C must be positive");
  Expr r = ex::var("r");
  Expr L = ex::ln(C * r);
  SigmaSolution s;
  s.family = SigmaFamily::omega_nonzero;
  s.omega = 1.0;
  s.A = 0.0;
  s.B = B;
  s.C = C;
  s.K = B + 0.25;
  s.branch = branch;
  if (B == 0.0) {
    s.sigma = 0.5 - Expr(1.0) / L;
    s.domain = branch == 0 ? Interval{0.0, 1.0 / C} : Interval{1.0 / C, kInf};
  } else if (B > 0.0) {
    double b = std::sqrt(B);
    s.sigma = 0.5 + b * ex::tan(b * L);
    s.domain = {std::exp((-M_PI / 2 + branch * M_PI) / b) / C, std::exp((M_PI / 2 + branch * M_PI) / b) / C};
  } else if (literal_tanh) {
    double b = std::sqrt(-B);
    s.sigma = 0.5 + b * ex::tanh(b * L);
    s.domain = {0.0, kInf};
    s.literal_tanh = true;
  } else {
    double b = std::sqrt(-B);
    s.sigma = 0.5 - b / ex::tanh(b * L);
    s.domain = branch == 0 ? Interval{0.0, 1.0 / C} : Interval{1.0 / C, kInf};
  }
  s.dsigma = differentiate(s.sigma, "r");
  return s;
}

inline double eval_sigma(const SigmaSolution& s, double x) {
  require(s.family != SigmaFamily::numeric, Errc::invalid_argument, "numeric solutions have no closed form");
  require(s.domain.contains(x), Errc::out_of_range,
          "point " + std::to_string(x) + " outside the maximal interval (" + std::to_string(s.domain.lo) + ", " +
              std::to_string(s.domain.hi) + ")");
  return eval_at(s.sigma, s.family == SigmaFamily::omega0 ? "t" : "r", x);
}

// omega != 0: max of |d sigma/dr - (K + sigma(sigma - omega))/(A + omega r)| at `samples` points
// of the domain. omega = 0: max of |sigma'' - sigma/A| in t, over the domain clipped to [-3, 3].
inline double sigma_ode_residual(const SigmaSolution& s, int samples = 50) {
  require(s.family != SigmaFamily::numeric, Errc::invalid_argument, "needs a closed-form family");
  if (s.family == SigmaFamily::omega0) {
    const double lo = std::max(s.domain.lo, -3.0), hi = std::min(s.domain.hi, 3.0);
    Program sg(s.sigma, {"t"}), ddsg(differentiate(s.dsigma, "t"), {"t"});
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
      double t = lo + (hi - lo) * (i + 0.5) / samples;
      double want = sg(t) / s.A;
      m = std::max(m, std::fabs(ddsg(t) - want) / std::max(1.0, std::fabs(want)));
    }
    return m;
  }
  double lo = s.domain.lo, hi = s.domain.hi;
  double llo, lhi;
  if (lo > 0.0 && std::isfinite(hi)) llo = std::log(lo), lhi = std::log(hi);
  else if (std::isfinite(hi)) llo = std::log(hi) - 6.0, lhi = std::log(hi);
  else if (lo > 0.0) llo = std::log(lo), lhi = std::log(lo) + 6.0;
  else llo = -std::log(s.C) - 3.0, lhi = -std::log(s.C) + 3.0;
  Program sg(s.sigma, {"r"}), dsg(s.dsigma, {"r"});
  double m = 0.0;
  for (int i = 0; i < samples; ++i) {
    double r = std::exp(llo + (lhi - llo) * (i + 0.5) / samples);
    double sv = sg(r);
    double want = (s.K + sv * (sv - s.omega)) / (s.A + s.omega * r);
    m = std::max(m, std::fabs(dsg(r) - want) / std::max(1.0, std::fabs(want)));
  }
  return m;
}

struct IntegrateOptions {
  double t0 = 0.0, t1 = 1.0;
  double step = 1e-3;
};

// RK4 in t of sigma'' = (sigma - omega)/(A + omega r), r' = 1/sigma'.
inline SigmaSolution integrate_sigma(double A, double omega, double sigma0, double dsigma0, double r0,
                                     IntegrateOptions opt = {}) {
  require(opt.step > 0.0 && opt.t1 != opt.t0, Errc::invalid_argument, "empty integration range");
  require(A + omega * r0 != 0.0, Errc::singular, "A + omega r vanishes at the start");
  require(omega == 0.0 || dsigma0 != 0.0, Errc::singular, "sigma' must not vanish when omega != 0");
  SigmaSolution s;
  s.family = SigmaFamily::numeric;
  s.A = A;
  s.omega = omega;
  using Y = State<3>;
  auto rhs = [A, omega](double, const Y& y) {
    double den = A + omega * y[2];
    require(den != 0.0, Errc::singular, "A + omega r vanishes");
    return Y{y[1], (y[0] - omega) / den, omega == 0.0 ? 0.0 : 1.0 / y[1]};
  };
  auto K = [A, omega](const Y& y) { return (A + omega * y[2]) * y[1] * y[1] - y[0] * (y[0] - omega); };
  const int steps = static_cast<int>(std::ceil(std::fabs(opt.t1 - opt.t0) / opt.step - 1e-9));
  const double h = (opt.t1 - opt.t0) / steps;
  Y y{sigma0, dsigma0, r0};
  double t = opt.t0;
  auto record = [&]() {
    s.t.push_back(t);
    s.s.push_back(y[0]);
    s.ds.push_back(y[1]);
    s.r.push_back(y[2]);
    s.k_along.push_back(K(y));
  };
  record();
  const double sign0 = A + omega * r0 > 0 ? 1.0 : -1.0;
  for (int i = 0; i < steps; ++i) {
    y = rk4_step(rhs, t, y, h);
    t = opt.t0 + (i + 1) * h;
    require((A + omega * y[2]) * sign0 > 0.0, Errc::singular, "A + omega r crosses zero at t = " + std::to_string(t));
    require(omega == 0.0 || y[1] * dsigma0 > 0.0, Errc::singular, "sigma' vanishes at t = " + std::to_string(t));
    record();
  }
  s.K = s.k_along.front();
  s.domain = {std::min(opt.t0, opt.t1), std::max(opt.t0, opt.t1)};
  return s;
}

// ------------------------------------------------------------------ alpha

struct AlphaResult {
  double alpha = 0.0;
  bool conformally_einstein = false;
};

inline AlphaResult alpha_from_field(double K, double A, double omega, double c, int n, double mu) {
  require(c != 0.0, Errc::invalid_argument, "c = 0 forces f to be constant");
  require(omega == 0.0 || mu == 0.0, Errc::invalid_argument,
          "omega != 0 needs a flat fiber (a non-Killing homothetic field)");
  AlphaResult a;
  const double crit = 1.0 / (n - 2.0);
  a.alpha = crit + ((n - 2.0) * K + (omega == 0.0 ? mu * A * A : 0.0)) / (c * c);
  a.conformally_einstein = a.alpha == crit;
  return a;
}

// Residual of (1/(n-2) - alpha) f'^2 = -(n-2)(sigma'''/sigma' - (sigma''/sigma')^2) - mu/sigma'^2
// along a numeric trajectory with f' = c/(sigma'(A + omega r)).
inline double sigma_f_residual(const SigmaSolution& s, double alpha, double c, int n, double mu) {
  require(s.family == SigmaFamily::numeric, Errc::invalid_argument, "needs a numeric trajectory");
  double m = 0.0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    double den = s.A + s.omega * s.r[i];
    double d1 = s.ds[i], d2 = (s.s[i] - s.omega) / den;
    double d3 = d1 / den - s.omega * d2 / (den * d1);
    double fp = c / (d1 * den);
    double lhs = (1.0 / (n - 2.0) - alpha) * fp * fp;
    double rhs = -(n - 2.0) * (d3 / d1 - d2 * d2 / (d1 * d1)) - mu / (d1 * d1);
    m = std::max(m, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)));
  }
  return m;
}

// ------------------------------------------------------------------ completeness

enum class EndVerdict { divergent, convergent, inconclusive };

inline const char* to_string(EndVerdict v) {
  switch (v) {
    case EndVerdict::divergent: return "divergent";
    case EndVerdict::convergent: return "convergent";
    case EndVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct EndEvidence {
  std::vector<double> increments;  // arc length over windows [x, 2x] of the log-distance x
  std::vector<double> ratios;
  EndVerdict numeric = EndVerdict::inconclusive;
  bool closed_form_divergent = false;
};

struct CompletenessReport {
  bool complete = false;
  bool agree = true;         // numeric verdicts match the closed-form criterion
  bool conclusive = true;
  EndEvidence lower, upper;  // ends of the solution's domain
  std::string criterion;
};

namespace detail {

// `log_rate(x)` is log(ds/dx) at log-distance x from the end; windows [x0 2^k, x0 2^{k+1}].
inline EndEvidence probe_end(const std::function<double(double)>& log_rate, double x0, int windows = 10) {
  EndEvidence e;
  double x = x0;
  for (int k = 0; k < windows && 2.0 * x <= 700.0; ++k) {
    double a = x, b = 2.0 * x;
    bool blown = false, bad = false;
    auto f = [&](double z) {
      double L = log_rate(z);
      if (std::isnan(L)) bad = true;
      if (L > 700.0) blown = true;
      return L > 700.0 || std::isnan(L) ? 0.0 : std::exp(L);
    };
    auto coarse = adaptive_simpson_panels(f, a, b, 64, kInf, 0);
    auto q = adaptive_simpson_panels(f, a, b, 64, 1e-8 * std::fabs(coarse.value) + 1e-300, 18);
    if (bad) return e;  // inconclusive
    if (blown) {
      e.increments.push_back(kInf);
      e.numeric = EndVerdict::divergent;
      return e;
    }
    e.increments.push_back(q.value);
    x = b;
  }
  const auto& I = e.increments;
  for (std::size_t i = 1; i < I.size(); ++i) e.ratios.push_back(I[i - 1] > 0.0 ? I[i] / I[i - 1] : 0.0);
  const std::size_t m = e.ratios.size();
  if (m < 3) return e;
  bool div = true, conv = true;
  for (std::size_t i = m - 3; i < m; ++i) {
    div = div && e.ratios[i] >= 0.5;
    conv = conv && e.ratios[i] <= 0.25;
  }
  if (I.back() < 1e-300) conv = true;
  e.numeric = div ? EndVerdict::divergent : conv ? EndVerdict::convergent : EndVerdict::inconclusive;
  return e;
}

}  // namespace detail

// Completeness of g = e^{2f/(n-2)} h for the field families with D_V f = c (f = c ln r in the
// omega = 1 normalization). Arc length is probed numerically at both ends and compared with
// the closed-form criteria.
inline CompletenessReport completeness_classify(const SigmaSolution& s, int n, double c) {
  require(c != 0.0, Errc::invalid_argument, "c = 0 forces f to be constant");
  require(s.family != SigmaFamily::numeric, Errc::invalid_argument, "completeness needs a closed-form family");
  const double q = c / (n - 2.0);
  CompletenessReport rep;
  std::function<double(double)> lo_rate, hi_rate;
  double x0_lo = 1.0, x0_hi = 1.0;
  bool lo_div = false, hi_div = false;
  if (s.family == SigmaFamily::omega_nonzero) {
    // theta = ln(C r); ds/dtheta = exp(p (theta - ln C)) sqrt(dsigma/dtheta), p = q + 1/2
    const double p = q + 0.5, lnC = std::log(s.C);
    auto base = [p, lnC](double theta) { return p * (theta - lnC); };
    if (s.B == 0.0) {
      // dsigma/dtheta = 1/theta^2
      if (s.branch == 0) {
        lo_rate = [base](double x) { double th = -std::exp(x); return base(th) - std::log(-th) + x; };
        hi_rate = [base](double x) { double d = std::exp(-x); return base(-d) - std::log(d) - x; };
        lo_div = p <= 0.0;
        hi_div = true;
        rep.criterion = "B = 0 on (0, 1/C): complete iff c <= -(n-2)/2";
      } else {
        lo_rate = [base](double x) { double d = std::exp(-x); return base(d) - std::log(d) - x; };
        hi_rate = [base](double x) { double th = std::exp(x); return base(th) - std::log(th) + x; };
        lo_div = true;
        hi_div = p >= 0.0;
        rep.criterion = "B = 0 on (1/C, inf): complete iff c >= -(n-2)/2";
      }
    } else if (s.B > 0.0) {
      // dsigma/dtheta = B sec^2(b theta); near the ends b theta = +-pi/2 + k pi -+ b delta
      const double b = std::sqrt(s.B);
      const double th_lo = (-M_PI / 2 + s.branch * M_PI) / b, th_hi = (M_PI / 2 + s.branch * M_PI) / b;
      auto rate = [base, b](double th, double delta, double x) {
        return base(th) + std::log(b) - std::log(std::fabs(std::sin(b * delta))) - x;
      };
      lo_rate = [rate, th_lo](double x) { double d = std::exp(-x); return rate(th_lo + d, d, x); };
      hi_rate = [rate, th_hi](double x) { double d = std::exp(-x); return rate(th_hi - d, d, x); };
      double width = th_hi - th_lo;
      x0_lo = x0_hi = std::max(1.0, std::log(4.0 / width));
      lo_div = hi_div = true;
      rep.criterion = "B > 0: complete";
    } else if (!s.literal_tanh) {
      // dsigma/dtheta = b^2 csch^2(b theta); log|sinh z| = |z| - log 2 + log1p(-e^{-2|z|})
      const double b = std::sqrt(-s.B);
      auto log_sinh = [](double z) {
        double a = std::fabs(z);
        return a < 1.0 ? std::log(std::sinh(a)) : a - std::log(2.0) + std::log1p(-std::exp(-2.0 * a));
      };
      auto rate = [base, b, log_sinh](double th) { return base(th) + std::log(b) - log_sinh(b * th); };
      if (s.branch == 0) {
        lo_rate = [rate](double x) { return rate(-std::exp(x)) + x; };
        hi_rate = [rate](double x) { return rate(-std::exp(-x)) - x; };
        lo_div = p + b <= 0.0;
        hi_div = true;
        rep.criterion = "B < 0 on (0, 1/C): complete iff c <= -(n-2)(1/2 + sqrt(-B))";
      } else {
        lo_rate = [rate](double x) { return rate(std::exp(-x)) - x; };
        hi_rate = [rate](double x) { return rate(std::exp(x)) + x; };
        lo_div = true;
        hi_div = p - b >= 0.0;
        rep.criterion = "B < 0 on (1/C, inf): complete iff c >= (n-2)(sqrt(-B) - 1/2)";
      }
    } else {
      // dsigma/dtheta = b^2 sech^2(b theta); log sech(z) = -|z| + log 2 - log1p(e^{-2|z|})
      const double b = std::sqrt(-s.B);
      auto log_sech = [](double z) { return -std::fabs(z) + std::log(2.0) - std::log1p(std::exp(-2.0 * std::fabs(z))); };
      lo_rate = [base, b, log_sech](double x) { double th = -std::exp(x); return base(th) + std::log(b) + log_sech(b * th) + x; };
      hi_rate = [base, b, log_sech](double x) { double th = std::exp(x); return base(th) + std::log(b) + log_sech(b * th) + x; };
      lo_div = q + b - 0.5 <= -1.0;
      hi_div = q - b - 0.5 >= -1.0;
      rep.criterion = "B < 0 (tanh form): never complete";
    }
  } else {
    // omega = 0: ds/dt = e^{f/(n-2)} with f' = c/(A sigma')
    switch (s.shape) {
      case Omega0Shape::sinh: {
        auto L = [q](double t) { return q * 2.0 * std::atan(std::tanh(0.5 * t)); };
        lo_rate = [L](double x) { return L(-std::exp(x)) + x; };
        hi_rate = [L](double x) { return L(std::exp(x)) + x; };
        lo_div = hi_div = true;
        rep.criterion = "sinh: complete";
        break;
      }
      case Omega0Shape::exp: {
        // f = -c e^{-t}
        lo_rate = [q](double x) {
          double e = std::exp(std::exp(x));
          return -q * e + x;
        };
        hi_rate = [q](double x) { return -q * std::exp(-std::exp(x)) + x; };
        lo_div = c < 0.0;
        hi_div = true;
        rep.criterion = "exp: complete iff c < 0";
        break;
      }
      case Omega0Shape::cosh: {
        // f = c ln tanh(t/2) on (0, inf)
        lo_rate = [q](double x) { double d = std::exp(-x); return q * std::log(std::tanh(0.5 * d)) - x; };
        hi_rate = [q](double x) {
          double t = std::exp(x);
          return q * (std::log1p(-std::exp(-t)) - std::log1p(std::exp(-t))) + x;
        };
        lo_div = q <= -1.0;
        hi_div = true;
        rep.criterion = "cosh: complete iff c <= -(n-2)";
        break;
      }
      case Omega0Shape::cos: {
        // f = c ln tan(t/2) on (0, pi)
        lo_rate = [q](double x) { double d = std::exp(-x); return q * std::log(std::tan(0.5 * d)) - x; };
        hi_rate = [q](double x) { double d = std::exp(-x); return -q * std::log(std::tan(0.5 * d)) - x; };
        lo_div = q <= -1.0;
        hi_div = q >= 1.0;
        rep.criterion = "cos: never complete";
        break;
      }
    }
  }
  rep.lower = detail::probe_end(lo_rate, x0_lo);
  rep.upper = detail::probe_end(hi_rate, x0_hi);
  rep.lower.closed_form_divergent = lo_div;
  rep.upper.closed_form_divergent = hi_div;
  auto agrees = [](const EndEvidence& e) {
    return e.numeric != EndVerdict::inconclusive && (e.numeric == EndVerdict::divergent) == e.closed_form_divergent;
  };
  rep.conclusive = rep.lower.numeric != EndVerdict::inconclusive && rep.upper.numeric != EndVerdict::inconclusive;
  rep.agree = agrees(rep.lower) && agrees(rep.upper);
  rep.complete = lo_div && hi_div;
  return rep;
}

}  // namespace gqe
