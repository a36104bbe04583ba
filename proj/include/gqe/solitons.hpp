#pragma once

// Gradient Ricci solitons and m-quasi-Einstein metrics: the integral identities, the product,
// flat Gaussian and Bryant examples, and the lambda2 of their conformal changes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gqe/conformal.hpp"
#include "gqe/ode.hpp"

namespace gqe {

struct IdentityDrift {
  double min = 0.0, max = 0.0, mean = 0.0;
  double drift = 0.0;  // max - min
};

namespace detail {

inline IdentityDrift summarize(const std::vector<double>& vals) {
  IdentityDrift d;
  d.min = *std::min_element(vals.begin(), vals.end());
  d.max = *std::max_element(vals.begin(), vals.end());
  double sum = 0.0;
  for (double v : vals) sum += v;
  d.mean = sum / vals.size();
  d.drift = d.max - d.min;
  return d;
}

// Delta f - |grad f|^2 and f for g-gauge structures with base or constant potentials.
inline void soliton_terms(const GQEStructure& s, double t, double& defect, double& f) {
  if (std::holds_alternative<ConstantPotential>(s.potential)) {
    defect = 0.0;
    f = std::get<ConstantPotential>(s.potential).value;
    return;
  }
  Jet j = std::get<OfBase>(s.potential).f.jet(t);
  defect = laplacian_warped(s.metric, j, t) - j.d1 * j.d1;
  f = j.v;
}

inline void require_soliton_shape(const GQEStructure& s) {
  require(s.gauge() == Gauge::g, Errc::invalid_argument, "identity checks expect a g-gauge structure");
  require(s.kind == CoefficientKind::lambda && s.coefficient.is_constant(), Errc::invalid_argument,
          "identity checks need a constant lambda");
  require(!std::holds_alternative<OfFiber>(s.potential), Errc::invalid_argument,
          "identity checks support base or constant potentials");
}

}  // namespace detail

// Delta f - |grad f|^2 + 2 lambda f, which is constant on a gradient Ricci soliton.
inline IdentityDrift hamilton_identity_drift(const GQEStructure& s, int samples = 100) {
  detail::require_soliton_shape(s);
  require(s.alpha.is_constant() && *s.alpha.constant_value() == 0.0, Errc::invalid_argument,
          "a gradient Ricci soliton has alpha = 0");
  const double lam = *s.coefficient.constant_value();
  std::vector<double> vals;
  for (auto [t, y] : sample_grid(s.metric, samples)) {
    double defect, f;
    detail::soliton_terms(s, t, defect, f);
    vals.push_back(defect + 2.0 * lam * f);
  }
  return detail::summarize(vals);
}

struct KimKimReport {
  IdentityDrift drift;   // Delta f - |grad f|^2 - m(lambda - mu e^{2f/m})
  double m = 0.0;
  Constancy Q;           // ((n+m-2) lambda - m mu e^{2f/m}) e^{2f/(n-2)}/(n-2)
  double Q_gap = 0.0;    // against (Delta f - |grad f|^2 + (n-2) lambda) e^{2f/(n-2)}/(n-2)
};

// mu read off at one point: (lambda - (Delta f - |grad f|^2)/m) e^{-2f/m}.
inline double kimkim_mu(const GQEStructure& s, double t) {
  detail::require_soliton_shape(s);
  const double m = -1.0 / *s.alpha.constant_value();
  double defect, f;
  detail::soliton_terms(s, t, defect, f);
  return (*s.coefficient.constant_value() - defect / m) * std::exp(-2.0 * f / m);
}

inline KimKimReport kimkim_identity_drift(const GQEStructure& s, double mu, int samples = 100) {
  detail::require_soliton_shape(s);
  require(s.alpha.is_constant() && *s.alpha.constant_value() < 0.0, Errc::invalid_argument,
          "an m-quasi-Einstein structure has alpha = -1/m with m > 0");
  KimKimReport r;
  r.m = -1.0 / *s.alpha.constant_value();
  const double lam = *s.coefficient.constant_value(), n = s.n(), m = r.m;
  std::vector<double> vals, qs;
  for (auto [t, y] : sample_grid(s.metric, samples)) {
    double defect, f;
    detail::soliton_terms(s, t, defect, f);
    vals.push_back(defect - m * (lam - mu * std::exp(2.0 * f / m)));
    double e = std::exp(2.0 * f / (n - 2.0)) / (n - 2.0);
    double q = ((n + m - 2.0) * lam - m * mu * std::exp(2.0 * f / m)) * e;
    double qeqn = (defect + (n - 2.0) * lam) * e;
    r.Q_gap = std::max(r.Q_gap, std::fabs(q - qeqn) / std::max(1.0, std::fabs(qeqn)));
    qs.push_back(q);
  }
  r.drift = detail::summarize(vals);
  r.Q.min = *std::min_element(qs.begin(), qs.end());
  r.Q.max = *std::max_element(qs.begin(), qs.end());
  double sum = 0.0;
  for (double q : qs) sum += q;
  r.Q.mean = sum / qs.size();
  r.Q.spread = r.Q.max - r.Q.min;
  r.Q.relative = r.Q.spread / std::max(1.0, std::fabs(r.Q.mean));
  r.Q.constant = r.Q.relative <= 1e-10;
  return r;
}

// ------------------------------------------------------------------ examples

constexpr double kNonconstancyThreshold = 1e-3;

struct SolitonChange {
  GQEStructure g1;
  std::optional<Lambda2Result> change;  // absent when u vanishes on the sample box
  PositivityDomain positivity;          // of u over the scanned range
  Constancy lambda2;
  bool nonconstant = false;
  bool constancy_skipped = false;       // f constant: Einstein case
};

// g1 = ds^2 + g_N with N Einstein of constant lambda1 and f = lambda1 s^2/2 + a s + b.
// u = C - ((n-2)/2a) e^{-2as/(n-2)} for lambda1 = 0; u = C + int_0^s e^{-lambda1 p^2/(n-2)} dp otherwise
// (which needs a = b = 0).
inline SolitonChange product_soliton(int n, double lambda1, double a, double b, double C,
                                     Interval sample_box = {-3.0, 3.0}, Interval scan = {-30.0, 30.0}) {
  require(lambda1 == 0.0 || (a == 0.0 && b == 0.0), Errc::invalid_argument,
          "for lambda1 != 0 shift s and f so that f = lambda1 s^2 / 2");
  Expr s = ex::var("t");
  WarpedOptions wo;
  wo.sample_box = sample_box;
  auto m = make_warped(n, {-kInf, kInf}, RealFunction::constant(1.0), ChartKind::rectangular,
                       EinsteinFiber{n - 1, lambda1}, Gauge::g, wo);
  Expr f = 0.5 * lambda1 * s * s + a * s + b;
  SolitonChange out;
  Potential pot = f.is_constant() ? Potential{ConstantPotential{b}} : Potential{OfBase{RealFunction::from_expr(f)}};
  out.g1 = make_structure(m, pot, ScalarField::constant(0.0), CoefficientKind::lambda, ScalarField::constant(lambda1));
  const double k = n - 2.0;
  RealFunction U;
  if (lambda1 == 0.0 && a != 0.0) {
    U = RealFunction::from_expr(-(k / (2.0 * a)) * ex::exp(-2.0 * a * s / k) * std::exp(-2.0 * b / k));
  } else if (lambda1 == 0.0) {
    out.constancy_skipped = true;
    U = RealFunction::from_expr(s);  // du/ds = v for a constant potential
  } else {
    const double q = lambda1 / k;
    if (q > 0) {
      const double amp = 0.5 * std::sqrt(M_PI / q), sq = std::sqrt(q);
      U = RealFunction::from_jet([amp, sq, q](double x) {
        double e = std::exp(-q * x * x);
        return Jet{amp * std::erf(sq * x), e, -2.0 * q * x * e};
      });
    } else {
      const double r = 5.0 / std::sqrt(-q);
      scan = {std::max(scan.lo, -r), std::min(scan.hi, r)};
      U = antiderivative(RealFunction::from_expr(ex::exp(-q * s * s)), scan.lo, scan.hi, 0.0);
    }
  }
  RealFunction Uc = U;
  auto u = [Uc, C](double x) { return C + Uc(x); };
  out.positivity = positivity_domain(u, scan.lo, scan.hi, std::clamp(0.0, scan.lo, scan.hi));
  bool zero_in_box = false;
  for (double z : out.positivity.zeros) zero_in_box = zero_in_box || sample_box.contains_closed(z);
  if (zero_in_box) return out;
  Lambda2Options lo;
  lo.U = U;
  lo.constancy_samples = 200;
  out.change = lambda2(out.g1, C, lo);
  out.lambda2 = out.change->lambda2_constancy;
  out.nonconstant = !out.constancy_skipped && out.lambda2.relative > kNonconstancyThreshold;
  return out;
}

// Flat R^n in polar form with f = lambda1 s^2/2 and u = C - ((n-2)/(2 lambda1)) e^{-lambda1 s^2/(n-2)}.
inline SolitonChange gaussian_soliton(int n, double lambda1, double C, Interval sample_box = {0.01, 10.0}) {
  require(lambda1 != 0.0, Errc::invalid_argument, "the Gaussian soliton needs lambda1 != 0");
  require(lambda1 > 0.0 || C > 0.0, Errc::invalid_argument, "lambda1 < 0 needs C > 0");
  Expr s = ex::var("t");
  const double k = n - 2.0;
  WarpedOptions wo;
  wo.sample_box = sample_box;
  auto m = make_warped(n, {0.0, kInf}, RealFunction::from_expr(s), ChartKind::polar_left, EinsteinFiber{n - 1, k},
                       Gauge::g, wo);
  SolitonChange out;
  out.g1 = make_structure(m, OfBase{RealFunction::from_expr(0.5 * lambda1 * s * s)}, ScalarField::constant(0.0),
                          CoefficientKind::lambda, ScalarField::constant(lambda1));
  RealFunction U = RealFunction::from_expr(-(k / (2.0 * lambda1)) * ex::exp(-lambda1 * s * s / k));
  auto u = [U, C](double x) { return C + U(x); };
  const double hi = std::max(sample_box.hi, 4.0 * std::sqrt(k / std::fabs(lambda1)));
  out.positivity = positivity_domain(u, 0.0, hi, 0.0);
  if (!out.positivity.zeros.empty())
    fail(Errc::domain, "u vanishes at s = " + std::to_string(out.positivity.zeros.front()));
  Lambda2Options lo;
  lo.U = U;
  out.change = lambda2(out.g1, C, lo);
  out.lambda2 = out.change->lambda2_constancy;
  out.nonconstant = out.lambda2.relative > kNonconstancyThreshold;
  return out;
}

// lambda2 of the Gaussian change as s -> 0: lambda1 u0^2 + 2(n-1) u0 with u0 = u(0).
inline double gaussian_lambda2_at_origin(int n, double lambda1, double C) {
  double u0 = C - (n - 2.0) / (2.0 * lambda1);
  return lambda1 * u0 * u0 + 2.0 * (n - 1.0) * u0;
}

// ------------------------------------------------------------------ Bryant soliton

// Steady rotationally symmetric soliton ds^2 + w^2 g_{S^{n-1}}:
// w'' = (n-2)(1 - w'^2)/w + f'w',  f'' = (n-1) w''/w,
// started from the regular series w = s + w3 s^3, f = b s^2/2 with b = -1/n (so R(0) = c = 1).
// The state stores w' - 1 (1 - w'^2 cancels near the origin otherwise) and U = int_0^s e^{-2f/(n-2)} w.
struct SolitonProfile {
  int n = 3;
  double lambda = 0.0;
  double c = 1.0;
  double b = 0.0, w3 = 0.0;
  double s0 = 1e-3, step = 1e-3, s_max = 0.0;
  double start_ratio = 1000.0;
  std::vector<State<5>> nodes;  // (w, w' - 1, f, f', U) at s0 + i * step

  State<5> rhs(const State<5>& y) const {
    const double w = y[0], q = y[1], df = y[3];
    const double ddw = -(n - 2.0) * q * (2.0 + q) / w + df * (1.0 + q);
    return {1.0 + q, ddw, df, (n - 1.0) * ddw / w, std::exp(-2.0 * y[2] / (n - 2.0)) * w};
  }

  // RK4 from a to b, substepping so that each step stays below s / start_ratio near the singular
  // origin.
  State<5> advance(State<5> y, double a, double b) const {
    const int sub = std::max(1, static_cast<int>(std::ceil(start_ratio * (b - a) / a)));
    const double h = (b - a) / sub;
    auto f = [this](double, const State<5>& z) { return rhs(z); };
    for (int k = 0; k < sub; ++k) y = rk4_step(f, a + k * h, y, h);
    return y;
  }

  State<5> state(double s) const {
    require(s >= 0.0 && s <= s_max + 1e-12, Errc::out_of_range, "s = " + std::to_string(s) + " outside the profile");
    if (s <= s0) {
      return {s + w3 * s * s * s, 3.0 * w3 * s * s, 0.5 * b * s * s, b * s, 0.5 * s * s};
    }
    std::size_t i = std::min(nodes.size() - 1, static_cast<std::size_t>((s - s0) / step));
    double si = s0 + i * step;
    if (s == si) return nodes[i];
    return advance(nodes[i], si, s);
  }

  Jet w(double s) const {
    auto y = state(s);
    if (s <= s0) return {y[0], 1.0 + y[1], 6.0 * w3 * s};
    return {y[0], 1.0 + y[1], rhs(y)[1]};
  }
  double one_minus_dw2(double s) const {
    double q = state(s)[1];
    return -q * (2.0 + q);
  }
  Jet f(double s) const {
    auto y = state(s);
    if (s <= s0) return {y[2], y[3], b};
    return {y[2], y[3], rhs(y)[3]};
  }
  double scalar_curvature(double s) const {
    Jet j = w(s);
    if (s <= s0) return -n * b;
    return -2.0 * (n - 1.0) * j.d2 / j.v + (n - 1.0) * (n - 2.0) * one_minus_dw2(s) / (j.v * j.v);
  }
  // sectional curvatures of radial and tangential planes
  double radial_curvature(double s) const {
    Jet j = w(s);
    return s <= s0 ? -b / (n - 1.0) : -j.d2 / j.v;
  }
  double tangential_curvature(double s) const {
    Jet j = w(s);
    return s <= s0 ? -b / (n - 1.0) : one_minus_dw2(s) / (j.v * j.v);
  }

  GQEStructure structure() const {
    auto self = std::make_shared<SolitonProfile>(*this);
    RealFunction warp = RealFunction::from_jet([self](double s) { return self->w(s); });
    RealFunction pot = RealFunction::from_jet([self](double s) { return self->f(s); });
    WarpedOptions wo;
    wo.sample_box = Interval{0.05, s_max - 0.05};
    auto m = make_warped(n, {0.0, s_max}, warp, ChartKind::polar_left, EinsteinFiber{n - 1, n - 2.0}, Gauge::g, wo);
    return make_structure(m, OfBase{pot}, ScalarField::constant(0.0), CoefficientKind::lambda,
                          ScalarField::constant(0.0));
  }
};

struct BryantOptions {
  double s0 = 1e-3;
  double step = 1e-3;
  double tail_tol = 0.05;  // |f'(s_max) + 1|
  double start_ratio = 1000.0;
};

inline SolitonProfile bryant_integrate(int n, double s_max, BryantOptions opt = {}) {
  require(n >= 3, Errc::invalid_argument, "dimension must be at least 3");
  require(s_max > 10.0 * opt.s0, Errc::invalid_argument, "s_max too small");
  SolitonProfile p;
  p.n = n;
  p.b = -1.0 / n;
  p.w3 = p.b / (6.0 * (n - 1.0));
  p.s0 = opt.s0;
  p.step = opt.step;
  p.start_ratio = opt.start_ratio;
  const int steps = static_cast<int>(std::ceil((s_max - opt.s0) / opt.step));
  p.s_max = opt.s0 + steps * opt.step;
  p.nodes.reserve(steps + 1);
  State<5> y{opt.s0 + p.w3 * std::pow(opt.s0, 3), 3.0 * p.w3 * opt.s0 * opt.s0, 0.5 * p.b * opt.s0 * opt.s0,
             p.b * opt.s0, 0.5 * opt.s0 * opt.s0};
  p.nodes.push_back(y);
  for (int i = 0; i < steps; ++i) {
    y = p.advance(y, opt.s0 + i * opt.step, opt.s0 + (i + 1) * opt.step);
    require(y[0] > 0.0 && std::isfinite(y[1]), Errc::not_converged,
            "profile left the regular branch at s = " + std::to_string(opt.s0 + (i + 1) * opt.step));
    p.nodes.push_back(y);
  }
  p.c = p.scalar_curvature(p.s0) + p.b * p.b * p.s0 * p.s0;
  const double tail = p.nodes.back()[3];
  require(std::fabs(tail + std::sqrt(p.c)) <= opt.tail_tol, Errc::not_converged,
          "f'(s_max) = " + std::to_string(tail) + " is not within tolerance of -sqrt(c)");
  return p;
}

struct BryantChecks {
  double invariant_drift = 0.0;  // max |R + |grad f|^2 - c| on [0.1, s_max]
  double fp_end = 0.0;           // f'(s_max)
  double w_ratio_lo = 0.0, w_ratio_hi = 0.0;  // w / sqrt(s) on [s_max/4, s_max]
  double min_radial = 0.0, min_tangential = 0.0;
};

inline BryantChecks bryant_checks(const SolitonProfile& p, int samples = 2000) {
  BryantChecks r;
  r.w_ratio_lo = kInf;
  r.min_radial = r.min_tangential = kInf;
  for (int i = 0; i <= samples; ++i) {
    double s = 0.1 + (p.s_max - 0.1) * i / samples;
    Jet f = p.f(s);
    r.invariant_drift = std::max(r.invariant_drift, std::fabs(p.scalar_curvature(s) + f.d1 * f.d1 - p.c));
    if (s >= p.s_max / 4) {
      double q = p.w(s).v / std::sqrt(s);
      r.w_ratio_lo = std::min(r.w_ratio_lo, q);
      r.w_ratio_hi = std::max(r.w_ratio_hi, q);
    }
  }
  for (int i = 0; i <= samples; ++i) {
    double s = p.s_max * i / samples;
    r.min_radial = std::min(r.min_radial, p.radial_curvature(s));
    r.min_tangential = std::min(r.min_tangential, p.tangential_curvature(s));
  }
  r.fp_end = p.f(p.s_max).d1;
  return r;
}

struct BryantLambda2 {
  double C = 1.0;
  std::vector<double> s, lambda2, u;
  double limit_origin = 0.0;     // lambda2 at the first node
  double limit_expected = 0.0;   // 2C(n-1)
  double tail_ratio = 0.0;       // lambda2 / u^2 at s_max
  double tail_expected = 0.0;    // -2c/(n-2)
  Constancy constancy;
  bool nonconstant = false;
  bool decreasing_tail = false;  // lambda2 negative and decreasing on the last quarter
};

// lambda2 = (n-1)(u u'' + u u' w'/w - u'^2) + u u' f' with u = C + U.
inline double bryant_lambda2_at(const SolitonProfile& p, double C, double s) {
  auto y = p.state(s);
  const double k = p.n - 2.0;
  Jet w = p.w(s), f = p.f(s);
  double e = std::exp(-2.0 * f.v / k);
  double u = C + y[4], du = e * w.v, ddu = e * (w.d1 - 2.0 * f.d1 * w.v / k);
  return (p.n - 1.0) * (u * ddu + u * e * w.d1 - du * du) + u * du * f.d1;  // u' w'/w = e w'
}

inline BryantLambda2 bryant_conformal_lambda2(const SolitonProfile& p, double C, Interval range = {0.1, kInf},
                                              int samples = 400) {
  require(C > 0.0, Errc::invalid_argument, "C must be positive");
  BryantLambda2 r;
  r.C = C;
  const double lo = range.lo, hi = std::min(range.hi, p.s_max);
  for (int i = 0; i < samples; ++i) {
    double s = lo + (hi - lo) * i / (samples - 1);
    r.s.push_back(s);
    r.lambda2.push_back(bryant_lambda2_at(p, C, s));
    r.u.push_back(C + p.state(s)[4]);
  }
  r.limit_origin = bryant_lambda2_at(p, C, 1e-6);
  r.limit_expected = 2.0 * C * (p.n - 1.0);
  double uend = C + p.state(p.s_max)[4];
  r.tail_ratio = bryant_lambda2_at(p, C, p.s_max) / (uend * uend);
  r.tail_expected = -2.0 * p.c / (p.n - 2.0);
  const auto& L = r.lambda2;
  r.constancy.min = *std::min_element(L.begin(), L.end());
  r.constancy.max = *std::max_element(L.begin(), L.end());
  double sum = 0.0;
  for (double v : L) sum += v;
  r.constancy.mean = sum / L.size();
  r.constancy.spread = r.constancy.max - r.constancy.min;
  r.constancy.relative = r.constancy.spread / std::max(1.0, std::fabs(r.constancy.mean));
  r.nonconstant = r.constancy.relative > kNonconstancyThreshold;
  r.constancy.constant = !r.nonconstant;
  r.decreasing_tail = true;
  for (std::size_t i = 3 * L.size() / 4; i + 1 < L.size(); ++i)
    r.decreasing_tail = r.decreasing_tail && L[i] < 0.0 && L[i + 1] < L[i];
  return r;
}

}  // namespace gqe
