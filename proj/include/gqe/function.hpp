#pragma once

// Real functions carrying two derivatives, scalar fields on (t, y), and coordinate maps.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "gqe/chebyshev.hpp"
#include "gqe/error.hpp"
#include "gqe/expr.hpp"

namespace gqe {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool contains(double x) const { return x > lo && x < hi; }
  bool contains_closed(double x) const { return x >= lo && x <= hi; }
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }
};

struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

class RealFunction {
 public:
  using JetFn = std::function<Jet(double)>;
  using ValueFn = std::function<double(double)>;

  RealFunction() = default;

  static RealFunction constant(double c) {
    RealFunction f;
    f.jet_ = [c](double) { return Jet{c, 0.0, 0.0}; };
    f.value_ = [c](double) { return c; };
    f.expr_ = Expr(c);
    return f;
  }

  static RealFunction from_expr(const Expr& e, const std::string& var = "t") {
    for (const auto& v : e.free_variables())
      if (v != var) fail(Errc::unbound_variable, "expression '" + e.str() + "' uses '" + v + "', expected only '" + var + "'");
    Expr d1 = differentiate(e, var);
    Expr d2 = differentiate(d1, var);
    auto p0 = std::make_shared<Program>(e, std::vector<std::string>{var});
    auto p1 = std::make_shared<Program>(d1, std::vector<std::string>{var});
    auto p2 = std::make_shared<Program>(d2, std::vector<std::string>{var});
    RealFunction f;
    f.jet_ = [p0, p1, p2](double x) { return Jet{(*p0)(x), (*p1)(x), (*p2)(x)}; };
    f.value_ = [p0](double x) { return (*p0)(x); };
    f.expr_ = e;
    f.var_ = var;
    return f;
  }

  static RealFunction from_jet(JetFn jet, ValueFn value = {}) {
    RealFunction f;
    if (!value) value = [jet](double x) { return jet(x).v; };
    f.jet_ = std::move(jet);
    f.value_ = std::move(value);
    return f;
  }

  bool valid() const { return static_cast<bool>(jet_); }
  Jet jet(double x) const { return jet_(x); }
  double operator()(double x) const { return value_(x); }
  const std::optional<Expr>& expr() const { return expr_; }
  const std::string& variable() const { return var_; }

  // Expression for the first derivative when a closed form exists.
  std::optional<Expr> derivative_expr() const {
    if (!expr_) return std::nullopt;
    return differentiate(*expr_, var_);
  }

 private:
  JetFn jet_;
  ValueFn value_;
  std::optional<Expr> expr_;
  std::string var_ = "t";
};

enum class Dependence { none, base, fiber, both };

// Scalar function on the (t, y) coordinates of a warped product; y is the flat fiber
// coordinate of a product fiber and is ignored elsewhere.
class ScalarField {
 public:
  using Fn = std::function<double(double, double)>;

  ScalarField() : ScalarField(constant(0.0)) {}

  static ScalarField constant(double c) {
    ScalarField s(Fn([c](double, double) { return c; }), Dependence::none);
    s.expr_ = Expr(c);
    s.const_ = c;
    return s;
  }

  static ScalarField from_expr(const Expr& e, const std::string& tname = "t", const std::string& yname = "y") {
    auto vars = e.free_variables();
    for (const auto& v : vars)
      if (v != tname && v != yname) fail(Errc::unbound_variable, "field '" + e.str() + "' uses unknown variable '" + v + "'");
    if (e.is_constant()) return constant(e.constant_value());
    bool bt = vars.count(tname) > 0, by = vars.count(yname) > 0;
    Dependence d = bt && by ? Dependence::both : bt ? Dependence::base : Dependence::fiber;
    auto p = std::make_shared<Program>(e, std::vector<std::string>{tname, yname});
    ScalarField s(Fn([p](double t, double y) { return (*p)(t, y); }), d);
    s.expr_ = e;
    return s;
  }

  static ScalarField of_base(const RealFunction& f) {
    ScalarField s(Fn([f](double t, double) { return f(t); }), Dependence::base);
    return s;
  }
  static ScalarField of_fiber(const RealFunction& f) {
    ScalarField s(Fn([f](double, double y) { return f(y); }), Dependence::fiber);
    return s;
  }
  static ScalarField from_fn(Fn fn, Dependence d) { return ScalarField(std::move(fn), d); }

  double operator()(double t, double y = 0.0) const { return fn_(t, y); }
  Dependence dependence() const { return dep_; }
  bool is_constant() const { return const_.has_value(); }
  std::optional<double> constant_value() const { return const_; }
  const std::optional<Expr>& expr() const { return expr_; }

  // Same field expressed in a new base coordinate r, with t = t_of_r(r).
  ScalarField compose_base(std::function<double(double)> t_of_r) const {
    if (const_) return *this;
    if (dep_ == Dependence::fiber) return *this;
    Fn f = fn_;
    return ScalarField(Fn([f, t_of_r](double r, double y) { return f(t_of_r(r), y); }), dep_);
  }

 private:
  ScalarField(Fn fn, Dependence d) : fn_(std::move(fn)), dep_(d) {}
  Fn fn_;
  Dependence dep_ = Dependence::none;
  std::optional<Expr> expr_;
  std::optional<double> const_;
};

// F(x) = \int_anchor^x g on [lo, hi]; the jet uses g and g' exactly.
inline RealFunction antiderivative(const RealFunction& g, double lo, double hi, double anchor,
                                   ChebyshevOptions opt = {}) {
  auto cheb = std::make_shared<PiecewiseChebyshev>(
      PiecewiseChebyshev::fit([&g](double x) { return g(x); }, lo, hi, opt).antiderivative(anchor));
  return RealFunction::from_jet(
      [cheb, g](double x) {
        Jet j = g.jet(x);
        return Jet{(*cheb)(x), j.v, j.d1};
      },
      [cheb](double x) { return (*cheb)(x); });
}

// Monotone change of coordinates new = phi(old) with phi' = density.
class CoordinateMap {
 public:
  CoordinateMap() = default;
  CoordinateMap(const RealFunction& density, double lo, double hi, double anchor_old, double anchor_new,
                ChebyshevOptions opt = {})
      : density_(density), old_{lo, hi} {
    auto fwd = PiecewiseChebyshev::fit([&density](double x) { return density(x); }, lo, hi, opt).antiderivative(anchor_old);
    fwd.add_constant(anchor_new);
    forward_ = std::make_shared<PiecewiseChebyshev>(std::move(fwd));
    inverse_ = std::make_shared<PiecewiseChebyshev>(
        PiecewiseChebyshev::inverse(*forward_, [density](double x) { return density(x); }, opt));
    double a = (*forward_)(lo), b = (*forward_)(hi);
    new_ = {std::min(a, b), std::max(a, b)};
    increasing_ = b > a;
  }

  double to_new(double x) const { return (*forward_)(x); }
  double to_old(double y) const { return (*inverse_)(y); }
  double density(double x) const { return density_(x); }
  Jet density_jet(double x) const { return density_.jet(x); }
  Interval old_range() const { return old_; }
  Interval new_range() const { return new_; }
  bool increasing() const { return increasing_; }
  bool valid() const { return static_cast<bool>(forward_); }

 private:
  RealFunction density_;
  std::shared_ptr<PiecewiseChebyshev> forward_, inverse_;
  Interval old_, new_;
  bool increasing_ = true;
};

}  // namespace gqe
