#pragma once

// JSON scene files: a warped product, a GQE structure on it, an optional conformal field
// and sampling defaults. Expressions are strings in the expression grammar.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqe/fields.hpp"
#include "gqe/gqe.hpp"

namespace gqe::cli {

using nlohmann::json;

inline constexpr int kSceneSchema = 1;

// Input errors in a scene; `where` is "label:line" for syntax errors or the JSON field path.
class SceneError : public Error {
 public:
  SceneError(const std::string& where, const std::string& msg)
      : Error(Errc::invalid_argument, where + ": " + msg), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

struct Sampling {
  int count = 100;
  double tol = 1e-8;
  std::uint64_t seed = 1;
};

struct Scene {
  std::string label;
  int schema = kSceneSchema;
  GQEStructure structure;
  std::optional<Expr> potential_expr;  // base or fiber potential as written
  std::optional<ConformalFieldSpec> field;
  double field_dvf = 0.0;
  Sampling sampling;
  json source;
};

namespace detail {

class Reader {
 public:
  explicit Reader(std::string label) : label_(std::move(label)) {}

  [[noreturn]] void error(const std::string& path, const std::string& msg) const {
    throw SceneError(label_ + ": field '" + path + "'", msg);
  }

  const json& need(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object() || !obj.contains(key)) error(path.empty() ? key : path + "." + key, "missing");
    return obj.at(key);
  }

  double number(const json& j, const std::string& path) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      std::string s = j.get<std::string>();
      if (s == "inf" || s == "+inf") return kInf;
      if (s == "-inf") return -kInf;
      Expr e = expr(j, path, {"t"});
      if (!e.free_variables().empty()) error(path, "expected a constant, got '" + s + "'");
      auto v = evaluate(e, {});
      if (!v) error(path, v.error().message);
      return *v;
    }
    error(path, "expected a number");
  }

  int integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) error(path, "expected an integer");
    return j.get<int>();
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) error(path, "expected a string");
    return j.get<std::string>();
  }

  Expr expr(const json& j, const std::string& path, const std::vector<std::string>& vars) const {
    if (j.is_number()) return Expr(j.get<double>());
    std::string text = string(j, path);
    try {
      return parse(text, vars);
    } catch (const Error& e) {
      error(path, e.what());
    }
  }

  Interval interval(const json& j, const std::string& path) const {
    if (!j.is_array() || j.size() != 2) error(path, "expected [lo, hi]");
    Interval I{number(j[0], path + "[0]"), number(j[1], path + "[1]")};
    if (!(I.lo < I.hi)) error(path, "empty interval");
    return I;
  }

  ScalarField field(const json& j, const std::string& path) const {
    Expr e = expr(j, path, {"t", "y"});
    if (e.free_variables().empty()) return ScalarField::constant(number(j, path));
    return ScalarField::from_expr(e);
  }

 private:
  std::string label_;
};

inline ChartKind parse_chart(const Reader& r, const std::string& s) {
  if (s == "rectangular") return ChartKind::rectangular;
  if (s == "polar_left") return ChartKind::polar_left;
  if (s == "polar_both") return ChartKind::polar_both;
  r.error("chart", "unknown chart kind '" + s + "' (rectangular, polar_left, polar_both)");
}

inline FiberPart parse_fiber_part(const Reader& r, const std::string& s) {
  if (s == "killing") return FiberPart::killing;
  if (s == "homothetic") return FiberPart::homothetic;
  if (s == "fiber_conformal") return FiberPart::fiber_conformal;
  r.error("field.kind", "unknown field kind '" + s + "' (killing, homothetic, fiber_conformal)");
}

inline std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return std::to_string(line);
}

}  // namespace detail

inline Scene parse_scene(const std::string& text, const std::string& label = "scene") {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    throw SceneError(label + ":" + detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1), msg);
  }
  detail::Reader r(label);
  if (!j.is_object()) r.error("", "a scene must be a JSON object");
  Scene sc;
  sc.label = label;
  sc.source = j;
  sc.schema = r.integer(r.need(j, "schema", ""), "schema");
  if (sc.schema != kSceneSchema)
    r.error("schema", "unsupported schema version " + std::to_string(sc.schema) + " (expected " +
                          std::to_string(kSceneSchema) + ")");
  const int n = r.integer(r.need(j, "dim", ""), "dim");
  if (n < 3) r.error("dim", "dimension must be at least 3");
  ChartKind kind = detail::parse_chart(r, r.string(r.need(j, "chart", ""), "chart"));
  Interval I = r.interval(r.need(j, "interval", ""), "interval");
  WarpedOptions wo;
  if (j.contains("sample_box")) wo.sample_box = r.interval(j["sample_box"], "sample_box");
  Expr warp = r.expr(r.need(j, "warp", ""), "warp", {"t"});

  const json& fj = r.need(j, "fiber", "");
  std::string ftype = r.string(r.need(fj, "type", "fiber"), "fiber.type");
  Fiber fiber;
  if (ftype == "einstein") {
    fiber = EinsteinFiber{n - 1, r.number(r.need(fj, "mu", "fiber"), "fiber.mu")};
  } else if (ftype == "product") {
    Expr rho = r.expr(r.need(fj, "rho", "fiber"), "fiber.rho", {"y"});
    double sub_mu = r.number(r.need(fj, "sub_mu", "fiber"), "fiber.sub_mu");
    Interval yb{-1.0, 1.0};
    if (fj.contains("y_box")) yb = r.interval(fj["y_box"], "fiber.y_box");
    fiber = make_product_fiber(n - 1, rho, sub_mu, yb);
  } else {
    r.error("fiber.type", "unknown fiber type '" + ftype + "' (einstein, product)");
  }

  const json& cj = r.need(j, "coefficient", "");
  std::string ck = r.string(r.need(cj, "kind", "coefficient"), "coefficient.kind");
  CoefficientKind coef_kind;
  if (ck == "lambda") coef_kind = CoefficientKind::lambda;
  else if (ck == "Q") coef_kind = CoefficientKind::Q;
  else r.error("coefficient.kind", "expected 'lambda' or 'Q'");
  Gauge gauge = coef_kind == CoefficientKind::lambda ? Gauge::g : Gauge::h;
  if (j.contains("gauge")) {
    std::string gs = r.string(j["gauge"], "gauge");
    if (gs != to_string(gauge)) r.error("gauge", "gauge '" + gs + "' does not match coefficient kind '" + ck + "'");
  }
  ScalarField coefficient = r.field(r.need(cj, "value", "coefficient"), "coefficient.value");

  Potential potential = ConstantPotential{0.0};
  if (j.contains("potential")) {
    const json& pj = j["potential"];
    std::string pt = r.string(r.need(pj, "type", "potential"), "potential.type");
    if (pt == "constant") {
      potential = ConstantPotential{r.number(r.need(pj, "value", "potential"), "potential.value")};
    } else if (pt == "base") {
      Expr e = r.expr(r.need(pj, "expr", "potential"), "potential.expr", {"t"});
      sc.potential_expr = e;
      potential = OfBase{RealFunction::from_expr(e)};
    } else if (pt == "fiber") {
      Expr e = r.expr(r.need(pj, "expr", "potential"), "potential.expr", {"y"});
      sc.potential_expr = e;
      potential = OfFiber{RealFunction::from_expr(e, "y")};
    } else {
      r.error("potential.type", "unknown potential type '" + pt + "' (constant, base, fiber)");
    }
  }
  ScalarField alpha = j.contains("alpha") ? r.field(j["alpha"], "alpha") : ScalarField::constant(0.0);
  bool ce = j.value("conformally_einstein", false);

  try {
    auto m = make_warped(n, I, RealFunction::from_expr(warp), kind, fiber, gauge, wo);
    sc.structure = make_structure(std::move(m), potential, alpha, coef_kind, coefficient, ce);
  } catch (const SceneError&) {
    throw;
  } catch (const Error& e) {
    r.error("", e.what());
  }

  if (j.contains("field")) {
    const json& vj = j["field"];
    std::vector<std::string> names = build_chart(sc.structure.metric).coords;
    ConformalFieldSpec V;
    V.v0 = r.expr(r.need(vj, "v0", "field"), "field.v0", names);
    if (vj.contains("kind")) V.kind = detail::parse_fiber_part(r, r.string(vj["kind"], "field.kind"));
    if (vj.contains("omega")) V.omega = r.number(vj["omega"], "field.omega");
    if (vj.contains("omega_t")) V.omega_t = r.expr(vj["omega_t"], "field.omega_t", names);
    if (vj.contains("components")) {
      const json& comps = vj["components"];
      if (!comps.is_array() || comps.size() + 1 != names.size())
        r.error("field.components", "expected " + std::to_string(names.size() - 1) + " fiber components");
      for (std::size_t i = 0; i < comps.size(); ++i)
        V.fiber_components.push_back(r.expr(comps[i], "field.components[" + std::to_string(i) + "]", names));
    }
    if (vj.contains("sigma")) V.sigma = r.expr(vj["sigma"], "field.sigma", names);
    if (vj.contains("dvf")) sc.field_dvf = r.number(vj["dvf"], "field.dvf");
    if (V.kind == FiberPart::fiber_conformal && !V.omega_t) r.error("field.omega_t", "required for fiber_conformal");
    sc.field = V;
  }

  if (j.contains("sampling")) {
    const json& sj = j["sampling"];
    if (sj.contains("count")) sc.sampling.count = r.integer(sj["count"], "sampling.count");
    if (sj.contains("tol")) sc.sampling.tol = r.number(sj["tol"], "sampling.tol");
    if (sj.contains("seed")) {
      if (!sj["seed"].is_number_unsigned()) r.error("sampling.seed", "expected a non-negative integer");
      sc.sampling.seed = sj["seed"].get<std::uint64_t>();
    }
    if (sc.sampling.count < 1) r.error("sampling.count", "must be positive");
    if (!(sc.sampling.tol > 0.0)) r.error("sampling.tol", "must be positive");
  }
  return sc;
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(path, "cannot open scene file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path);
}

}  // namespace gqe::cli
