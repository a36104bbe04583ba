#pragma once

// Subcommands of the gqe tool. Each builds a Report of check rows; run() wires them to a
// command line and maps outcomes to exit codes (0 pass, 1 check failure, 2 input error).

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gqe/cli/report.hpp"
#include "gqe/cli/scene.hpp"
#include "gqe/conformal.hpp"
#include "gqe/construct.hpp"
#include "gqe/fields.hpp"
#include "gqe/parallel.hpp"
#include "gqe/rng.hpp"
#include "gqe/solitons.hpp"

namespace gqe::cli {

struct Common {
  std::optional<int> samples;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string out;
};

namespace detail {

inline int samples_or(const Common& c, int d) { return c.samples ? *c.samples : d; }
inline double tol_or(const Common& c, double d) { return c.tol ? *c.tol : d; }
inline std::uint64_t seed_or(const Common& c, std::uint64_t d) { return c.seed ? *c.seed : d; }

inline bool product_fiber(const WarpedMetric& m) { return std::holds_alternative<ProductFiber>(m.fiber); }

inline std::vector<double> coords_of(const WarpedMetric& m, double t, double y) {
  if (product_fiber(m)) return {t, y};
  return {t};
}

inline json interval_json(Interval I) { return json::array({fmt(I.lo), fmt(I.hi)}); }

// Reduced residual over the sample grid; computed in parallel, appended in grid order.
inline double residual_rows(Report& rep, const GQEStructure& s, int samples, double tol, const std::string& what) {
  auto pts = sample_grid(s.metric, samples);
  auto vals = parallel_map<double>(pts.size(), [&](std::size_t i) {
    return residual_reduced(s, pts[i].first, pts[i].second).max_abs();
  });
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rep.check("gqe_equation", what, vals[i], tol, coords_of(s.metric, pts[i].first, pts[i].second));
    worst = std::max(worst, vals[i]);
  }
  return worst;
}

// Finite-difference oracle residual at seeded interior chart points.
inline double oracle_rows(Report& rep, const GQEStructure& s, int count, std::uint64_t seed, double tol) {
  OracleSetup o = oracle_setup(s);
  Rng rng(seed);
  std::vector<std::vector<double>> ps;
  for (auto [t, y] : sample_grid(s.metric, count)) {
    std::vector<double> p(o.chart.dim);
    p[0] = t;
    for (int i = 1; i < o.chart.dim; ++i) {
      double w = o.chart.hi[i] - o.chart.lo[i];
      p[i] = rng.uniform(o.chart.lo[i] + 0.1 * w, o.chart.hi[i] - 0.1 * w);
    }
    if (product_fiber(s.metric)) p[1] = y;
    ps.push_back(std::move(p));
  }
  auto vals = parallel_map<double>(ps.size(), [&](std::size_t i) { return oracle_residual(s, o, ps[i]); });
  double worst = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::vector<double> c{ps[i][0]};
    if (product_fiber(s.metric)) c.push_back(ps[i][1]);
    rep.check("gqe_equation", "oracle", vals[i], tol, c);
    worst = std::max(worst, vals[i]);
  }
  return worst;
}

inline void field_rows(Report& rep, const WarpedMetric& h, const ConformalFieldSpec& V, const FieldCheckOptions& fo,
                       double tol) {
  FieldReport fr = check_conformal_field(h, V, fo);
  rep.check("field_fiber_conformal", "lie_fiber", fr.cond1, tol);
  rep.check("field_base_factor", "d_dt_v0_over_u", fr.cond2, tol);
  rep.check("field_mixed_gradient", "dVt_dt_plus_grad_v0", fr.cond3, tol);
  rep.check("conformal_field", "lie_derivative", fr.lie, tol);
  if (V.sigma) rep.check("conformal_field", "declared_sigma", fr.sigma_mismatch, tol);
  if (fo.potential) rep.check("structure_preserving", "dvf_constant", fr.dvf, tol);
  rep.details()["field"] = {{"sigma", fr.sigma.str()},
                            {"cond1", fr.cond1},
                            {"cond2", fr.cond2},
                            {"cond3", fr.cond3},
                            {"lie", fr.lie}};
}

inline json structure_json(const GQEStructure& s) {
  json j;
  j["dim"] = s.n();
  j["gauge"] = to_string(s.gauge());
  j["chart"] = to_string(s.metric.kind);
  j["interval"] = interval_json(s.metric.interval);
  j["sample_box"] = interval_json(s.metric.sample_box);
  if (s.metric.warp.expr()) j["warp"] = s.metric.warp.expr()->str();
  if (s.coefficient.is_constant()) j["coefficient"] = *s.coefficient.constant_value();
  if (s.alpha.is_constant()) j["alpha"] = *s.alpha.constant_value();
  return j;
}

inline ConformalFieldSpec scene_field(const Scene& sc) {
  require(sc.field.has_value(), Errc::invalid_argument, sc.label + ": scene has no 'field' entry");
  return *sc.field;
}

inline FieldCheckOptions field_options(const Scene& sc, int samples, std::uint64_t seed) {
  FieldCheckOptions fo;
  fo.samples = samples;
  fo.seed = seed;
  if (sc.potential_expr && std::holds_alternative<OfBase>(sc.structure.potential)) {
    std::string tn = build_chart(sc.structure.metric).coords[0];
    fo.potential = tn == "t" ? *sc.potential_expr : substitute(*sc.potential_expr, "t", ex::var(tn));
    fo.dvf = sc.field_dvf;
  }
  return fo;
}

}  // namespace detail

// ------------------------------------------------------------------ verify

struct VerifyOptions {
  int oracle_samples = 20;
  double oracle_tol = 1e-6;
  double field_tol = 1e-6;
};

inline Report cmd_verify(const Scene& sc, const Common& c, const VerifyOptions& o = {}) {
  Report rep("verify");
  const int samples = detail::samples_or(c, sc.sampling.count);
  const double tol = detail::tol_or(c, sc.sampling.tol);
  const std::uint64_t seed = detail::seed_or(c, sc.sampling.seed);
  double worst = detail::residual_rows(rep, sc.structure, samples, tol, "reduced");
  double oracle = o.oracle_samples > 0 ? detail::oracle_rows(rep, sc.structure, o.oracle_samples, seed, o.oracle_tol) : 0.0;
  if (sc.field) detail::field_rows(rep, sc.structure.metric, *sc.field, detail::field_options(sc, 20, seed), o.field_tol);
  rep.details()["scene"] = detail::structure_json(sc.structure);
  rep.details()["max_residual"] = worst;
  rep.details()["max_oracle_residual"] = oracle;
  return rep;
}

// ------------------------------------------------------------------ conformal

inline Report cmd_conformal(const Scene& sc, double C, const Common& c) {
  Report rep("conformal");
  const int samples = detail::samples_or(c, 50);
  const double tol = detail::tol_or(c, 1e-7);
  const GQEStructure& s = sc.structure;
  json& d = rep.details();
  d["C"] = C;
  if (s.gauge() == Gauge::g) {
    Lambda2Result r = lambda2(s, C);
    detail::residual_rows(rep, r.structure, samples, tol, "changed");
    rep.check("isometry", "reparametrization", r.reparam.isometry_defect, 1e-7);
    d["lambda2"] = {{"min", r.lambda2_constancy.min},
                    {"max", r.lambda2_constancy.max},
                    {"relative_variation", r.lambda2_constancy.relative},
                    {"constant", r.lambda2_constancy.constant}};
    d["result"] = detail::structure_json(r.structure);
    return rep;
  }
  ConformalResult r = conformal_change(s, C);
  const auto& rec = r.record;
  detail::residual_rows(rep, r.structure, samples, tol, "changed");
  rep.check("isometry", "reparametrization", rec.isometry_defect, 1e-7);
  d["Q2"] = {{"mean", rec.Q2_constancy.mean},
             {"relative_variation", rec.Q2_constancy.relative},
             {"constant", rec.Q2_constancy.constant}};
  d["positivity_domain"] = detail::interval_json(rec.positivity_domain);
  d["zeros"] = rec.zeros;
  if (rec.U) d["U"] = rec.U->str();
  const WarpedMetric& m = r.structure.metric;
  double ric = 0.0, lo = kInf, hi = -kInf;
  json table = json::array();
  for (int i = 0; i < samples; ++i) {
    double x = m.sample_box.lo + (m.sample_box.hi - m.sample_box.lo) * (i + 0.5) / samples;
    RicciEigenpair e = ricci_warped(m, x);
    for (double v : {e.radial, e.tangential}) {
      ric = std::max(ric, std::fabs(v));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    table.push_back({x, m.warp(x)});
  }
  json res = detail::structure_json(r.structure);
  res["warp_samples"] = table;
  d["result"] = res;
  d["ricci_max_abs"] = ric;
  d["einstein"] = hi - lo <= 1e-8 * std::max(1.0, std::fabs(hi));
  d["ricci_flat"] = ric <= 1e-8;
  return rep;
}

// ------------------------------------------------------------------ reparam

inline Report cmd_reparam(const Scene& sc, const std::string& u_text, const Common& c) {
  Report rep("reparam");
  Expr u;
  try {
    u = parse(u_text, {sc.structure.metric.coordinate});
  } catch (const Error& e) {
    throw SceneError("--u", e.what());
  }
  ReparamOptions ro;
  ro.isometry_samples = detail::samples_or(c, 20);
  ro.isometry_tol = kInf;
  Reparam rp = reparametrize(sc.structure.metric, RealFunction::from_expr(u, sc.structure.metric.coordinate), ro);
  rep.check("isometry", "reparametrization", rp.isometry_defect, detail::tol_or(c, 1e-7));
  json& d = rep.details();
  d["u"] = u.str();
  d["working"] = detail::interval_json(rp.working);
  d["new_interval"] = detail::interval_json(rp.metric.interval);
  d["zeros"] = rp.positivity.zeros;
  return rep;
}

// ------------------------------------------------------------------ construct-ft

struct ConstructOptions {
  std::optional<std::string> alpha;
  std::vector<int> signs{1, -1};
  double g_tol = 1e-7;
};

inline Report cmd_construct_ft(const Scene& sc, const Common& c, const ConstructOptions& o = {}) {
  Report rep("construct-ft");
  const WarpedMetric& h = sc.structure.metric;
  require(h.gauge == Gauge::h, Errc::invalid_argument, "construct-ft expects an h-gauge scene (coefficient kind Q)");
  RealFunction alpha;
  if (o.alpha) {
    try {
      alpha = RealFunction::from_expr(parse(*o.alpha, {"t"}));
    } catch (const Error& e) {
      throw SceneError("--alpha", e.what());
    }
  } else {
    const ScalarField& a = sc.structure.alpha;
    require(a.expr() && a.dependence() != Dependence::fiber && a.dependence() != Dependence::both,
            Errc::invalid_argument, "scene alpha must be an expression in t");
    alpha = RealFunction::from_expr(*a.expr());
  }
  const int samples = detail::samples_or(c, sc.sampling.count);
  const double tol = detail::tol_or(c, sc.sampling.tol);
  json branches = json::array();
  for (int sign : o.signs) {
    SolveOptions so;
    so.sign = sign;
    SolvedPotential sol = solve_f_from_alpha(h, alpha, so);
    std::string tag = sign > 0 ? "plus" : "minus";
    double worst = detail::residual_rows(rep, sol.structure, samples, tol, "constructed_" + tag);
    double gworst = detail::residual_rows(rep, from_h(sol.structure).result, samples, o.g_tol, "g_gauge_" + tag);
    json b = {{"sign", sign}, {"max_residual", worst}, {"max_residual_g", gworst}};
    if (sol.fp_squared) b["fp_squared"] = sol.fp_squared->str();
    branches.push_back(b);
  }
  if (h.kind != ChartKind::rectangular) {
    PolarReport pr = polar_extension_check(h, alpha);
    rep.flag("polar_extension", "smooth_at_pole", pr.pass);
    rep.details()["polar"] = pr.message;
  }
  rep.details()["branches"] = branches;
  return rep;
}

// ------------------------------------------------------------------ construct-fx

inline Report cmd_construct_fx(const std::string& case_id, int n, const Common& c) {
  Report rep("construct-fx");
  SixCaseId id;
  try {
    id = parse_six_case(case_id);
  } catch (const Error& e) {
    throw SceneError("--case", e.what());
  }
  const int samples = detail::samples_or(c, 100);
  const double tol = detail::tol_or(c, 1e-8);
  SixCase sc = six_case(id, n);
  RealFunction v = RealFunction::from_expr(sc.v);
  for (double t : gqe::detail::box_grid(sc.box, samples)) {
    Jet j = v.jet(t);
    double defect = std::fabs(j.d1 * j.d1 + sc.Q / (n - 1.0) * j.v * j.v - sc.P / (n - 2.0));
    rep.check("vpq_identity", "defect", defect, 1e-12, {t});
  }
  FiberData fd = default_fiber_data(id, n);
  rep.check("fiber_equation", "defect", fiber_defect(fd, n), 1e-10);
  GQEStructure s = six_case_structure(id, n, fd);
  double worst = detail::residual_rows(rep, s, samples, tol, "six_case");
  rep.details() = {{"case", to_string(id)},
                   {"n", n},
                   {"Q", sc.Q},
                   {"P", sc.P},
                   {"warp", sc.v.str()},
                   {"max_residual", worst}};
  return rep;
}

// ------------------------------------------------------------------ almost-soliton

inline Report cmd_almost_soliton(const Scene& sc, double k0, std::optional<double> t0, const Common& c) {
  Report rep("almost-soliton");
  AlmostSoliton a = almost_soliton_from_warped(sc.structure.metric, k0, t0);
  const int samples = detail::samples_or(c, sc.sampling.count);
  double worst = detail::residual_rows(rep, a.structure, samples, detail::tol_or(c, 1e-7), "almost_soliton");
  const Interval box = a.structure.metric.sample_box;
  Constancy l = constancy([&a](double t) { return a.lambda(t); }, box, samples, 1e-8);
  rep.details() = {{"max_residual", worst},
                   {"lambda_min", l.min},
                   {"lambda_max", l.max},
                   {"lambda_constant", l.constant}};
  return rep;
}

// ------------------------------------------------------------------ field-check

struct FieldCommand {
  std::string example;  // cosh, varying, varying-literal; empty: use the scene
  int n = 4;
  double mu = 0.0;
};

inline Report cmd_field_check(const std::optional<Scene>& sc, const FieldCommand& fc, const Common& c) {
  Report rep("field-check");
  const double tol = detail::tol_or(c, 1e-6);
  const int samples = detail::samples_or(c, 20);
  const std::uint64_t seed = detail::seed_or(c, 1);
  FieldCheckOptions fo;
  fo.samples = samples;
  fo.seed = seed;
  if (fc.example == "cosh") {
    CoshExample ex_ = example_cosh(fc.n, fc.mu);
    fo.potential = ex_.f;
    fo.dvf = 1.0;
    detail::field_rows(rep, ex_.structure.metric, ex_.field, fo, tol);
    detail::residual_rows(rep, ex_.structure, samples, 1e-8, "cosh_example");
  } else if (fc.example == "varying" || fc.example == "varying-literal") {
    VaryingFieldExample ex_ = varying_field_example(fc.example == "varying", fc.n);
    detail::field_rows(rep, ex_.metric, ex_.field, fo, tol);
  } else if (!fc.example.empty()) {
    throw SceneError("--example", "unknown example '" + fc.example + "' (cosh, varying, varying-literal)");
  } else {
    require(sc.has_value(), Errc::invalid_argument, "field-check needs a scene or --example");
    detail::field_rows(rep, sc->structure.metric, detail::scene_field(*sc), detail::field_options(*sc, samples, seed),
                       tol);
  }
  return rep;
}

// ------------------------------------------------------------------ sigma

struct SigmaCommand {
  std::optional<double> B;
  double C = 1.0;
  int branch = 0;
  bool literal_tanh = false;
  std::optional<std::string> shape;
  std::optional<double> A;
  double omega = 0.0;
  double sigma0 = 0.0, dsigma0 = 1.0, r0 = 1.0;
  double t0 = 0.0, t1 = 1.0, step = 1e-3;
  bool classify = false;
  int n = 4;
  std::optional<double> cpot;
  double mu = 0.0;
};

struct SigmaOutcome {
  Report report{"sigma"};
  std::optional<std::string> verdict;  // "complete" / "incomplete"
};

inline SigmaOutcome cmd_sigma(const SigmaCommand& sc, const Common& c) {
  SigmaOutcome out;
  Report& rep = out.report;
  json& d = rep.details();
  std::optional<SigmaSolution> closed;
  if (sc.B) closed = closed_form_sigma(*sc.B, sc.C, sc.branch, sc.literal_tanh);
  else if (sc.shape) closed = omega0_solution(parse_shape(*sc.shape));
  if (closed) {
    double res = sigma_ode_residual(*closed, detail::samples_or(c, 50));
    rep.check("sigma_ode", "separated_residual", res, detail::tol_or(c, 1e-9));
    d["sigma"] = closed->sigma.str();
    d["domain"] = detail::interval_json(closed->domain);
    if (sc.classify) {
      require(sc.cpot.has_value(), Errc::invalid_argument, "--classify-completeness needs --cpot");
      CompletenessReport cr = completeness_classify(*closed, sc.n, *sc.cpot);
      rep.flag("completeness", "numeric_agrees_with_criterion", cr.agree);
      rep.flag("completeness", "conclusive", cr.conclusive);
      out.verdict = cr.complete ? "complete" : "incomplete";
      d["completeness"] = {{"verdict", *out.verdict},
                           {"criterion", cr.criterion},
                           {"lower_end", to_string(cr.lower.numeric)},
                           {"upper_end", to_string(cr.upper.numeric)}};
    }
    return out;
  }
  require(sc.A.has_value(), Errc::invalid_argument, "sigma needs --B, --shape or --A");
  require(!sc.classify, Errc::invalid_argument, "completeness needs a closed-form family (--B or --shape)");
  IntegrateOptions io{sc.t0, sc.t1, sc.step};
  SigmaSolution s = integrate_sigma(*sc.A, sc.omega, sc.sigma0, sc.dsigma0, sc.r0, io);
  const int samples = detail::samples_or(c, 20);
  const double tol = detail::tol_or(c, 1e-6);
  const std::size_t N = s.t.size();
  for (int i = 0; i < samples; ++i) {
    std::size_t k = std::min(N - 1, static_cast<std::size_t>((i + 1) * (N - 1) / samples));
    rep.check("conserved_K", "drift", std::fabs(s.k_along[k] - s.k_along.front()), tol, {s.t[k]});
  }
  io.step = sc.step / 2;
  SigmaSolution half = integrate_sigma(*sc.A, sc.omega, sc.sigma0, sc.dsigma0, sc.r0, io);
  const double a = s.max_K_drift(), b = half.max_K_drift();
  if (a > 1e-12) rep.at_least("conserved_K", "halving_ratio", a / b, 11.2);
  else rep.check("conserved_K", "drift_at_roundoff", a, 1e-12);
  d["K"] = s.K;
  d["max_drift"] = a;
  d["max_drift_half_step"] = b;
  if (sc.cpot) {
    AlphaResult ar = alpha_from_field(s.K, *sc.A, sc.omega, *sc.cpot, sc.n, sc.mu);
    rep.check("field_alpha", "potential_equation", sigma_f_residual(s, ar.alpha, *sc.cpot, sc.n, sc.mu), 1e-6);
    d["alpha"] = ar.alpha;
    d["conformally_einstein"] = ar.conformally_einstein;
  }
  return out;
}

// ------------------------------------------------------------------ soliton

struct SolitonCommand {
  std::string kind;  // product, gaussian, bryant
  int n = 4;
  double lambda1 = 0.0, a = 1.0, b = 0.0, C = 1.0;
  double s_max = 50.0, step = 1e-3, tail_tol = 0.05;
};

inline void soliton_change_rows(Report& rep, const SolitonChange& r, int samples) {
  rep.check("hamilton_identity", "drift", hamilton_identity_drift(r.g1).drift, 1e-10);
  detail::residual_rows(rep, r.g1, samples, 1e-10, "soliton");
  rep.flag("conformal_factor", "u_positive_on_box", r.change.has_value());
  if (!r.change) return;
  detail::residual_rows(rep, r.change->structure, samples, 1e-7, "changed");
  if (r.constancy_skipped) {
    rep.details()["lambda2"] = "f constant: Einstein case, constancy not tested";
  } else {
    rep.at_least("lambda2_nonconstancy", "relative_variation", r.lambda2.relative, kNonconstancyThreshold);
    rep.details()["lambda2"] = {{"min", r.lambda2.min}, {"max", r.lambda2.max}, {"relative", r.lambda2.relative}};
  }
}

inline Report cmd_soliton(const SolitonCommand& so, const Common& c) {
  Report rep("soliton");
  const int samples = detail::samples_or(c, 60);
  if (so.kind == "product") {
    soliton_change_rows(rep, product_soliton(so.n, so.lambda1, so.a, so.b, so.C), samples);
  } else if (so.kind == "gaussian") {
    soliton_change_rows(rep, gaussian_soliton(so.n, so.lambda1, so.C), samples);
    rep.details()["lambda2_at_origin"] = gaussian_lambda2_at_origin(so.n, so.lambda1, so.C);
  } else if (so.kind == "bryant") {
    BryantOptions bo;
    bo.step = so.step;
    bo.tail_tol = so.tail_tol;
    SolitonProfile p = bryant_integrate(so.n, so.s_max, bo);
    BryantChecks ch = bryant_checks(p);
    rep.check("hamilton_identity", "invariant_drift", ch.invariant_drift, 1e-5);
    rep.check("bryant_asymptotics", "fp_end_gap", std::fabs(ch.fp_end + std::sqrt(p.c)), so.tail_tol);
    GQEStructure s = p.structure();
    detail::residual_rows(rep, s, detail::samples_or(c, 200), detail::tol_or(c, 1e-5), "bryant");
    rep.at_least("sectional_curvature", "radial_min", ch.min_radial, 0.0).pass = ch.min_radial > 0.0;
    rep.at_least("sectional_curvature", "tangential_min", ch.min_tangential, 0.0).pass = ch.min_tangential > 0.0;
    BryantLambda2 l2 = bryant_conformal_lambda2(p, so.C);
    rep.at_least("lambda2_nonconstancy", "relative_variation", l2.constancy.relative, 1e-1);
    rep.check("lambda2_limits", "origin_relative_gap",
              std::fabs(l2.limit_origin - l2.limit_expected) / std::fabs(l2.limit_expected), 0.1);
    rep.flag("lambda2_limits", "negative_decreasing_tail", l2.decreasing_tail);
    rep.details() = {{"c", p.c},
                     {"fp_end", ch.fp_end},
                     {"w_ratio", {ch.w_ratio_lo, ch.w_ratio_hi}},
                     {"lambda2_origin", l2.limit_origin},
                     {"lambda2_origin_expected", l2.limit_expected},
                     {"lambda2_tail_ratio", l2.tail_ratio},
                     {"lambda2_tail_expected", l2.tail_expected}};
  } else {
    throw SceneError("soliton", "unknown soliton '" + so.kind + "' (product, gaussian, bryant)");
  }
  return rep;
}

// ------------------------------------------------------------------ report

inline Report cmd_report(const std::vector<std::string>& files) {
  Report rep("report");
  struct Agg {
    std::size_t rows = 0, failures = 0;
    double worst = 0.0;
  };
  std::map<std::string, Agg> by_check;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw SceneError(f, "cannot open report");
    std::vector<Row> rows;
    try {
      rows = read_csv(in, f);
    } catch (const Error& e) {
      throw SceneError(f, e.what());
    }
    for (const auto& r : rows) {
      Agg& a = by_check[r.check_id];
      ++a.rows;
      a.failures += !r.pass;
      if (std::isfinite(r.value)) a.worst = std::max(a.worst, r.value);
    }
  }
  json table = json::object();
  for (const auto& [id, a] : by_check) {
    auto colon = id.find(':');
    rep.add(id.substr(0, colon), "failures_in_" + id.substr(colon == std::string::npos ? 0 : colon + 1),
            static_cast<double>(a.failures), 0.0, a.failures == 0);
    table[id] = {{"rows", a.rows}, {"failures", a.failures}, {"max_value", a.worst}};
  }
  rep.details()["checks"] = table;
  rep.details()["files"] = files;
  return rep;
}

// ------------------------------------------------------------------ command line

inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const SceneError*>(&e)) return 2;
  switch (e.code()) {
    case Errc::syntax:
    case Errc::unknown_identifier:
    case Errc::unbound_variable:
    case Errc::invalid_argument:
      return 2;
    default:
      return 1;
  }
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Checks for generalized quasi-Einstein structures, their conformal changes and solitons", "gqe"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--samples", common.samples, "sample count");
    sub->add_option("--tol", common.tol, "tolerance");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--out", common.out, "output file (.json for a JSON report, CSV otherwise)");
  };

  std::string scene_path;
  auto* verify = app.add_subcommand("verify", "residuals of a scene's structure, reduced and by finite differences");
  VerifyOptions vo;
  verify->add_option("scene", scene_path, "scene file")->required();
  verify->add_option("--oracle-samples", vo.oracle_samples, "finite-difference sample count");
  verify->add_option("--oracle-tol", vo.oracle_tol, "finite-difference tolerance");
  add_common(verify);

  auto* conformal = app.add_subcommand("conformal", "conformal change by the concircular factor u = c + U");
  double cval = 1.0;
  conformal->add_option("scene", scene_path, "scene file")->required();
  conformal->add_option("--c,-C", cval, "additive constant of u")->required();
  add_common(conformal);

  auto* reparam = app.add_subcommand("reparam", "reparametrize u^{-2} h as dr^2 + (v/u)^2 g_N");
  std::string u_text;
  reparam->add_option("scene", scene_path, "scene file")->required();
  reparam->add_option("--u", u_text, "conformal factor u(t)")->required();
  add_common(reparam);

  auto* cft = app.add_subcommand("construct-ft", "potential f(t) from alpha(t) on a warped h metric");
  ConstructOptions co;
  std::optional<int> sign;
  cft->add_option("scene", scene_path, "scene file")->required();
  cft->add_option("--alpha", co.alpha, "alpha(t); defaults to the scene's alpha");
  cft->add_option("--sign", sign, "branch sign (+1 or -1); both by default");
  cft->add_option("--g-tol", co.g_tol, "tolerance in the g gauge");
  add_common(cft);

  auto* cfx = app.add_subcommand("construct-fx", "fiber-potential structures, one per case");
  std::string case_id;
  int fx_n = 4;
  cfx->add_option("--case", case_id, "case id: 1a 1b 1c 2a 2b 3a")->required();
  cfx->add_option("--n", fx_n, "dimension");
  add_common(cfx);

  auto* almost = app.add_subcommand("almost-soliton", "Ricci almost soliton on a warped g metric");
  double k0 = 0.0;
  std::optional<double> t0;
  almost->add_option("scene", scene_path, "scene file")->required();
  almost->add_option("--k0", k0, "value of f'/v at t0");
  almost->add_option("--t0", t0, "anchor point");
  add_common(almost);

  auto* field = app.add_subcommand("field-check", "conformal vector field conditions");
  FieldCommand fc;
  field->add_option("scene", scene_path, "scene file with a 'field' entry");
  field->add_option("--example", fc.example, "built-in example: cosh, varying, varying-literal");
  field->add_option("--n", fc.n, "dimension for built-in examples");
  field->add_option("--mu", fc.mu, "fiber Einstein constant for the cosh example");
  add_common(field);

  auto* sigma = app.add_subcommand("sigma", "expansion factor families: solve, check, classify completeness");
  SigmaCommand sc;
  sigma->add_option("--B", sc.B, "constant B of the omega = 1 closed forms");
  sigma->add_option("--C", sc.C, "scale C of the closed forms");
  sigma->add_option("--branch", sc.branch, "domain branch");
  sigma->add_flag("--literal-tanh", sc.literal_tanh, "B < 0: the tanh form instead of coth");
  sigma->add_option("--shape", sc.shape, "omega = 0 family: cos, sin, exp, sinh, cosh");
  sigma->add_option("--A", sc.A, "A for numeric integration");
  sigma->add_option("--omega", sc.omega, "omega for numeric integration");
  sigma->add_option("--sigma0", sc.sigma0, "initial sigma");
  sigma->add_option("--dsigma0", sc.dsigma0, "initial sigma'");
  sigma->add_option("--r0", sc.r0, "initial r");
  sigma->add_option("--t0", sc.t0, "start of the t range");
  sigma->add_option("--t1", sc.t1, "end of the t range");
  sigma->add_option("--step", sc.step, "RK4 step");
  sigma->add_flag("--classify-completeness", sc.classify, "classify completeness of the metric");
  sigma->add_option("--n", sc.n, "dimension");
  sigma->add_option("--cpot", sc.cpot, "constant c = D_V f");
  sigma->add_option("--mu", sc.mu, "fiber Einstein constant");
  add_common(sigma);

  auto* soliton = app.add_subcommand("soliton", "gradient Ricci soliton examples and their conformal changes");
  SolitonCommand so;
  soliton->add_option("kind", so.kind, "product, gaussian or bryant")->required();
  soliton->add_option("--n", so.n, "dimension");
  soliton->add_option("--lambda1", so.lambda1, "soliton constant");
  soliton->add_option("--a", so.a, "product: f = a s + b");
  soliton->add_option("--b", so.b, "product: f = a s + b");
  soliton->add_option("--C", so.C, "additive constant of u");
  soliton->add_option("--s-max", so.s_max, "bryant: integration range");
  soliton->add_option("--step", so.step, "bryant: RK4 node step");
  soliton->add_option("--tail-tol", so.tail_tol, "bryant: tolerance on f'(s_max) + sqrt(c)");
  add_common(soliton);

  auto* report = app.add_subcommand("report", "summarize CSV reports per check");
  std::vector<std::string> files;
  report->add_option("files", files, "CSV reports")->required();
  add_common(report);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Report rep("");
    std::optional<std::string> verdict;
    if (verify->parsed()) {
      rep = cmd_verify(load_scene(scene_path), common, vo);
    } else if (conformal->parsed()) {
      rep = cmd_conformal(load_scene(scene_path), cval, common);
    } else if (reparam->parsed()) {
      rep = cmd_reparam(load_scene(scene_path), u_text, common);
    } else if (cft->parsed()) {
      if (sign) {
        if (*sign != 1 && *sign != -1) throw SceneError("--sign", "must be +1 or -1");
        co.signs = {*sign};
      }
      rep = cmd_construct_ft(load_scene(scene_path), common, co);
    } else if (cfx->parsed()) {
      rep = cmd_construct_fx(case_id, fx_n, common);
    } else if (almost->parsed()) {
      rep = cmd_almost_soliton(load_scene(scene_path), k0, t0, common);
    } else if (field->parsed()) {
      std::optional<Scene> scene;
      if (!scene_path.empty()) scene = load_scene(scene_path);
      rep = cmd_field_check(scene, fc, common);
    } else if (sigma->parsed()) {
      SigmaOutcome o = cmd_sigma(sc, common);
      rep = std::move(o.report);
      verdict = o.verdict;
    } else if (soliton->parsed()) {
      rep = cmd_soliton(so, common);
    } else if (report->parsed()) {
      rep = cmd_report(files);
    }
    if (verdict) {
      out << *verdict << '\n';
      if (!common.out.empty()) rep.write(common.out, out);
    } else {
      rep.write(common.out, out);
    }
    if (!rep.pass()) {
      for (const auto& r : rep.rows())
        if (!r.pass) {
          err << "FAIL " << r.check_id << " value " << fmt(r.value) << " tolerance " << fmt(r.tolerance) << '\n';
          break;
        }
      err << rep.failures() << " of " << rep.rows().size() << " checks failed\n";
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gqe::cli
