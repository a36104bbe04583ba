#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gqe/cli/commands.hpp"

using namespace gqe;
using namespace gqe::cli;
namespace fs = std::filesystem;

namespace {

const std::string kScenes = std::string(GQE_SOURCE_DIR) + "/scenes/";

struct Outcome {
  int code;
  std::string out, err;
};

Outcome gqe_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("gqe_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string gaussian_text(double lambda) {
  std::ostringstream s;
  s << R"({"schema": 1, "dim": 4, "chart": "polar_left", "interval": [0, "inf"], "sample_box": [0.1, 4],
           "warp": "t", "fiber": {"type": "einstein", "mu": 2},
           "potential": {"type": "base", "expr": "0.35*t^2"}, "alpha": 0,
           "coefficient": {"kind": "lambda", "value": )"
    << lambda << "}}";
  return s.str();
}

}  // namespace

TEST(Scene, ShippedScenesVerify) {
  int count = 0;
  for (const auto& e : fs::directory_iterator(kScenes)) {
    if (e.path().extension() != ".json") continue;
    ++count;
    Scene sc = load_scene(e.path().string());
    EXPECT_EQ(sc.schema, kSceneSchema);
    if (e.path().filename() == "exp_h.json") continue;  // metric and alpha only: construct-ft input
    auto o = gqe_run({"verify", e.path().string(), "--out", (scratch() / "v.csv").string()});
    EXPECT_EQ(o.code, 0) << e.path() << "\n" << o.err;
  }
  EXPECT_GE(count, 5);
}

TEST(Scene, Diagnostics) {
  try {
    parse_scene("{\n \"schema\": 1,\n \"dim\" 4\n}", "s.json");
    FAIL();
  } catch (const SceneError& e) {
    EXPECT_EQ(e.where(), "s.json:3");
  }
  auto field_error = [](const std::string& text) {
    try {
      parse_scene(text, "s.json");
    } catch (const SceneError& e) {
      return e.where();
    }
    return std::string("no error");
  };
  std::string base = gaussian_text(0.7);
  EXPECT_EQ(field_error(R"({"schema": 1})"), "s.json: field 'dim'");
  json j = json::parse(base);
  j["warp"] = "t +* 2";
  EXPECT_EQ(field_error(j.dump()), "s.json: field 'warp'");
  j = json::parse(base);
  j["fiber"].erase("mu");
  EXPECT_EQ(field_error(j.dump()), "s.json: field 'fiber.mu'");
  j = json::parse(base);
  j["schema"] = 7;
  EXPECT_EQ(field_error(j.dump()), "s.json: field 'schema'");
  j = json::parse(base);
  j["gauge"] = "h";
  EXPECT_EQ(field_error(j.dump()), "s.json: field 'gauge'");
  j = json::parse(base);
  j["potential"]["expr"] = "0.35*s^2";
  EXPECT_EQ(field_error(j.dump()), "s.json: field 'potential.expr'");
  j = json::parse(base);
  j["sampling"] = {{"count", 0}};
  EXPECT_EQ(field_error(j.dump()), "s.json: field 'sampling.count'");
  EXPECT_EQ(field_error(base), "no error");
}

TEST(Cli, VerifyExitCodesAndAnchors) {
  fs::path good = scratch() / "good.json", bad = scratch() / "bad.json";
  std::ofstream(good) << gaussian_text(0.7);
  std::ofstream(bad) << gaussian_text(0.6);
  auto o = gqe_run({"verify", good.string(), "--samples", "40", "--tol", "1e-10"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out.rfind("coord1,coord2,check_id,value,tolerance,pass\n", 0), 0u);
  fs::path csv = scratch() / "bad.csv";
  o = gqe_run({"verify", bad.string(), "--samples", "40", "--out", csv.string()});
  EXPECT_EQ(o.code, 1);
  std::ifstream in(csv);
  auto rows = read_csv(in, "bad.csv");
  ASSERT_EQ(rows.size(), 60u);  // 40 reduced + 20 oracle
  for (const auto& r : rows) {
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.check_id.rfind("gqe_equation:", 0), 0u);
  }
  EXPECT_NE(o.err.find("FAIL gqe_equation:reduced"), std::string::npos);
}

TEST(Cli, Deterministic) {
  fs::path a = scratch() / "a.csv", b = scratch() / "b.csv", c = scratch() / "c.csv";
  const std::string scene = kScenes + "six_case_2b.json";
  ::setenv("GQE_THREADS", "1", 1);
  ASSERT_EQ(gqe_run({"verify", scene, "--seed", "11", "--out", a.string()}).code, 0);
  ::setenv("GQE_THREADS", "8", 1);
  ASSERT_EQ(gqe_run({"verify", scene, "--seed", "11", "--out", b.string()}).code, 0);
  ASSERT_EQ(gqe_run({"verify", scene, "--seed", "12", "--out", c.string()}).code, 0);
  ::unsetenv("GQE_THREADS");
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));  // oracle points move with the seed
}

TEST(Cli, ConformalSphereFamily) {
  const std::string scene = kScenes + "sphere.json";
  fs::path out = scratch() / "flat.json";
  auto o = gqe_run({"conformal", scene, "--c", "1.0", "--out", out.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  json d = read_json(out)["details"];
  EXPECT_TRUE(d["ricci_flat"].get<bool>());
  EXPECT_NEAR(d["Q2"]["mean"].get<double>(), 0.0, 1e-10);
  for (double c : {2.0, 0.5}) {
    o = gqe_run({"conformal", scene, "--c", std::to_string(c), "--out", out.string()});
    ASSERT_EQ(o.code, 0) << o.err;
    d = read_json(out)["details"];
    EXPECT_FALSE(d["ricci_flat"].get<bool>());
    EXPECT_TRUE(d["einstein"].get<bool>());
    EXPECT_NEAR(d["Q2"]["mean"].get<double>(), 3.0 * (c * c - 1.0), 1e-10);
  }
}

TEST(Cli, ConstructionsPass) {
  EXPECT_EQ(gqe_run({"construct-ft", kScenes + "exp_h.json"}).code, 0);
  for (const char* id : {"1a", "1b", "1c", "2a", "2b", "3a"})
    EXPECT_EQ(gqe_run({"construct-fx", "--case", id, "--n", "4"}).code, 0) << id;
  EXPECT_EQ(gqe_run({"construct-fx", "--case", "4z"}).code, 2);
  EXPECT_EQ(gqe_run({"almost-soliton", kScenes + "hyperbolic_cosh.json", "--k0", "0.5"}).code, 0);
  EXPECT_EQ(gqe_run({"reparam", kScenes + "sphere.json", "--u", "2 - cos(t)"}).code, 0);
}

TEST(Cli, Sigma) {
  auto o = gqe_run({"sigma", "--B", "0.25", "--C", "1", "--classify-completeness", "--n", "4", "--cpot", "1"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "complete\n");
  o = gqe_run({"sigma", "--B", "0", "--C", "1", "--classify-completeness", "--n", "4", "--cpot", "1"});
  EXPECT_EQ(o.out, "incomplete\n");
  o = gqe_run({"sigma", "--B", "-0.25", "--literal-tanh"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("sigma_ode:separated_residual"), std::string::npos);
  o = gqe_run({"sigma", "--A", "1.3", "--omega", "0.7", "--sigma0", "0.2", "--dsigma0", "0.9", "--r0", "0.5", "--t1",
               "2", "--step", "0.01"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("conserved_K:halving_ratio"), std::string::npos);
  EXPECT_EQ(gqe_run({"sigma", "--classify-completeness"}).code, 2);
}

TEST(Cli, FieldCheck) {
  EXPECT_EQ(gqe_run({"field-check", kScenes + "cosh_field.json"}).code, 0);
  EXPECT_EQ(gqe_run({"field-check", "--example", "varying"}).code, 0);
  auto o = gqe_run({"field-check", "--example", "varying-literal"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.out.find("field_mixed_gradient:dVt_dt_plus_grad_v0"), std::string::npos);
  EXPECT_NE(o.out.find(",false\n"), std::string::npos);
  EXPECT_EQ(gqe_run({"field-check", kScenes + "gaussian.json"}).code, 2);  // no field entry
}

TEST(Cli, Solitons) {
  auto o = gqe_run({"soliton", "gaussian", "--lambda1", "1", "--C", "0.5"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("u vanishes at s = 1.177"), std::string::npos);
  EXPECT_EQ(gqe_run({"soliton", "gaussian", "--lambda1", "1", "--C", "2"}).code, 0);
  EXPECT_EQ(gqe_run({"soliton", "product", "--lambda1", "0", "--a", "1", "--C", "-0.5"}).code, 0);
  EXPECT_EQ(gqe_run({"soliton", "bryant", "--s-max", "50"}).code, 0);
  EXPECT_EQ(gqe_run({"soliton", "torus"}).code, 2);
}

TEST(Cli, ReportAggregates) {
  fs::path a = scratch() / "ra.csv", b = scratch() / "rb.csv", bad = scratch() / "rbad.json";
  std::ofstream(bad) << gaussian_text(0.6);
  ASSERT_EQ(gqe_run({"verify", kScenes + "gaussian.json", "--samples", "10", "--out", a.string()}).code, 0);
  ASSERT_EQ(gqe_run({"verify", bad.string(), "--samples", "10", "--out", b.string()}).code, 1);
  fs::path sum = scratch() / "sum.json";
  auto o = gqe_run({"report", a.string(), b.string(), "--out", sum.string()});
  EXPECT_EQ(o.code, 1);
  json j = read_json(sum);
  EXPECT_EQ(j["details"]["checks"]["gqe_equation:reduced"]["rows"].get<int>(), 20);
  EXPECT_EQ(j["details"]["checks"]["gqe_equation:reduced"]["failures"].get<int>(), 10);
  EXPECT_EQ(gqe_run({"report", a.string()}).code, 0);
  EXPECT_EQ(gqe_run({"report", (scratch() / "missing.csv").string()}).code, 2);
}

TEST(Cli, InputErrors) {
  EXPECT_EQ(gqe_run({}).code, 2);
  EXPECT_EQ(gqe_run({"frobnicate"}).code, 2);
  EXPECT_EQ(gqe_run({"verify", (scratch() / "nope.json").string()}).code, 2);
  EXPECT_EQ(gqe_run({"verify", kScenes + "gaussian.json", "--samples", "ten"}).code, 2);
  EXPECT_EQ(gqe_run({"--help"}).code, 0);
}

TEST(Report, CsvRoundTrip) {
  Report rep("t");
  rep.check("a", "x", 1e-12, 1e-10, {0.5, -0.25});
  rep.check("a", "y", std::nan(""), 1.0, {0.1});
  rep.at_least("b", "z", 3.0, 2.0);
  std::stringstream ss;
  rep.write_csv(ss);
  auto rows = read_csv(ss, "mem");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].coords.size(), 2u);
  EXPECT_EQ(rows[0].value, 1e-12);
  EXPECT_TRUE(rows[0].pass);
  EXPECT_TRUE(std::isnan(rows[1].value));
  EXPECT_FALSE(rows[1].pass);
  EXPECT_EQ(rows[2].check_id, "b:z");
  EXPECT_TRUE(rows[2].pass);
  EXPECT_EQ(rep.failures(), 1u);
}
