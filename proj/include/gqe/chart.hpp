#pragma once

// Explicit coordinate charts: metric components as functions of chart coordinates.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gqe/error.hpp"
#include "gqe/expr.hpp"

namespace gqe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Which reduced block a chart coordinate belongs to.
enum class Block { radial, fiber_y, fiber_rest, other };

struct ExplicitChart {
  int dim = 0;
  std::vector<std::string> coords;
  std::function<void(const double*, Matrix&)> metric;  // fills the dim x dim metric
  std::vector<double> lo, hi;                           // sample box
  std::vector<Block> blocks;
  std::vector<std::string> component_text;             // diagonal entries, for display

  Matrix metric_at(const std::vector<double>& p) const {
    Matrix g(dim, dim);
    metric(p.data(), g);
    return g;
  }

  // Chart with every metric component given by an expression over the coordinate names;
  // entries missing from `components` are zero.
  static ExplicitChart from_exprs(const std::vector<std::string>& names,
                                  const std::vector<std::vector<std::string>>& components,
                                  std::vector<double> lo, std::vector<double> hi) {
    const int d = static_cast<int>(names.size());
    require(static_cast<int>(components.size()) == d, Errc::invalid_argument, "metric needs one row per coordinate");
    auto progs = std::make_shared<std::vector<std::pair<std::pair<int, int>, Program>>>();
    ExplicitChart c;
    for (int i = 0; i < d; ++i) {
      require(static_cast<int>(components[i].size()) == d, Errc::invalid_argument, "metric rows must be square");
      for (int j = i; j < d; ++j) {
        const std::string& s = components[i][j];
        if (s.empty()) continue;
        Expr e = parse(s, names);  // upper triangle is authoritative
        if (e.is_constant(0.0)) continue;
        progs->push_back({{i, j}, Program(e, names)});
      }
      c.component_text.push_back(components[i][i]);
    }
    c.dim = d;
    c.coords = names;
    c.metric = [progs, d](const double* p, Matrix& g) {
      g.setZero(d, d);
      for (const auto& [ij, prog] : *progs) {
        double v = prog(std::span<const double>(p, d));
        g(ij.first, ij.second) = v;
        g(ij.second, ij.first) = v;
      }
    };
    c.lo = std::move(lo);
    c.hi = std::move(hi);
    c.blocks.assign(d, Block::other);
    return c;
  }
};

// Diagonal chart built from component callables.
inline ExplicitChart diagonal_chart(std::vector<std::string> names,
                                    std::vector<std::function<double(const double*)>> comps,
                                    std::vector<double> lo, std::vector<double> hi, std::vector<Block> blocks,
                                    std::vector<std::string> text = {}) {
  ExplicitChart c;
  c.dim = static_cast<int>(names.size());
  c.coords = std::move(names);
  auto shared = std::make_shared<std::vector<std::function<double(const double*)>>>(std::move(comps));
  const int d = c.dim;
  c.metric = [shared, d](const double* p, Matrix& g) {
    g.setZero(d, d);
    for (int i = 0; i < d; ++i) g(i, i) = (*shared)[i](p);
  };
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  c.blocks = std::move(blocks);
  c.component_text = std::move(text);
  return c;
}

// Multiplies the chart metric by exp(2 phi(p)).
inline ExplicitChart conformal_chart(const ExplicitChart& base, std::function<double(const double*)> phi) {
  ExplicitChart c = base;
  auto m = base.metric;
  c.metric = [m, phi](const double* p, Matrix& g) {
    m(p, g);
    g *= std::exp(2.0 * phi(p));
  };
  return c;
}

// Unit round sphere S^k in iterated polar angles: diag(1, sin^2 th1, sin^2 th1 sin^2 th2, ...).
// Returns the factor multiplying dth_i^2 for the angle coordinates starting at `offset`.
inline double unit_sphere_factor(const double* p, int offset, int i) {
  double f = 1.0;
  for (int j = 0; j < i; ++j) {
    double s = std::sin(p[offset + j]);
    f *= s * s;
  }
  return f;
}

inline double sn_k(double k, double r) {
  if (k > 0) return std::sin(std::sqrt(k) * r) / std::sqrt(k);
  if (k < 0) return std::sinh(std::sqrt(-k) * r) / std::sqrt(-k);
  return r;
}

// Model space of dimension d with Einstein constant mu (sectional curvature mu/(d-1)).
// Writes component callables for coordinates starting at `offset` of the full chart and
// returns their names and sample box.
struct ModelPiece {
  std::vector<std::string> names;
  std::vector<std::function<double(const double*)>> comps;  // factor relative to the enclosing scale
  std::vector<double> lo, hi;
  std::vector<std::string> text;
};

inline ModelPiece model_space(int d, double mu, int offset, const std::string& prefix) {
  ModelPiece m;
  require(d >= 1, Errc::invalid_argument, "model space dimension must be >= 1");
  if (d == 1) {
    require(mu == 0.0, Errc::invalid_argument, "a one-dimensional fiber has Einstein constant 0");
    m.names = {prefix + "phi"};
    m.comps = {[](const double*) { return 1.0; }};
    m.lo = {-1.0};
    m.hi = {1.0};
    m.text = {"1"};
    return m;
  }
  double k = mu / (d - 1);
  if (k == 0.0) {
    for (int i = 0; i < d; ++i) {
      m.names.push_back(prefix + "x" + std::to_string(i + 1));
      m.comps.push_back([](const double*) { return 1.0; });
      m.lo.push_back(-1.0);
      m.hi.push_back(1.0);
      m.text.push_back("1");
    }
    return m;
  }
  m.names.push_back(prefix + "rho");
  m.comps.push_back([](const double*) { return 1.0; });
  m.lo.push_back(0.4);
  m.hi.push_back(k > 0 ? std::min(1.1, 0.8 * M_PI / std::sqrt(k)) : 1.1);
  m.text.push_back("1");
  const int ro = offset;
  for (int i = 0; i < d - 1; ++i) {
    bool last = i == d - 2;
    m.names.push_back(prefix + (last ? std::string("phi") : "th" + std::to_string(i + 1)));
    m.comps.push_back([k, ro, i](const double* p) {
      double s = sn_k(k, p[ro]);
      return s * s * unit_sphere_factor(p, ro + 1, i);
    });
    m.lo.push_back(last ? -1.0 : 0.6);
    m.hi.push_back(last ? 1.0 : 2.5);
    m.text.push_back("sn(rho)^2*sphere" + std::to_string(i));
  }
  return m;
}

}  // namespace gqe
