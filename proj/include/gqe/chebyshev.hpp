#pragma once

// Adaptive piecewise Chebyshev interpolation on a closed interval.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "gqe/error.hpp"

namespace gqe {

struct ChebyshevOptions {
  int degree = 24;
  double tol = 1e-14;       // relative to the function scale
  int max_panels = 4096;
  double min_width = 1e-9;  // relative to the interval width
};

class PiecewiseChebyshev {
 public:
  PiecewiseChebyshev() = default;

  static PiecewiseChebyshev fit(const std::function<double(double)>& f, double lo, double hi,
                                ChebyshevOptions opt = {}) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, Errc::invalid_argument,
            "chebyshev fit needs a finite nonempty interval");
    PiecewiseChebyshev p;
    p.converged_ = true;
    const int m = opt.degree;
    // coarse scale estimate
    double scale = 0.0;
    for (int j = 0; j <= 64; ++j) {
      double x = lo + (hi - lo) * j / 64.0;
      scale = std::max(scale, std::fabs(f(x)));
    }
    std::vector<double> nodes_cos(m + 1);
    for (int j = 0; j <= m; ++j) nodes_cos[j] = std::cos(std::numbers::pi * j / m);

    struct Item { double a, b; };
    std::vector<Item> stack{{lo, hi}};
    std::vector<std::pair<double, std::vector<double>>> panels;
    const double min_w = opt.min_width * (hi - lo);
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      std::vector<double> vals(m + 1);
      for (int j = 0; j <= m; ++j) vals[j] = f(0.5 * (it.a + it.b) + 0.5 * (it.b - it.a) * nodes_cos[j]);
      std::vector<double> c = coefficients(vals);
      double cmax = 0.0;
      for (double ck : c) cmax = std::max(cmax, std::fabs(ck));
      scale = std::max(scale, cmax);
      double tail = std::max(std::fabs(c[m]), std::fabs(c[m - 1]));
      bool ok = tail <= opt.tol * scale;
      bool too_small = (it.b - it.a) < 2.0 * min_w ||
                       static_cast<int>(panels.size() + stack.size()) >= opt.max_panels;
      if (ok || too_small) {
        if (!ok) p.converged_ = false;
        panels.emplace_back(it.a, std::move(c));
      } else {
        double mid = 0.5 * (it.a + it.b);
        stack.push_back({mid, it.b});  // left half is processed first
        stack.push_back({it.a, mid});
      }
    }
    p.breaks_.push_back(lo);
    for (std::size_t i = 0; i < panels.size(); ++i) {
      p.coeffs_.push_back(std::move(panels[i].second));
      p.breaks_.push_back(i + 1 < panels.size() ? panels[i + 1].first : hi);
    }
    return p;
  }

  bool converged() const { return converged_; }
  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }
  std::size_t panels() const { return coeffs_.size(); }
  bool valid() const { return !coeffs_.empty(); }

  void add_constant(double c) {
    for (auto& C : coeffs_) C[0] += c;
  }

  double operator()(double x) const {
    std::size_t i = panel_of(x);
    double a = breaks_[i], b = breaks_[i + 1];
    double xi = (2.0 * x - a - b) / (b - a);
    return clenshaw(coeffs_[i], xi);
  }

  PiecewiseChebyshev derivative() const {
    PiecewiseChebyshev d;
    d.breaks_ = breaks_;
    d.converged_ = converged_;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const auto& c = coeffs_[i];
      const int n = static_cast<int>(c.size()) - 1;
      std::vector<double> dc(std::max(n, 1), 0.0);
      if (n >= 1) {
        std::vector<double> t(n + 2, 0.0);
        for (int k = n; k >= 1; --k) t[k - 1] = t[k + 1] + 2.0 * k * c[k];
        for (int k = 0; k < n; ++k) dc[k] = t[k];
        dc[0] *= 0.5;
      }
      double s = 2.0 / (breaks_[i + 1] - breaks_[i]);
      for (double& v : dc) v *= s;
      d.coeffs_.push_back(std::move(dc));
    }
    return d;
  }

  // Antiderivative vanishing at `anchor`.
  PiecewiseChebyshev antiderivative(double anchor) const {
    PiecewiseChebyshev r;
    r.breaks_ = breaks_;
    r.converged_ = converged_;
    double offset = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const auto& c = coeffs_[i];
      const int n = static_cast<int>(c.size()) - 1;
      std::vector<double> C(n + 2, 0.0);
      auto cc = [&](int k) { return k <= n ? c[k] : 0.0; };
      C[1] = cc(0) - 0.5 * cc(2);
      for (int k = 2; k <= n + 1; ++k) C[k] = (cc(k - 1) - cc(k + 1)) / (2.0 * k);
      double h = 0.5 * (breaks_[i + 1] - breaks_[i]);
      for (double& v : C) v *= h;
      // value at xi = -1 must equal the running offset
      double at_left = 0.0;
      for (int k = 1; k <= n + 1; ++k) at_left += (k % 2 ? -C[k] : C[k]);
      C[0] = offset - at_left;
      double at_right = 0.0;
      for (double v : C) at_right += v;
      offset = at_right;
      r.coeffs_.push_back(std::move(C));
    }
    double shift = r(anchor);
    for (auto& C : r.coeffs_) C[0] -= shift;
    return r;
  }

  // Inverse of a strictly monotone map F on [F.lo, F.hi]; dF is its exact derivative.
  static PiecewiseChebyshev inverse(const PiecewiseChebyshev& F, const std::function<double(double)>& dF,
                                    ChebyshevOptions opt = {}) {
    double ya = F(F.lo()), yb = F(F.hi());
    bool increasing = yb > ya;
    auto solve = [&](double y) {
      double a = F.lo(), b = F.hi();
      double x = a + (b - a) * (y - ya) / (yb - ya);
      for (int it = 0; it < 200; ++it) {
        double r = F(x) - y;
        if (r == 0.0) return x;
        if ((r > 0.0) == increasing) b = x; else a = x;
        double d = dF(x);
        double xn = x - r / d;
        if (!(xn > a && xn < b) || !std::isfinite(xn)) xn = 0.5 * (a + b);
        if (std::fabs(xn - x) <= 4e-16 * (1.0 + std::fabs(x))) return xn;
        x = xn;
        if (b - a <= 4e-16 * (1.0 + std::fabs(x))) return x;
      }
      return x;
    };
    double lo = std::min(ya, yb), hi = std::max(ya, yb);
    return fit(solve, lo, hi, opt);
  }

 private:
  static std::vector<double> coefficients(const std::vector<double>& vals) {
    const int m = static_cast<int>(vals.size()) - 1;
    std::vector<double> c(m + 1, 0.0);
    for (int k = 0; k <= m; ++k) {
      double s = 0.0;
      for (int j = 0; j <= m; ++j) {
        double w = (j == 0 || j == m) ? 0.5 : 1.0;
        s += w * vals[j] * std::cos(std::numbers::pi * j * k / m);
      }
      c[k] = 2.0 * s / m;
    }
    c[0] *= 0.5;
    c[m] *= 0.5;
    return c;
  }

  static double clenshaw(const std::vector<double>& c, double x) {
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
      double b0 = 2.0 * x * b1 - b2 + c[k];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + c[0];
  }

  std::size_t panel_of(double x) const {
    if (!(x >= breaks_.front() - 1e-12 * (1.0 + std::fabs(breaks_.front())) &&
          x <= breaks_.back() + 1e-12 * (1.0 + std::fabs(breaks_.back()))))
      fail(Errc::out_of_range, "point " + std::to_string(x) + " outside interpolation range [" +
                                   std::to_string(breaks_.front()) + ", " + std::to_string(breaks_.back()) + "]");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - breaks_.begin() - 1, 0));
    return std::min(i, coeffs_.size() - 1);
  }

  std::vector<double> breaks_;
  std::vector<std::vector<double>> coeffs_;
  bool converged_ = false;
};

}  // namespace gqe
