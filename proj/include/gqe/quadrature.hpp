#pragma once

#include <cmath>
#include <functional>

namespace gqe {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;
};

namespace detail {

template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth, QuadResult& res) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  res.evaluations += 2;
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol || !(std::fabs(b - a) > 1e-15 * (1.0 + std::fabs(a)))) {
    if (depth <= 0 && std::fabs(delta) > 15.0 * tol) res.converged = false;
    res.error += std::fabs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, res) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, res);
}

}  // namespace detail

// Adaptive Simpson with one Richardson step per accepted panel.
template <class F>
QuadResult adaptive_simpson(F&& f, double a, double b, double tol = 1e-10, int max_depth = 40) {
  QuadResult res;
  if (a == b) return res;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  res.evaluations = 3;
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  res.value = detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, res);
  return res;
}

// Splits [a,b] into n equal panels before adapting; helps oscillatory or peaked integrands.
template <class F>
QuadResult adaptive_simpson_panels(F&& f, double a, double b, int n, double tol = 1e-10, int max_depth = 40) {
  QuadResult total;
  for (int i = 0; i < n; ++i) {
    double x0 = a + (b - a) * i / n, x1 = a + (b - a) * (i + 1) / n;
    QuadResult r = adaptive_simpson(f, x0, x1, tol / n, max_depth);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

}  // namespace gqe
