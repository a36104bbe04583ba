#pragma once

// Finite-difference tensor calculus on explicit charts. Only metric component values are
// used; no symbolic derivatives enter here.

#include <Eigen/LU>
#include <cmath>
#include <functional>
#include <vector>

#include "gqe/chart.hpp"
#include "gqe/rng.hpp"

namespace gqe {

struct OracleOptions {
  double step = 2e-3;
  bool richardson = true;
};

using ChartFunction = std::function<double(const double*)>;

inline ChartFunction chart_function(const Expr& e, const ExplicitChart& chart) {
  auto prog = std::make_shared<Program>(e, chart.coords);
  int d = chart.dim;
  return [prog, d](const double* p) { return (*prog)(std::span<const double>(p, d)); };
}

inline ChartFunction chart_constant(double c) {
  return [c](const double*) { return c; };
}

namespace detail {

// Value, first and second partial derivatives of a matrix-valued function.
struct MatrixDerivs {
  Matrix value;
  std::vector<Matrix> d1;
  std::vector<std::vector<Matrix>> d2;
};

template <class F>
MatrixDerivs fd_level(F&& f, const std::vector<double>& p, int d, double h) {
  static constexpr int off[4] = {-2, -1, 1, 2};
  static constexpr double w1[4] = {1.0, -8.0, 8.0, -1.0};  // /(12h)
  static constexpr double w2[4] = {-1.0, 16.0, 16.0, -1.0};  // center -30, /(12h^2)
  std::vector<double> q = p;
  MatrixDerivs r;
  r.value = f(q.data());
  r.d1.assign(d, Matrix::Zero(r.value.rows(), r.value.cols()));
  r.d2.assign(d, std::vector<Matrix>(d, Matrix::Zero(r.value.rows(), r.value.cols())));
  for (int i = 0; i < d; ++i) {
    Matrix s1 = Matrix::Zero(r.value.rows(), r.value.cols()), s2 = -30.0 * r.value;
    for (int a = 0; a < 4; ++a) {
      q[i] = p[i] + off[a] * h;
      Matrix v = f(q.data());
      s1 += w1[a] * v;
      s2 += w2[a] * v;
    }
    q[i] = p[i];
    r.d1[i] = s1 / (12.0 * h);
    r.d2[i][i] = s2 / (12.0 * h * h);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Matrix s = Matrix::Zero(r.value.rows(), r.value.cols());
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          q[i] = p[i] + off[a] * h;
          q[j] = p[j] + off[b] * h;
          s += (w1[a] * w1[b]) * f(q.data());
        }
      q[i] = p[i];
      q[j] = p[j];
      r.d2[i][j] = s / (144.0 * h * h);
      r.d2[j][i] = r.d2[i][j];
    }
  return r;
}

template <class F>
MatrixDerivs fd_derivs(F&& f, const std::vector<double>& p, int d, const OracleOptions& opt) {
  MatrixDerivs a = fd_level(f, p, d, opt.step);
  if (!opt.richardson) return a;
  MatrixDerivs b = fd_level(f, p, d, 0.5 * opt.step);
  for (int i = 0; i < d; ++i) {
    b.d1[i] = (16.0 * b.d1[i] - a.d1[i]) / 15.0;
    for (int j = 0; j < d; ++j) b.d2[i][j] = (16.0 * b.d2[i][j] - a.d2[i][j]) / 15.0;
  }
  return b;
}

inline void check_point(const ExplicitChart& c, const std::vector<double>& p, const OracleOptions& opt) {
  require(static_cast<int>(p.size()) == c.dim, Errc::invalid_argument, "point dimension mismatch");
  for (int i = 0; i < c.dim; ++i) {
    if (c.lo.size() == static_cast<std::size_t>(c.dim)) {
      require(p[i] - c.lo[i] >= 4.0 * opt.step && c.hi[i] - p[i] >= 4.0 * opt.step, Errc::out_of_range,
              "coordinate " + c.coords[i] + " = " + std::to_string(p[i]) + " is within 4 steps of the sample box boundary");
    }
  }
}

}  // namespace detail

// Metric, Christoffel symbols and their derivatives at a point.
class Connection {
 public:
  Connection(const ExplicitChart& chart, const std::vector<double>& p, const OracleOptions& opt = {})
      : d_(chart.dim) {
    detail::check_point(chart, p, opt);
    auto gfun = [&chart](const double* q) {
      Matrix g(chart.dim, chart.dim);
      chart.metric(q, g);
      return g;
    };
    detail::MatrixDerivs md = detail::fd_derivs(gfun, p, d_, opt);
    g_ = md.value;
    Eigen::FullPivLU<Matrix> lu(g_);
    require(lu.isInvertible() && std::fabs(lu.determinant()) > 1e-300, Errc::singular, "metric is not invertible at the point");
    ginv_ = lu.inverse();
    const int d = d_;
    gamma_.assign(d * d * d, 0.0);
    dgamma_.assign(d * d * d * d, 0.0);
    std::vector<Matrix> dginv(d);
    for (int m = 0; m < d; ++m) dginv[m] = -ginv_ * md.d1[m] * ginv_;
    // T_ijl = d_i g_jl + d_j g_il - d_l g_ij
    auto T = [&](int i, int j, int l) { return md.d1[i](j, l) + md.d1[j](i, l) - md.d1[l](i, j); };
    auto dT = [&](int m, int i, int j, int l) {
      return md.d2[m][i](j, l) + md.d2[m][j](i, l) - md.d2[m][l](i, j);
    };
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = 0.0;
          for (int l = 0; l < d; ++l) s += ginv_(k, l) * T(i, j, l);
          gamma_[idx3(k, i, j)] = 0.5 * s;
          for (int m = 0; m < d; ++m) {
            double t = 0.0;
            for (int l = 0; l < d; ++l) t += dginv[m](k, l) * T(i, j, l) + ginv_(k, l) * dT(m, i, j, l);
            dgamma_[idx4(m, k, i, j)] = 0.5 * t;
          }
        }
  }

  int dim() const { return d_; }
  const Matrix& metric() const { return g_; }
  const Matrix& inverse_metric() const { return ginv_; }
  double gamma(int k, int i, int j) const { return gamma_[idx3(k, i, j)]; }
  double dgamma(int m, int k, int i, int j) const { return dgamma_[idx4(m, k, i, j)]; }

  Matrix ricci() const {
    const int d = d_;
    Matrix R = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
          s += dgamma(k, k, i, j) - dgamma(j, k, i, k);
          for (int l = 0; l < d; ++l) s += gamma(k, k, l) * gamma(l, i, j) - gamma(k, j, l) * gamma(l, i, k);
        }
        R(i, j) = s;
      }
    return R;
  }

 private:
  int idx3(int k, int i, int j) const { return (k * d_ + i) * d_ + j; }
  int idx4(int m, int k, int i, int j) const { return ((m * d_ + k) * d_ + i) * d_ + j; }

  int d_;
  Matrix g_, ginv_;
  std::vector<double> gamma_, dgamma_;
};

inline Matrix ricci_fd(const ExplicitChart& chart, const std::vector<double>& p, const OracleOptions& opt = {}) {
  return Connection(chart, p, opt).ricci();
}

struct ScalarDerivs {
  double value;
  Vector grad;
  Matrix hess;  // plain second partials
};

inline ScalarDerivs scalar_fd(const ChartFunction& f, const std::vector<double>& p, int d, const OracleOptions& opt) {
  auto F = [&f](const double* q) {
    Matrix m(1, 1);
    m(0, 0) = f(q);
    return m;
  };
  detail::MatrixDerivs md = detail::fd_derivs(F, p, d, opt);
  ScalarDerivs s{md.value(0, 0), Vector(d), Matrix(d, d)};
  for (int i = 0; i < d; ++i) {
    s.grad(i) = md.d1[i](0, 0);
    for (int j = 0; j < d; ++j) s.hess(i, j) = md.d2[i][j](0, 0);
  }
  return s;
}

inline Matrix hessian_fd(const Connection& conn, const ScalarDerivs& f) {
  const int d = conn.dim();
  Matrix H = f.hess;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) H(i, j) -= conn.gamma(k, i, j) * f.grad(k);
  return H;
}

inline Matrix hessian_fd(const ExplicitChart& chart, const ChartFunction& f, const std::vector<double>& p,
                         const OracleOptions& opt = {}) {
  Connection conn(chart, p, opt);
  return hessian_fd(conn, scalar_fd(f, p, chart.dim, opt));
}

// Ric + Hess f + alpha df (x) df - lambda g.
inline Matrix gqe_residual_fd(const ExplicitChart& chart, const ChartFunction& f, const ChartFunction& alpha,
                              const ChartFunction& lambda, const std::vector<double>& p,
                              const OracleOptions& opt = {}) {
  Connection conn(chart, p, opt);
  ScalarDerivs fd = scalar_fd(f, p, chart.dim, opt);
  Matrix R = conn.ricci() + hessian_fd(conn, fd) + alpha(p.data()) * fd.grad * fd.grad.transpose() -
             lambda(p.data()) * conn.metric();
  return R;
}

// Ric_h - (1/(n-2) - alpha) df (x) df - Q h.
inline Matrix gqe_h_residual_fd(const ExplicitChart& chart, const ChartFunction& f, const ChartFunction& alpha,
                                const ChartFunction& Q, const std::vector<double>& p,
                                const OracleOptions& opt = {}) {
  Connection conn(chart, p, opt);
  ScalarDerivs fd = scalar_fd(f, p, chart.dim, opt);
  const double n = chart.dim;
  return conn.ricci() - (1.0 / (n - 2.0) - alpha(p.data())) * fd.grad * fd.grad.transpose() -
         Q(p.data()) * conn.metric();
}

// (L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k.
inline Matrix lie_derivative_fd(const ExplicitChart& chart, const std::vector<ChartFunction>& V,
                                const std::vector<double>& p, const OracleOptions& opt = {}) {
  const int d = chart.dim;
  require(static_cast<int>(V.size()) == d, Errc::invalid_argument, "vector field needs one component per coordinate");
  detail::check_point(chart, p, opt);
  auto gfun = [&chart](const double* q) {
    Matrix g(chart.dim, chart.dim);
    chart.metric(q, g);
    return g;
  };
  auto vfun = [&V, d](const double* q) {
    Matrix v(d, 1);
    for (int k = 0; k < d; ++k) v(k, 0) = V[k](q);
    return v;
  };
  OracleOptions first = opt;
  auto gd = detail::fd_derivs(gfun, p, d, first);
  auto vd = detail::fd_derivs(vfun, p, d, first);
  Matrix L = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        s += vd.value(k, 0) * gd.d1[k](i, j) + gd.value(k, j) * vd.d1[i](k, 0) + gd.value(i, k) * vd.d1[j](k, 0);
      L(i, j) = s;
    }
  return L;
}

// Largest entry of (A - B) scaled by sqrt(g_ii g_jj); compares tensors in an orthonormal-ish frame.
inline double normalized_max_diff(const Matrix& A, const Matrix& B, const Matrix& g) {
  double m = 0.0;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      m = std::max(m, std::fabs(A(i, j) - B(i, j)) / std::sqrt(std::fabs(g(i, i) * g(j, j))));
  return m;
}

inline double normalized_max_abs(const Matrix& A, const Matrix& g) {
  return normalized_max_diff(A, Matrix::Zero(A.rows(), A.cols()), g);
}

// Uniform sample points in the chart box, shrunk by `margin` on every side.
inline std::vector<std::vector<double>> sample_points(const ExplicitChart& chart, int count, std::uint64_t seed,
                                                      double margin) {
  Rng rng(seed);
  std::vector<std::vector<double>> pts;
  for (int s = 0; s < count; ++s) {
    std::vector<double> p(chart.dim);
    for (int i = 0; i < chart.dim; ++i) p[i] = rng.uniform(chart.lo[i] + margin, chart.hi[i] - margin);
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace gqe
