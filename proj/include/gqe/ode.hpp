#pragma once

#include <array>
#include <cstddef>

namespace gqe {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, const State<N>& k) {
  State<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h * k[i];
  return r;
}

// One classical RK4 step of y' = f(t, y).
template <std::size_t N, class F>
State<N> rk4_step(F&& f, double t, const State<N>& y, double h) {
  State<N> k1 = f(t, y);
  State<N> k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  State<N> k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  State<N> k4 = f(t + h, axpy(y, h, k3));
  State<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return r;
}

}  // namespace gqe
