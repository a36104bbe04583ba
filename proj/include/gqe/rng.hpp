#pragma once

#include <cstdint>
#include <random>

namespace gqe {

// Seeded generator with a fixed double mapping, so samples are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t bits() { return g_(); }
  int index(int n) { return static_cast<int>(uniform() * n) % n; }

 private:
  std::mt19937_64 g_;
};

}  // namespace gqe
