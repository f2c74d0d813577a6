#pragma once

// Portable seeded random numbers.
//
// The engine is std::mt19937_64 (its output sequence is fixed by the C++
// standard). The real-valued transforms below are written out by hand because
// std::uniform_real_distribution and std::normal_distribution are
// implementation-defined and differ across standard libraries:
//
//   uniform01:  (u64 >> 11) * 2^-53, giving a double in [0, 1)
//   normal:     Box-Muller on two uniforms, u1 mapped to (0, 1]; both
//               outputs of a pair are used (cos branch first)
//
// Sub-streams are derived with splitmix64(seed ^ tag) so independent
// consumers (graph redraws, per-agent data) do not share a sequence.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "datos/core.hpp"

namespace datos {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(theta);
    has_spare_ = true;
    return radius * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
    return out;
  }

  Stack normal_stack(Eigen::Index rows, Eigen::Index cols) {
    Stack out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
    return out;
  }

  Vector normal_vector(Eigen::Index n) {
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = normal();
    return out;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace datos
