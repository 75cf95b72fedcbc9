#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace voxflow {

// Portable seeded stream. std::mt19937_64's output sequence is fixed by the
// standard, but the std:: distributions are implementation-defined, so all
// derived draws are computed here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n), unbiased by rejection.
  std::size_t index(std::size_t n);
  // Standard normal via Box-Muller (one draw per call).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  template <typename T> void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

private:
  std::mt19937_64 engine_;
};

} // namespace voxflow
