#pragma once

#include <cstdint>
#include <random>

namespace lcf {

/// Seeded source of uniform doubles. The mapping from engine output to doubles
/// is fixed here so sample sets do not depend on the standard library's
/// distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lcf
