#pragma once

#include <cstdint>
#include <random>

namespace decoh {

// Seeded generator whose output is fixed by the C++ standard: mt19937_64
// words mapped to doubles by taking the top 53 bits. std::*_distribution is
// avoided because its algorithm is implementation-defined.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace decoh
