#pragma once

#include <cstdint>
#include <random>

namespace zonolip {

// Portable seeded stream: std::mt19937_64 (fully specified by the C++
// standard) with hand-rolled conversions, since the standard distributions
// are implementation-defined.
//   uniform01  = (next >> 11) * 2^-53, in [0, 1)
//   sign       = top bit set ? +1 : -1
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  int sign() { return (next() >> 63) != 0 ? 1 : -1; }
  // Integer in [lo, hi] by modulo reduction; bias is irrelevant for test
  // fixture sizes.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(next() % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace zonolip
