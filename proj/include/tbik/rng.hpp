#pragma once

// Counter-based PRNG for fixtures and golden tests.
//
// Each draw hashes (seed, stream, counter) through the SplitMix64 finalizer,
// so the sequence is a pure function of the three integers and is
// reproducible across platforms and languages. Streams give independent
// sequences for independent tensors without coordination.

#include <cmath>
#include <cstdint>

namespace tbik {

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() {
    return mix64(counter_++ ^ mix64(stream_ ^ mix64(seed_ + 0x9E3779B97F4A7C15ull)));
  }

  // Uniform in [0, 1): 53 random mantissa bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; both outputs of each pair are consumed
  // in order so the draw count stays independent of call sites.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_unit();  // (0, 1], keeps log finite
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tbik
