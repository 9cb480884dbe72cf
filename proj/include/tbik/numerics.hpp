#pragma once

// Scalar floating-point model used by every kernel in this project.
//
// All arithmetic is IEEE binary32 round-to-nearest-even on the host FPU.
// The build disables contraction and fast-math (see top-level CMakeLists),
// so the operations below are bit-exact pure functions of their inputs.
// bf16 is a storage format only: values are widened to f32 before any
// arithmetic and rounded back explicitly with bf16_round.

#include <cmath>
#include <cstdint>
#include <cstring>

#if defined(__FAST_MATH__)
#error "tbik requires strict IEEE semantics; do not build with -ffast-math"
#endif

namespace tbik {

inline std::uint32_t f32_bits(float x) {
  std::uint32_t u;
  std::memcpy(&u, &x, sizeof(u));
  return u;
}

inline float f32_from_bits(std::uint32_t u) {
  float x;
  std::memcpy(&x, &u, sizeof(x));
  return x;
}

// 16-bit pattern: 1 sign, 8 exponent, 7 mantissa (the top half of an f32).
struct Bf16 {
  std::uint16_t bits = 0;

  friend bool operator==(Bf16 a, Bf16 b) { return a.bits == b.bits; }
};

// Canonical quiet-NaN pattern emitted for every NaN input, so that golden
// files do not depend on platform NaN payloads.
inline constexpr std::uint16_t kBf16CanonicalNan = 0x7FC0;

inline float bf16_to_f32(Bf16 v) {
  return f32_from_bits(static_cast<std::uint32_t>(v.bits) << 16);
}

// Round-to-nearest-even truncation of the low 16 mantissa bits.
inline Bf16 bf16_round(float x) {
  std::uint32_t u = f32_bits(x);
  if ((u & 0x7F800000u) == 0x7F800000u && (u & 0x007FFFFFu) != 0) {
    return Bf16{kBf16CanonicalNan};
  }
  std::uint32_t rounding_bias = 0x7FFFu + ((u >> 16) & 1u);
  return Bf16{static_cast<std::uint16_t>((u + rounding_bias) >> 16)};
}

inline float add_f32(float a, float b) { return a + b; }
inline float mul_f32(float a, float b) { return a * b; }

// round(a*b + c) with a single rounding of the exact product-sum.
inline float fma_f32(float a, float b, float c) { return std::fma(a, b, c); }

inline bool f32_bit_equal(float a, float b) { return f32_bits(a) == f32_bits(b); }

}  // namespace tbik
