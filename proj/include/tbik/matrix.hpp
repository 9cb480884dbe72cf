#pragma once

// Dense row-major matrix with an element-type tag, plus deterministic random
// generation and the bit-exact "TBIK" binary file format.
//
// File format (little-endian):
//   magic "TBIK" (4 bytes) | version u16 = 1 | dtype u16 (0=f32, 1=bf16)
//   | rows u64 | cols u64 | row-major payload (f32: 4-byte, bf16: 2-byte)

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tbik/numerics.hpp"
#include "tbik/rng.hpp"

namespace tbik {

enum class Dtype : std::uint16_t { F32 = 0, Bf16 = 1 };

const char* dtype_name(Dtype d);

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols, Dtype dtype);

  static Matrix from_f32(std::int64_t rows, std::int64_t cols,
                         std::vector<float> data);
  static Matrix from_bf16(std::int64_t rows, std::int64_t cols,
                          std::vector<std::uint16_t> data);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::int64_t size() const { return rows_ * cols_; }
  Dtype dtype() const { return dtype_; }

  // Element access, always widened to f32.
  float at(std::int64_t r, std::int64_t c) const {
    std::int64_t i = r * cols_ + c;
    return dtype_ == Dtype::F32 ? f32_[i] : bf16_to_f32(Bf16{bf16_[i]});
  }

  void set(std::int64_t r, std::int64_t c, float v) {
    std::int64_t i = r * cols_ + c;
    if (dtype_ == Dtype::F32) {
      f32_[i] = v;
    } else {
      bf16_[i] = bf16_round(v).bits;
    }
  }

  const std::vector<float>& f32_data() const;
  std::vector<float>& f32_data();
  const std::vector<std::uint16_t>& bf16_data() const;

  // Full f32 copy of the payload (exact widening for bf16).
  std::vector<float> widened() const;

  Matrix slice_cols(std::int64_t begin, std::int64_t end) const;
  Matrix slice_rows(std::int64_t begin, std::int64_t end) const;

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  Dtype dtype_ = Dtype::F32;
  std::vector<float> f32_;
  std::vector<std::uint16_t> bf16_;
};

// Element-wise rounding / widening between storage types.
Matrix cast_to_bf16(const Matrix& m);
Matrix cast_to_f32(const Matrix& m);

bool bit_equal(const Matrix& a, const Matrix& b);
std::uint64_t bit_diff_count(const Matrix& a, const Matrix& b);

// FNV-1a over the payload bit patterns; stable content fingerprint.
std::uint64_t bit_fingerprint(const Matrix& m);

// Fills row-major in index order; bf16 entries pass through bf16_round.
Matrix matrix_random_normal(Rng& rng, std::int64_t rows, std::int64_t cols,
                            Dtype dtype, float mean, float stddev);

void matrix_write(const std::string& path, const Matrix& m);
Matrix matrix_read(const std::string& path);

}  // namespace tbik
