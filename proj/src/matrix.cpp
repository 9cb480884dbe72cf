#include "tbik/matrix.hpp"

#include <cstdio>
#include <cstring>

#include "tbik/errors.hpp"

namespace tbik {

const char* dtype_name(Dtype d) { return d == Dtype::F32 ? "f32" : "bf16"; }

Matrix::Matrix(std::int64_t rows, std::int64_t cols, Dtype dtype)
    : rows_(rows), cols_(cols), dtype_(dtype) {
  if (rows < 1 || cols < 1) {
    fail(ErrorCode::BadDimension, "matrix dimensions must be >= 1, got " +
                                      std::to_string(rows) + "x" +
                                      std::to_string(cols));
  }
  if (dtype_ == Dtype::F32) {
    f32_.assign(static_cast<std::size_t>(rows * cols), 0.0f);
  } else {
    bf16_.assign(static_cast<std::size_t>(rows * cols), 0);
  }
}

Matrix Matrix::from_f32(std::int64_t rows, std::int64_t cols,
                        std::vector<float> data) {
  Matrix m(rows, cols, Dtype::F32);
  if (static_cast<std::int64_t>(data.size()) != rows * cols) {
    fail(ErrorCode::BadDimension, "payload length does not match dimensions");
  }
  m.f32_ = std::move(data);
  return m;
}

Matrix Matrix::from_bf16(std::int64_t rows, std::int64_t cols,
                         std::vector<std::uint16_t> data) {
  Matrix m(rows, cols, Dtype::Bf16);
  if (static_cast<std::int64_t>(data.size()) != rows * cols) {
    fail(ErrorCode::BadDimension, "payload length does not match dimensions");
  }
  m.bf16_ = std::move(data);
  return m;
}

const std::vector<float>& Matrix::f32_data() const {
  if (dtype_ != Dtype::F32) fail(ErrorCode::BadArgument, "matrix is not f32");
  return f32_;
}

std::vector<float>& Matrix::f32_data() {
  if (dtype_ != Dtype::F32) fail(ErrorCode::BadArgument, "matrix is not f32");
  return f32_;
}

const std::vector<std::uint16_t>& Matrix::bf16_data() const {
  if (dtype_ != Dtype::Bf16) fail(ErrorCode::BadArgument, "matrix is not bf16");
  return bf16_;
}

std::vector<float> Matrix::widened() const {
  if (dtype_ == Dtype::F32) return f32_;
  std::vector<float> out(bf16_.size());
  for (std::size_t i = 0; i < bf16_.size(); ++i) {
    out[i] = bf16_to_f32(Bf16{bf16_[i]});
  }
  return out;
}

Matrix Matrix::slice_cols(std::int64_t begin, std::int64_t end) const {
  if (begin < 0 || end > cols_ || begin >= end) {
    fail(ErrorCode::BadDimension, "bad column slice");
  }
  Matrix out(rows_, end - begin, dtype_);
  for (std::int64_t r = 0; r < rows_; ++r) {
    if (dtype_ == Dtype::F32) {
      std::memcpy(&out.f32_[r * out.cols_], &f32_[r * cols_ + begin],
                  static_cast<std::size_t>(out.cols_) * sizeof(float));
    } else {
      std::memcpy(&out.bf16_[r * out.cols_], &bf16_[r * cols_ + begin],
                  static_cast<std::size_t>(out.cols_) * sizeof(std::uint16_t));
    }
  }
  return out;
}

Matrix Matrix::slice_rows(std::int64_t begin, std::int64_t end) const {
  if (begin < 0 || end > rows_ || begin >= end) {
    fail(ErrorCode::BadDimension, "bad row slice");
  }
  Matrix out(end - begin, cols_, dtype_);
  if (dtype_ == Dtype::F32) {
    std::memcpy(out.f32_.data(), &f32_[begin * cols_],
                static_cast<std::size_t>(out.size()) * sizeof(float));
  } else {
    std::memcpy(out.bf16_.data(), &bf16_[begin * cols_],
                static_cast<std::size_t>(out.size()) * sizeof(std::uint16_t));
  }
  return out;
}

Matrix cast_to_bf16(const Matrix& m) {
  if (m.dtype() == Dtype::Bf16) return m;
  std::vector<std::uint16_t> data(static_cast<std::size_t>(m.size()));
  const auto& src = m.f32_data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = bf16_round(src[i]).bits;
  }
  return Matrix::from_bf16(m.rows(), m.cols(), std::move(data));
}

Matrix cast_to_f32(const Matrix& m) {
  if (m.dtype() == Dtype::F32) return m;
  return Matrix::from_f32(m.rows(), m.cols(), m.widened());
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return bit_diff_count(a, b) == 0 && a.rows() == b.rows() &&
         a.cols() == b.cols() && a.dtype() == b.dtype();
}

std::uint64_t bit_diff_count(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.dtype() != b.dtype()) {
    return static_cast<std::uint64_t>(-1);
  }
  std::uint64_t diffs = 0;
  if (a.dtype() == Dtype::F32) {
    const auto& x = a.f32_data();
    const auto& y = b.f32_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (f32_bits(x[i]) != f32_bits(y[i])) ++diffs;
    }
  } else {
    const auto& x = a.bf16_data();
    const auto& y = b.bf16_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != y[i]) ++diffs;
    }
  }
  return diffs;
}

std::uint64_t bit_fingerprint(const Matrix& m) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001B3ull;
    }
  };
  std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                           static_cast<std::uint64_t>(m.cols())};
  feed(dims, sizeof(dims));
  if (m.dtype() == Dtype::F32) {
    feed(m.f32_data().data(), m.f32_data().size() * sizeof(float));
  } else {
    feed(m.bf16_data().data(), m.bf16_data().size() * sizeof(std::uint16_t));
  }
  return h;
}

Matrix matrix_random_normal(Rng& rng, std::int64_t rows, std::int64_t cols,
                            Dtype dtype, float mean, float stddev) {
  if (rows < 1 || cols < 1) {
    fail(ErrorCode::BadDimension, "matrix_random_normal requires rows, cols >= 1");
  }
  if (stddev < 0.0f) {
    fail(ErrorCode::BadArgument, "matrix_random_normal requires stddev >= 0");
  }
  Matrix m(rows, cols, dtype);
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      double z = rng.next_normal();
      float v = static_cast<float>(static_cast<double>(mean) +
                                   static_cast<double>(stddev) * z);
      m.set(r, c, v);
    }
  }
  return m;
}

namespace {

constexpr char kMagic[4] = {'T', 'B', 'I', 'K'};
constexpr std::uint16_t kFormatVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void matrix_write(const std::string& path, const Matrix& m) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u16(buf, kFormatVersion);
  put_u16(buf, static_cast<std::uint16_t>(m.dtype()));
  put_u64(buf, static_cast<std::uint64_t>(m.rows()));
  put_u64(buf, static_cast<std::uint64_t>(m.cols()));
  if (m.dtype() == Dtype::F32) {
    for (float v : m.f32_data()) {
      std::uint32_t u = f32_bits(v);
      for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
      }
    }
  } else {
    for (std::uint16_t v : m.bf16_data()) put_u16(buf, v);
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) fail(ErrorCode::Io, "cannot open for writing: " + path);
  std::size_t written = std::fwrite(buf.data(), 1, buf.size(), f);
  std::fclose(f);
  if (written != buf.size()) fail(ErrorCode::Io, "short write: " + path);
}

Matrix matrix_read(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) fail(ErrorCode::Io, "cannot open for reading: " + path);
  std::string buf;
  char chunk[65536];
  std::size_t n;
  while ((n = std::fread(chunk, 1, sizeof(chunk), f)) > 0) buf.append(chunk, n);
  std::fclose(f);

  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 24) fail(ErrorCode::Truncated, "truncated header: " + path);
  if (std::memcmp(p, kMagic, 4) != 0) {
    fail(ErrorCode::BadMagic, "bad magic in " + path);
  }
  std::uint16_t version = get_u16(p + 4);
  if (version != kFormatVersion) {
    fail(ErrorCode::UnknownDtype, "unsupported format version " +
                                      std::to_string(version) + " in " + path);
  }
  std::uint16_t dtype_code = get_u16(p + 6);
  if (dtype_code > 1) {
    fail(ErrorCode::UnknownDtype,
         "unknown dtype code " + std::to_string(dtype_code) + " in " + path);
  }
  Dtype dtype = static_cast<Dtype>(dtype_code);
  std::uint64_t rows = get_u64(p + 8);
  std::uint64_t cols = get_u64(p + 16);
  std::uint64_t elems = rows * cols;
  std::size_t elem_size = dtype == Dtype::F32 ? 4 : 2;
  if (buf.size() != 24 + elems * elem_size) {
    fail(ErrorCode::Truncated, "truncated payload in " + path);
  }
  const unsigned char* payload = p + 24;
  if (dtype == Dtype::F32) {
    std::vector<float> data(elems);
    for (std::uint64_t i = 0; i < elems; ++i) {
      std::uint32_t u = 0;
      for (int b = 3; b >= 0; --b) u = (u << 8) | payload[i * 4 + b];
      data[i] = f32_from_bits(u);
    }
    return Matrix::from_f32(static_cast<std::int64_t>(rows),
                            static_cast<std::int64_t>(cols), std::move(data));
  }
  std::vector<std::uint16_t> data(elems);
  for (std::uint64_t i = 0; i < elems; ++i) {
    data[i] = get_u16(payload + i * 2);
  }
  return Matrix::from_bf16(static_cast<std::int64_t>(rows),
                           static_cast<std::int64_t>(cols), std::move(data));
}

}  // namespace tbik
