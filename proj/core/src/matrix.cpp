#include "fades/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace fades {

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols, ElementPrecision p) {
  DenseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.precision_ = p;
  if (p == ElementPrecision::Int8) {
    m.i8_.assign(rows * cols, 0);
  } else {
    m.f32_.assign(rows * cols, 0.0f);
  }
  return m;
}

DenseMatrix DenseMatrix::from_int8(std::size_t rows, std::size_t cols,
                                   std::vector<std::int8_t> data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: data length must be rows*cols");
  }
  DenseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.precision_ = ElementPrecision::Int8;
  m.i8_ = std::move(data);
  return m;
}

DenseMatrix DenseMatrix::from_float(std::size_t rows, std::size_t cols,
                                    std::vector<float> data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: data length must be rows*cols");
  }
  for (float v : data) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("DenseMatrix: Float32 elements must be finite");
    }
  }
  DenseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.precision_ = ElementPrecision::Float32;
  m.f32_ = std::move(data);
  return m;
}

DenseMatrix DenseMatrix::from_int32_checked(std::size_t rows, std::size_t cols,
                                            const std::vector<std::int32_t>& data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("DenseMatrix: data length must be rows*cols");
  }
  std::vector<std::int8_t> narrow(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] < -128 || data[i] > 127) {
      throw std::out_of_range("DenseMatrix: Int8 element out of range: " +
                              std::to_string(data[i]));
    }
    narrow[i] = static_cast<std::int8_t>(data[i]);
  }
  return from_int8(rows, cols, std::move(narrow));
}

std::size_t DenseMatrix::count_zeros() const {
  std::size_t n = 0;
  if (precision_ == ElementPrecision::Int8) {
    for (std::int8_t v : i8_) n += (v == 0);
  } else {
    for (float v : f32_) n += (v == 0.0f);
  }
  return n;
}

void validate_csr(const CsrMatrix& m) {
  if (m.row_ptr.size() != m.rows + 1) {
    throw std::invalid_argument("CsrMatrix: row_ptr length must be rows+1");
  }
  if (m.row_ptr.front() != 0) {
    throw std::invalid_argument("CsrMatrix: row_ptr[0] must be 0");
  }
  const std::size_t nnz = m.col_idx.size();
  if (m.row_ptr.back() != nnz) {
    throw std::invalid_argument("CsrMatrix: row_ptr[rows] must equal nnz");
  }
  const std::size_t nvals = m.precision == ElementPrecision::Int8
                                ? m.values_i8.size()
                                : m.values_f32.size();
  if (nvals != nnz) {
    throw std::invalid_argument("CsrMatrix: values length must equal nnz");
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (m.row_ptr[r] > m.row_ptr[r + 1]) {
      throw std::invalid_argument("CsrMatrix: row_ptr must be non-decreasing");
    }
    for (std::uint64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      if (m.col_idx[k] >= m.cols) {
        throw std::invalid_argument("CsrMatrix: column index out of range");
      }
      if (k > m.row_ptr[r] && m.col_idx[k] <= m.col_idx[k - 1]) {
        throw std::invalid_argument(
            "CsrMatrix: column indices must be strictly increasing per row");
      }
    }
  }
  for (std::size_t k = 0; k < nnz; ++k) {
    const bool zero = m.precision == ElementPrecision::Int8
                          ? m.values_i8[k] == 0
                          : m.values_f32[k] == 0.0f;
    if (zero) {
      throw std::invalid_argument("CsrMatrix: stored zero value (non-canonical)");
    }
  }
}

PackedWords pack(std::span<const std::int8_t> elements) {
  PackedWords out;
  out.precision = ElementPrecision::Int8;
  out.logical_len = elements.size();
  out.words.assign((elements.size() + 3) / 4, 0u);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto byte = static_cast<std::uint32_t>(static_cast<std::uint8_t>(elements[i]));
    out.words[i / 4] |= byte << (8 * (i % 4));
  }
  return out;
}

PackedWords pack(std::span<const float> elements) {
  PackedWords out;
  out.precision = ElementPrecision::Float32;
  out.logical_len = elements.size();
  out.words.resize(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (!std::isfinite(elements[i])) {
      throw std::invalid_argument("pack: Float32 elements must be finite");
    }
    out.words[i] = std::bit_cast<std::uint32_t>(elements[i]);
  }
  return out;
}

PackedWords pack_checked(std::span<const std::int32_t> elements) {
  std::vector<std::int8_t> narrow(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (elements[i] < -128 || elements[i] > 127) {
      throw std::out_of_range("pack: Int8 element out of range: " +
                              std::to_string(elements[i]));
    }
    narrow[i] = static_cast<std::int8_t>(elements[i]);
  }
  return pack(std::span<const std::int8_t>(narrow));
}

std::vector<std::int8_t> unpack_int8(const PackedWords& view) {
  if (view.precision != ElementPrecision::Int8) {
    throw std::invalid_argument("unpack_int8: view is not Int8");
  }
  std::vector<std::int8_t> out(view.logical_len);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int8_t>(
        static_cast<std::uint8_t>(view.words[i / 4] >> (8 * (i % 4))));
  }
  return out;
}

std::vector<float> unpack_float(const PackedWords& view) {
  if (view.precision != ElementPrecision::Float32) {
    throw std::invalid_argument("unpack_float: view is not Float32");
  }
  std::vector<float> out(view.logical_len);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<float>(view.words[i]);
  }
  return out;
}

CsrMatrix dense_to_csr(const DenseMatrix& m) {
  CsrMatrix out;
  out.rows = m.rows();
  out.cols = m.cols();
  out.precision = m.precision();
  out.row_ptr.reserve(m.rows() + 1);
  out.row_ptr.push_back(0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.precision() == ElementPrecision::Int8) {
        if (m.i8(r, c) != 0) {
          out.col_idx.push_back(static_cast<std::uint32_t>(c));
          out.values_i8.push_back(m.i8(r, c));
        }
      } else {
        if (m.f32(r, c) != 0.0f) {
          out.col_idx.push_back(static_cast<std::uint32_t>(c));
          out.values_f32.push_back(m.f32(r, c));
        }
      }
    }
    out.row_ptr.push_back(out.col_idx.size());
  }
  return out;
}

DenseMatrix csr_to_dense(const CsrMatrix& m) {
  validate_csr(m);
  DenseMatrix out = DenseMatrix::zeros(m.rows, m.cols, m.precision);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::uint64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      if (m.precision == ElementPrecision::Int8) {
        out.i8(r, m.col_idx[k]) = m.values_i8[k];
      } else {
        out.f32(r, m.col_idx[k]) = m.values_f32[k];
      }
    }
  }
  return out;
}

namespace {

std::int8_t draw_nonzero_int8(SplitMix64& rng) {
  // 255 admissible values: [-128..-1] and [1..127]. 2^64 mod 255 == 1, so the
  // modulo bias is ~2^-56 and irrelevant for test data.
  int v = static_cast<int>(rng.next() % 255u) - 128;
  if (v >= 0) ++v;
  return static_cast<std::int8_t>(v);
}

float draw_nonzero_float(SplitMix64& rng) {
  for (;;) {
    const double d = (static_cast<double>(rng.next() >> 11) + 0.5) * 0x1.0p-52 - 1.0;
    const float f = static_cast<float>(d);
    if (f != 0.0f) return f;  // redraw on underflow to 0 (p ~ 2^-30)
  }
}

}  // namespace

DenseMatrix generate_matrix(std::size_t rows, std::size_t cols,
                            ElementPrecision precision, double sparsity_fraction,
                            std::uint64_t seed) {
  if (!(sparsity_fraction >= 0.0 && sparsity_fraction <= 1.0)) {
    throw std::invalid_argument("generate_matrix: sparsity_fraction must be in [0,1]");
  }
  SplitMix64 rng(seed);
  // Integer Bernoulli threshold over the top 53 bits.
  const auto threshold =
      static_cast<std::uint64_t>(std::llround(sparsity_fraction * 0x1.0p53));
  DenseMatrix m = DenseMatrix::zeros(rows, cols, precision);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const bool zero = (rng.next() >> 11) < threshold;
    if (zero) continue;
    if (precision == ElementPrecision::Int8) {
      m.i8(i / cols, i % cols) = draw_nonzero_int8(rng);
    } else {
      m.f32(i / cols, i % cols) = draw_nonzero_float(rng);
    }
  }
  return m;
}

}  // namespace fades
