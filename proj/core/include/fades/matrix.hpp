#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fades {

/// Element precision of a matrix. A 32-bit data word holds four Int8 lanes
/// or one Float32 value.
enum class ElementPrecision { Int8, Float32 };

/// Lanes per 32-bit word for a given precision (4 for Int8, 1 for Float32).
constexpr int lanes_per_word(ElementPrecision p) {
  return p == ElementPrecision::Int8 ? 4 : 1;
}

/// Row-major dense matrix in a single element precision.
///
/// Float32 inputs must be finite; NaN/Inf are rejected at construction.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  static DenseMatrix zeros(std::size_t rows, std::size_t cols, ElementPrecision p);
  static DenseMatrix from_int8(std::size_t rows, std::size_t cols,
                               std::vector<std::int8_t> data);
  static DenseMatrix from_float(std::size_t rows, std::size_t cols,
                                std::vector<float> data);
  /// Int8 matrix from wider integers; throws std::out_of_range if any
  /// element falls outside [-128, 127].
  static DenseMatrix from_int32_checked(std::size_t rows, std::size_t cols,
                                        const std::vector<std::int32_t>& data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  ElementPrecision precision() const { return precision_; }

  std::int8_t i8(std::size_t r, std::size_t c) const { return i8_[r * cols_ + c]; }
  float f32(std::size_t r, std::size_t c) const { return f32_[r * cols_ + c]; }
  std::int8_t& i8(std::size_t r, std::size_t c) { return i8_[r * cols_ + c]; }
  float& f32(std::size_t r, std::size_t c) { return f32_[r * cols_ + c]; }

  std::span<const std::int8_t> i8_data() const { return i8_; }
  std::span<const float> f32_data() const { return f32_; }

  std::size_t count_zeros() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  ElementPrecision precision_ = ElementPrecision::Int8;
  std::vector<std::int8_t> i8_;
  std::vector<float> f32_;
};

/// Compressed sparse row matrix. Canonical form: row_ptr non-decreasing with
/// row_ptr[0] = 0 and row_ptr[rows] = nnz, column indices strictly increasing
/// within each row, and no stored zero values.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  ElementPrecision precision = ElementPrecision::Int8;
  std::vector<std::uint64_t> row_ptr;  // rows + 1 offsets
  std::vector<std::uint32_t> col_idx;
  std::vector<std::int8_t> values_i8;
  std::vector<float> values_f32;

  std::size_t nnz() const { return col_idx.size(); }
  std::size_t row_nnz(std::size_t r) const { return row_ptr[r + 1] - row_ptr[r]; }

  bool operator==(const CsrMatrix& other) const = default;
};

/// Throws std::invalid_argument if the CSR structure is malformed
/// (bad row_ptr, unsorted or duplicate column indices, stored zeros).
void validate_csr(const CsrMatrix& m);

/// Sequence of 32-bit words with Int8 elements packed four per word
/// (lane z occupies bits [8z+7:8z], low lane first) or one Float32 bit
/// pattern per word. Trailing lanes of the final word are zero.
struct PackedWords {
  ElementPrecision precision = ElementPrecision::Int8;
  std::size_t logical_len = 0;
  std::vector<std::uint32_t> words;

  int lanes() const { return lanes_per_word(precision); }

  bool operator==(const PackedWords& other) const = default;
};

PackedWords pack(std::span<const std::int8_t> elements);
PackedWords pack(std::span<const float> elements);
/// Packs wider integers as Int8 lanes; throws std::out_of_range when an
/// element is outside [-128, 127].
PackedWords pack_checked(std::span<const std::int32_t> elements);

std::vector<std::int8_t> unpack_int8(const PackedWords& view);
std::vector<float> unpack_float(const PackedWords& view);

/// Converts to canonical CSR: zeros dropped, indices sorted ascending.
CsrMatrix dense_to_csr(const DenseMatrix& m);

/// Exact inverse of dense_to_csr on canonical inputs. Validates structure.
DenseMatrix csr_to_dense(const CsrMatrix& m);

/// SplitMix64: the fixed, seedable generator behind all reproducible inputs.
/// The algorithm is pinned (Steele et al. constants) so matrices regenerate
/// bit-identically across runs and across reimplementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) from the top 53 bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Deterministic random matrix at the target zero fraction. Elements are
/// zeroed by an independent Bernoulli draw per element (row-major order);
/// surviving elements are uniform over [-128,127]\{0} for Int8 and
/// [-1,1]\{0} for Float32. Throws std::invalid_argument unless
/// sparsity_fraction is in [0, 1].
DenseMatrix generate_matrix(std::size_t rows, std::size_t cols,
                            ElementPrecision precision, double sparsity_fraction,
                            std::uint64_t seed);

}  // namespace fades
