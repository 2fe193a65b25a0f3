#include "fades/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fades::reference {

namespace {

using int128 = __int128;

std::int32_t floor_div_shift(int128 num, int shift_bits) {
  // Arithmetic shift of a possibly negative 128-bit value == floor division.
  return static_cast<std::int32_t>(num >> shift_bits);
}

std::int32_t saturate32(int128 v) {
  constexpr int128 lo = std::numeric_limits<std::int32_t>::min();
  constexpr int128 hi = std::numeric_limits<std::int32_t>::max();
  return static_cast<std::int32_t>(std::clamp(v, lo, hi));
}

}  // namespace

std::int32_t srdhm_wide(std::int32_t a, std::int32_t b) {
  if (a == b && a == std::numeric_limits<std::int32_t>::min()) {
    return std::numeric_limits<std::int32_t>::max();
  }
  const int128 doubled = int128{2} * a * b;
  return floor_div_shift(doubled + (int128{1} << 31), 32);
}

std::int32_t rounding_rshift_wide(std::int32_t x, int exponent) {
  if (exponent < 0 || exponent > 31) {
    throw std::invalid_argument("rounding_rshift_wide: exponent out of range");
  }
  if (exponent == 0) return x;
  const int128 mag = x < 0 ? -int128{x} : int128{x};
  const int128 q = (2 * mag + (int128{1} << exponent)) >> (exponent + 1);
  return static_cast<std::int32_t>(x < 0 ? -q : q);
}

std::int8_t requantize_wide(std::int32_t acc, std::size_t channel,
                            const QuantParams& qp) {
  if (channel >= qp.channels.size()) {
    throw std::out_of_range("requantize_wide: channel out of range");
  }
  const ChannelScale& ch = qp.channels[channel];
  const std::int32_t biased = saturate32(int128{acc} + ch.bias);
  std::int32_t scaled;
  if (ch.shift > 0) {
    const std::int32_t shifted = saturate32(int128{biased} << ch.shift);
    scaled = srdhm_wide(shifted, ch.multiplier);
  } else {
    scaled = rounding_rshift_wide(srdhm_wide(biased, ch.multiplier), -ch.shift);
  }
  const std::int32_t out =
      std::clamp(scaled + qp.zero_point_out, qp.clamp_min, qp.clamp_max);
  return static_cast<std::int8_t>(out);
}

std::vector<std::int32_t> gemm_int32(const DenseMatrix& a, const DenseMatrix& b,
                                     std::int32_t zero_point_rhs) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  if (b.rows() != m) throw std::invalid_argument("gemm_int32: shape mismatch");
  std::vector<std::int32_t> c(n * p, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      std::int32_t acc = 0;
      for (std::size_t k = 0; k < m; ++k) {
        acc += static_cast<std::int32_t>(a.i8(i, k)) *
               (static_cast<std::int32_t>(b.i8(k, j)) - zero_point_rhs);
      }
      c[i * p + j] = acc;
    }
  }
  return c;
}

std::vector<double> gemm_f64(const DenseMatrix& a, const DenseMatrix& b,
                             std::int32_t zero_point_rhs) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  if (b.rows() != m) throw std::invalid_argument("gemm_f64: shape mismatch");
  const double zp = static_cast<double>(static_cast<float>(zero_point_rhs));
  std::vector<double> c(n * p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        acc += static_cast<double>(a.f32(i, k)) *
               (static_cast<double>(b.f32(k, j)) - zp);
      }
      c[i * p + j] = acc;
    }
  }
  return c;
}

std::vector<double> gemm_abs_bound(const DenseMatrix& a, const DenseMatrix& b,
                                   std::int32_t zero_point_rhs) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  if (b.rows() != m) throw std::invalid_argument("gemm_abs_bound: shape mismatch");
  const double zp = static_cast<double>(static_cast<float>(zero_point_rhs));
  std::vector<double> c(n * p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        acc += std::abs(static_cast<double>(a.f32(i, k)) *
                        (static_cast<double>(b.f32(k, j)) - zp));
      }
      c[i * p + j] = acc;
    }
  }
  return c;
}

ResultMatrix execute_int8(const DenseMatrix& a, const DenseMatrix& b,
                          const AcceleratorConfig& cfg, const QuantParams& qp) {
  if (a.precision() != ElementPrecision::Int8 ||
      b.precision() != ElementPrecision::Int8) {
    throw std::invalid_argument("execute_int8: inputs must be Int8");
  }
  const std::size_t n = a.rows(), p = b.cols();
  const std::vector<std::int32_t> raw = gemm_int32(a, b, qp.zero_point_rhs);
  const bool scaled = cfg.scale;

  ResultMatrix out;
  out.rows = cfg.trans ? p : n;
  out.cols = cfg.trans ? n : p;
  out.transposed = cfg.trans;
  out.kind = scaled ? ResultKind::Int8 : ResultKind::Int32;
  if (scaled) {
    out.i8.resize(n * p);
  } else {
    out.i32.resize(n * p);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t idx = out.buffer_index(i, j);
      if (scaled) {
        out.i8[idx] = requantize_wide(raw[i * p + j], i, qp);
      } else {
        out.i32[idx] = raw[i * p + j];
      }
    }
  }
  return out;
}

}  // namespace fades::reference
