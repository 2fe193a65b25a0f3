#pragma once

#include <cstdint>
#include <vector>

#include "fades/engine.hpp"
#include "fades/matrix.hpp"
#include "fades/quant.hpp"

namespace fades::reference {

// Independent verification path: plain triple-loop matrix products and a
// 128-bit integer requantizer with the rounding expressed as floor
// divisions. Deliberately shares no code with the engine or quant pipeline
// so the two routes check each other.

/// srdhm computed as floor((2ab + 2^31) / 2^32) in 128-bit arithmetic,
/// with the single saturation corner a = b = INT32_MIN.
std::int32_t srdhm_wide(std::int32_t a, std::int32_t b);

/// Round-to-nearest right shift, ties away from zero, computed as
/// sign(x) * floor((2|x| + 2^e) / 2^(e+1)).
std::int32_t rounding_rshift_wide(std::int32_t x, int exponent);

/// Whole requantization pipeline in 128-bit arithmetic. Mirrors the
/// production pipeline's saturation points (bias add and pre-multiply left
/// shift saturate to int32) but derives every rounding independently.
std::int8_t requantize_wide(std::int32_t acc, std::size_t channel,
                            const QuantParams& qp);

/// acc[i][j] = sum_k A[i][k] * (B[k][j] - zero_point_rhs), int32, row-major.
std::vector<std::int32_t> gemm_int32(const DenseMatrix& a, const DenseMatrix& b,
                                     std::int32_t zero_point_rhs);

/// Double-precision accumulation of the float kernel, plus the matching
/// sum of absolute terms for error bounds.
std::vector<double> gemm_f64(const DenseMatrix& a, const DenseMatrix& b,
                             std::int32_t zero_point_rhs);
std::vector<double> gemm_abs_bound(const DenseMatrix& a, const DenseMatrix& b,
                                   std::int32_t zero_point_rhs);

/// Oracle twin of engine execute() for Int8 workloads: triple-loop GEMM plus
/// the wide requantizer, honoring scale/trans. CSR callers convert with
/// csr_to_dense first.
ResultMatrix execute_int8(const DenseMatrix& a, const DenseMatrix& b,
                          const AcceleratorConfig& cfg, const QuantParams& qp);

}  // namespace fades::reference
