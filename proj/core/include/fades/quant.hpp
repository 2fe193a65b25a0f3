#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fades {

/// Per-output-channel requantization parameters: fixed-point multiplier in
/// Q0.31, power-of-two shift and an int32 bias added before scaling.
struct ChannelScale {
  std::int32_t multiplier = 0;  // Q0.31, must be >= 0
  int shift = 0;                // in [-31, 31]
  std::int32_t bias = 0;
};

/// Stage-3 scaling parameters. zero_point_rhs applies to the streamed-in
/// activation matrix B (weights are symmetric, zero point 0); zero_point_out
/// and the clamp bounds shape the int8 output.
struct QuantParams {
  std::int32_t zero_point_rhs = 0;  // int8 value widened to 32 bits
  std::int32_t zero_point_out = 0;
  std::int32_t clamp_min = -128;
  std::int32_t clamp_max = 127;
  std::vector<ChannelScale> channels;  // one per output channel (A row)
};

/// Throws std::invalid_argument if fields violate their ranges
/// (multiplier in [0, 2^31-1], shift in [-31, 31], clamp_min <= clamp_max,
/// zero points and clamps representable as int8).
void validate_quant_params(const QuantParams& qp);

/// Saturating rounding doubling high multiply: the high 32 bits of 2*a*b
/// with round-to-nearest. The one overflow case a = b = INT32_MIN saturates
/// to INT32_MAX. Total function, commutative.
std::int32_t srdhm(std::int32_t a, std::int32_t b);

/// Arithmetic right shift by exponent in [0, 31] with round-to-nearest,
/// ties away from zero.
std::int32_t rounding_rshift(std::int32_t x, int exponent);

/// Multiplies by the fixed-point (multiplier, shift) pair: left-shift before
/// the doubling high multiply for positive shift, rounding right shift after
/// it for negative shift.
std::int32_t multiply_by_quantized_multiplier(std::int32_t x,
                                              std::int32_t multiplier, int shift);

/// Full per-channel pipeline: bias add, fixed-point scale, output zero point,
/// clamp. Saturating throughout; channel must be < channels.size().
std::int8_t requantize(std::int32_t acc, std::size_t channel, const QuantParams& qp);

/// JSON schema:
/// {"zero_point_rhs": int, "zero_point_out": int, "clamp": [int, int],
///  "channels": [{"qm": int, "shift": int, "bias": int}, ...]}
QuantParams quant_params_from_json(const std::string& text);
std::string quant_params_to_json(const QuantParams& qp);
QuantParams load_quant_params(const std::filesystem::path& path);

}  // namespace fades
