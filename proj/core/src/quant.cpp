#include "fades/quant.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fades {

void validate_quant_params(const QuantParams& qp) {
  auto int8_range = [](std::int32_t v) { return v >= -128 && v <= 127; };
  if (!int8_range(qp.zero_point_rhs) || !int8_range(qp.zero_point_out) ||
      !int8_range(qp.clamp_min) || !int8_range(qp.clamp_max)) {
    throw std::invalid_argument("QuantParams: zero points and clamps must fit int8");
  }
  if (qp.clamp_min > qp.clamp_max) {
    throw std::invalid_argument("QuantParams: clamp_min must be <= clamp_max");
  }
  for (const ChannelScale& ch : qp.channels) {
    if (ch.multiplier < 0) {
      throw std::invalid_argument("QuantParams: multiplier must be non-negative");
    }
    if (ch.shift < -31 || ch.shift > 31) {
      throw std::invalid_argument("QuantParams: shift must be in [-31, 31]");
    }
  }
}

std::int32_t srdhm(std::int32_t a, std::int32_t b) {
  constexpr std::int32_t kMin = std::numeric_limits<std::int32_t>::min();
  const bool overflow = a == b && a == kMin;
  const std::int64_t ab = static_cast<std::int64_t>(a) * static_cast<std::int64_t>(b);
  const std::int32_t nudge = ab >= 0 ? (1 << 30) : (1 - (1 << 30));
  const auto high = static_cast<std::int32_t>((ab + nudge) / (std::int64_t{1} << 31));
  return overflow ? std::numeric_limits<std::int32_t>::max() : high;
}

std::int32_t rounding_rshift(std::int32_t x, int exponent) {
  if (exponent < 0 || exponent > 31) {
    throw std::invalid_argument("rounding_rshift: exponent must be in [0, 31]");
  }
  if (exponent == 0) return x;
  const std::int32_t mask = static_cast<std::int32_t>((std::int64_t{1} << exponent) - 1);
  const std::int32_t remainder = x & mask;
  const std::int32_t threshold = (mask >> 1) + (x < 0 ? 1 : 0);
  return (x >> exponent) + (remainder > threshold ? 1 : 0);
}

std::int32_t multiply_by_quantized_multiplier(std::int32_t x,
                                              std::int32_t multiplier, int shift) {
  if (shift > 0) {
    // Left shift before the multiply. Saturate the widened value so the
    // function stays total; in-range parameters never hit the saturation.
    std::int64_t shifted = static_cast<std::int64_t>(x) << shift;
    shifted = std::clamp<std::int64_t>(shifted,
                                       std::numeric_limits<std::int32_t>::min(),
                                       std::numeric_limits<std::int32_t>::max());
    return srdhm(static_cast<std::int32_t>(shifted), multiplier);
  }
  return rounding_rshift(srdhm(x, multiplier), -shift);
}

std::int8_t requantize(std::int32_t acc, std::size_t channel, const QuantParams& qp) {
  if (channel >= qp.channels.size()) {
    throw std::out_of_range("requantize: channel index out of range");
  }
  const ChannelScale& ch = qp.channels[channel];
  std::int64_t biased = static_cast<std::int64_t>(acc) + ch.bias;
  biased = std::clamp<std::int64_t>(biased, std::numeric_limits<std::int32_t>::min(),
                                    std::numeric_limits<std::int32_t>::max());
  std::int32_t scaled = multiply_by_quantized_multiplier(
      static_cast<std::int32_t>(biased), ch.multiplier, ch.shift);
  scaled += qp.zero_point_out;
  scaled = std::clamp(scaled, qp.clamp_min, qp.clamp_max);
  return static_cast<std::int8_t>(scaled);
}

QuantParams quant_params_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  QuantParams qp;
  qp.zero_point_rhs = j.at("zero_point_rhs").get<std::int32_t>();
  qp.zero_point_out = j.at("zero_point_out").get<std::int32_t>();
  qp.clamp_min = j.at("clamp").at(0).get<std::int32_t>();
  qp.clamp_max = j.at("clamp").at(1).get<std::int32_t>();
  for (const auto& c : j.at("channels")) {
    ChannelScale ch;
    ch.multiplier = c.at("qm").get<std::int32_t>();
    ch.shift = c.at("shift").get<int>();
    ch.bias = c.at("bias").get<std::int32_t>();
    qp.channels.push_back(ch);
  }
  validate_quant_params(qp);
  return qp;
}

std::string quant_params_to_json(const QuantParams& qp) {
  nlohmann::ordered_json j;
  j["zero_point_rhs"] = qp.zero_point_rhs;
  j["zero_point_out"] = qp.zero_point_out;
  j["clamp"] = {qp.clamp_min, qp.clamp_max};
  j["channels"] = nlohmann::ordered_json::array();
  for (const ChannelScale& ch : qp.channels) {
    j["channels"].push_back({{"qm", ch.multiplier}, {"shift", ch.shift}, {"bias", ch.bias}});
  }
  return j.dump(2);
}

QuantParams load_quant_params(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return quant_params_from_json(ss.str());
}

}  // namespace fades
