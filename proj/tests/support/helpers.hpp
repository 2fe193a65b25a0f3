#pragma once

#include <cstdint>
#include <vector>

#include "fades/engine.hpp"
#include "fades/matrix.hpp"
#include "fades/quant.hpp"

namespace fades::testing {

/// Random but valid per-channel quant params. Multipliers stay in the
/// normalized TFLite range [2^30, 2^31) and shifts in [-8, 8] so the
/// left-shift path is exercised without leaving the representable band.
inline QuantParams random_quant_params(std::size_t channels, SplitMix64& rng,
                                       std::int32_t zero_point_rhs = 0) {
  QuantParams qp;
  qp.zero_point_rhs = zero_point_rhs;
  qp.zero_point_out = static_cast<std::int32_t>(rng.next() % 21) - 10;
  qp.clamp_min = -128;
  qp.clamp_max = 127;
  qp.channels.resize(channels);
  for (ChannelScale& ch : qp.channels) {
    ch.multiplier =
        (1 << 30) + static_cast<std::int32_t>(rng.next() % (1u << 30));
    ch.shift = static_cast<int>(rng.next() % 17) - 8;
    ch.bias = static_cast<std::int32_t>(rng.next() % 65536) - 32768;
  }
  return qp;
}

inline bool results_equal(const ResultMatrix& a, const ResultMatrix& b) {
  return a == b;
}

}  // namespace fades::testing
