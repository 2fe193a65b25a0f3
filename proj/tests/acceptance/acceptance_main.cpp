// Acceptance suite: exercises every gating requirement end to end and prints
// one PASS/FAIL line per criterion. Exit code 0 only when everything passes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fades/engine.hpp"
#include "fades/matrix.hpp"
#include "fades/perf_model.hpp"
#include "fades/quant.hpp"
#include "fades/reference.hpp"
#include "support/helpers.hpp"

using namespace fades;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using CriterionFn = std::function<Outcome()>;

Workload cube(std::size_t dim, double sparsity, bool spmm) {
  Workload w;
  w.n = w.m = w.p = dim;
  w.sparsity = sparsity;
  w.spmm = spmm;
  return w;
}

AcceleratorConfig model_cfg(std::uint32_t cores, std::uint32_t pes) {
  AcceleratorConfig cfg;
  cfg.cores = cores;
  cfg.pes = pes;
  cfg.scale = true;
  return cfg;
}

double modeled_cycles(const Workload& w, const AcceleratorConfig& cfg,
                      const MachineParams& mp = {}) {
  return estimate_cycles(synthesize_trace(w, cfg), cfg, mp).total_cycles;
}

// --- Criterion 1: bit-exact oracle equivalence over randomized cases. ---
Outcome oracle_equivalence() {
  SplitMix64 rng(0xFADE5u);
  const std::array<double, 4> sparsities = {0.0, 0.5, 0.7, 0.9};
  const std::array<std::uint32_t, 3> pes = {2, 8, 32};
  const std::array<std::uint32_t, 2> cores = {1, 4};
  const std::array<std::uint32_t, 2> prs = {1, 2};
  const std::array<std::int32_t, 3> zps = {-7, 0, 11};

  const int kCases = 512;
  int mismatches = 0;
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = 1 + rng.next() % 256;
    const std::size_t m = 1 + rng.next() % 256;
    const std::size_t p = 1 + rng.next() % 256;
    AcceleratorConfig cfg;
    cfg.precision = ElementPrecision::Int8;
    cfg.pes = pes[rng.next() % pes.size()];
    cfg.cores = cores[rng.next() % cores.size()];
    cfg.parallel_rows = prs[rng.next() % prs.size()];
    cfg.trans = rng.next() % 2 == 0;
    cfg.scale = rng.next() % 2 == 0;
    const double s = sparsities[rng.next() % sparsities.size()];
    const std::int32_t zp = zps[rng.next() % zps.size()];

    const DenseMatrix a = generate_matrix(n, m, ElementPrecision::Int8, s, rng.next());
    const DenseMatrix b = generate_matrix(m, p, ElementPrecision::Int8, 0.0, rng.next());
    QuantParams qp;
    qp.zero_point_rhs = zp;
    if (cfg.scale) qp = testing::random_quant_params(n, rng, zp);

    const ResultMatrix want = reference::execute_int8(a, b, cfg, qp);
    const ExecuteResult got = execute(a, b, cfg, qp);
    if (got.c != want) ++mismatches;
  }
  std::ostringstream detail;
  detail << kCases << " randomized cases, " << mismatches << " mismatches";
  return {mismatches == 0, detail.str()};
}

// --- Criterion 2: requantize == 128-bit oracle on the exhaustive sweep. ---
Outcome requantization_conformance() {
  constexpr std::int32_t kMin = std::numeric_limits<std::int32_t>::min();
  constexpr std::int32_t kMax = std::numeric_limits<std::int32_t>::max();
  if (srdhm(kMin, kMin) != kMax || reference::srdhm_wide(kMin, kMin) != kMax) {
    return {false, "srdhm saturation corner disagrees"};
  }

  SplitMix64 rng(0xC0FFEEu);
  std::uint64_t checked = 0;
  for (int triple = 0; triple < 64; ++triple) {
    QuantParams qp;
    ChannelScale ch;
    ch.multiplier = static_cast<std::int32_t>(rng.next() & 0x7FFFFFFF);
    ch.shift = static_cast<int>(rng.next() % 31) - 15;
    ch.bias = static_cast<std::int32_t>(rng.next() % (1u << 21)) - (1 << 20);
    qp.channels = {ch};
    qp.zero_point_out = static_cast<std::int32_t>(rng.next() % 21) - 10;
    for (std::int32_t acc = -32768; acc < 32768; ++acc) {
      if (requantize(acc, 0, qp) != reference::requantize_wide(acc, 0, qp)) {
        std::ostringstream detail;
        detail << "mismatch at acc=" << acc << " qm=" << ch.multiplier
               << " shift=" << ch.shift << " bias=" << ch.bias;
        return {false, detail.str()};
      }
      ++checked;
    }
  }
  std::ostringstream detail;
  detail << checked << " (acc, qm, shift, bias) points bit-exact";
  return {true, detail.str()};
}

// --- Criterion 3: SPMM/GEMM fusion equivalence. ---
Outcome fusion_equivalence() {
  SplitMix64 rng(0xBEEFu);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.next() % 96;
    const std::size_t m = 1 + rng.next() % 96;
    const std::size_t p = 1 + rng.next() % 96;
    const double s = 0.3 + 0.6 * rng.next_unit();
    AcceleratorConfig cfg;
    cfg.pes = 8;
    cfg.scale = i % 2 == 0;
    const DenseMatrix a = generate_matrix(n, m, ElementPrecision::Int8, s, rng.next());
    const DenseMatrix b = generate_matrix(m, p, ElementPrecision::Int8, 0.0, rng.next());
    QuantParams qp;
    qp.zero_point_rhs = 11;
    if (cfg.scale) qp = testing::random_quant_params(n, rng, 11);
    if (execute(a, b, cfg, qp).c != execute(dense_to_csr(a), b, cfg, qp).c) {
      return {false, "int8 dense/csr outputs differ at case " + std::to_string(i)};
    }
  }

  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.next() % 96;
    const std::size_t m = 1 + rng.next() % 96;
    const std::size_t p = 1 + rng.next() % 96;
    const double s = 0.3 + 0.6 * rng.next_unit();
    AcceleratorConfig cfg;
    cfg.pes = 8;
    cfg.precision = ElementPrecision::Float32;
    const DenseMatrix a = generate_matrix(n, m, ElementPrecision::Float32, s, rng.next());
    const DenseMatrix b = generate_matrix(m, p, ElementPrecision::Float32, 0.0, rng.next());
    const ResultMatrix dense = execute(a, b, cfg).c;
    const ResultMatrix sparse = execute(dense_to_csr(a), b, cfg).c;
    const std::vector<double> bound = reference::gemm_abs_bound(a, b, 0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        const double tol = 1e-4 * bound[r * p + c] + 1e-9;
        if (std::abs(dense.at_f32(r, c) - sparse.at_f32(r, c)) > tol) {
          return {false, "float dense/csr divergence beyond 1e-4 relative"};
        }
      }
    }
  }
  return {true, "100 int8 cases bit-exact, 100 float cases within 1e-4 relative"};
}

// --- Criterion 4: float determinism across repeated and concurrent runs. ---
Outcome float_determinism() {
  const DenseMatrix a = generate_matrix(128, 128, ElementPrecision::Float32, 0.5, 404);
  const DenseMatrix b = generate_matrix(128, 128, ElementPrecision::Float32, 0.0, 405);
  for (std::uint32_t cc : {1u, 4u}) {
    AcceleratorConfig cfg;
    cfg.precision = ElementPrecision::Float32;
    cfg.pes = 32;
    cfg.cores = cc;  // 4 cores run concurrently
    const ExecuteResult first = execute(a, b, cfg);
    for (int run = 1; run < 10; ++run) {
      if (execute(a, b, cfg).c != first.c) {
        return {false, "run " + std::to_string(run) + " differed at cores=" +
                           std::to_string(cc)};
      }
    }
  }
  return {true, "10 runs bit-identical at 1 core and at 4 concurrent cores"};
}

// --- Criterion 5: modeled PE scaling on dense 1024^3. ---
Outcome pe_scaling_ratio() {
  const double c32 = modeled_cycles(cube(1024, 0.0, false), model_cfg(1, 32));
  const double c128 = modeled_cycles(cube(1024, 0.0, false), model_cfg(1, 128));
  const double ratio = c32 / c128;
  std::ostringstream detail;
  detail << "(1,32)/(1,128) = " << ratio << ", target 4.0 +/- 10%";
  return {ratio >= 3.6 && ratio <= 4.4, detail.str()};
}

// --- Criterion 6: modeled multi-core ratios. ---
Outcome multicore_ratios() {
  const std::array<AcceleratorConfig, 2> cfgs = {model_cfg(1, 128), model_cfg(4, 32)};
  const auto sparse = compare_multicore(cube(1024, 0.9, true), cfgs, {});
  const double sparse_ratio = sparse[0].wall_time_s / sparse[1].wall_time_s;
  const auto dense = compare_multicore(cube(1024, 0.0, false), cfgs, {});
  const double dense_ratio = dense[0].wall_time_s / dense[1].wall_time_s;
  std::ostringstream detail;
  detail << "90% sparse (1,128)/(4,32) = " << sparse_ratio
         << " (need >= 1.5); dense = " << dense_ratio << " (need 0.9..1.3)";
  return {sparse_ratio >= 1.5 && dense_ratio >= 0.9 && dense_ratio <= 1.3,
          detail.str()};
}

// --- Criterion 7: sparse mode never loses to dense at 50% sparsity. ---
Outcome sparse_crossover() {
  const AcceleratorConfig cfg = model_cfg(1, 32);  // default single core
  const double dense = modeled_cycles(cube(1024, 0.0, false), cfg);
  const double sparse50 = modeled_cycles(cube(1024, 0.5, true), cfg);
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {0.0, 0.25, 0.5, 0.75, 0.9}) {
    const double c = modeled_cycles(cube(1024, s, true), cfg);
    if (c > prev) monotone = false;
    prev = c;
  }
  std::ostringstream detail;
  detail << "sparse@50% = " << sparse50 << " cycles vs dense = " << dense
         << "; sweep monotone non-increasing = " << (monotone ? "yes" : "no");
  return {sparse50 <= dense && monotone, detail.str()};
}

// --- Criterion 8: reconfiguration economics. ---
Outcome reconfiguration_economics() {
  ReconfigParams rp;
  const double ratio = rp.full_time_s / rp.partial_time_s;
  const bool ratio_ok = std::abs(ratio - 200.0 / 30.0) < 1e-12;

  SplitMix64 rng(2);
  bool vfx_zero = true;
  for (int i = 0; i < 20; ++i) {
    std::vector<ElementPrecision> plan(1 + rng.next() % 12);
    for (auto& layer : plan) {
      layer = rng.next() % 2 ? ElementPrecision::Int8 : ElementPrecision::Float32;
    }
    ReconfigParams vfx = rp;
    vfx.strategy = ReconfigStrategy::VFX;
    if (reconfig_cost(plan, vfx).total_overhead_s != 0.0) vfx_zero = false;
  }
  std::ostringstream detail;
  detail << "FR/DFX per-switch ratio = " << ratio
         << " (target 6.67); VFX overhead identically zero = "
         << (vfx_zero ? "yes" : "no");
  return {ratio_ok && vfx_zero, detail.str()};
}

// --- Criterion 9: calibration sanity against measured wall times. ---
Outcome calibration_sanity() {
  const AcceleratorConfig cfg = model_cfg(1, 128);
  const double cycles_1024 = modeled_cycles(cube(1024, 0.0, false), cfg);
  MachineParams mp;
  mp.efficiency = cycles_1024 / (mp.clock_hz * 0.01658);  // fit on 16.58 ms
  const double t512_ms =
      estimate_cycles(synthesize_trace(cube(512, 0.0, false), cfg), cfg, mp)
          .wall_time_s *
      1e3;
  const double rel_err = std::abs(t512_ms - 3.618) / 3.618;
  std::ostringstream detail;
  detail << "fitted efficiency = " << mp.efficiency << ", predicted 512^3 = "
         << t512_ms << " ms vs measured 3.618 ms (" << rel_err * 100.0
         << "% error, budget 25%)";
  return {rel_err <= 0.25, detail.str()};
}

// --- Criterion 10: property suite with >= 10^4 generated cases. ---
Outcome property_suite() {
  SplitMix64 rng(0xAB1Eu);
  std::uint64_t cases = 0;

  // Pack/unpack round trip, all residues mod 4.
  for (int i = 0; i < 3000; ++i) {
    const std::size_t len = rng.next() % 33;
    std::vector<std::int8_t> elems(len);
    for (auto& e : elems) e = static_cast<std::int8_t>(rng.next());
    if (unpack_int8(pack(std::span<const std::int8_t>(elems))) != elems) {
      return {false, "pack/unpack int8 round trip failed"};
    }
    ++cases;
  }
  for (int i = 0; i < 1000; ++i) {
    const std::size_t len = rng.next() % 17;
    std::vector<float> elems(len);
    for (auto& e : elems) e = static_cast<float>(rng.next_unit() * 2 - 1);
    if (unpack_float(pack(std::span<const float>(elems))) != elems) {
      return {false, "pack/unpack float round trip failed"};
    }
    ++cases;
  }

  // CSR round trips both directions.
  for (int i = 0; i < 3000; ++i) {
    const std::size_t r = 1 + rng.next() % 24, c = 1 + rng.next() % 24;
    const auto prec =
        i % 2 == 0 ? ElementPrecision::Int8 : ElementPrecision::Float32;
    const DenseMatrix m = generate_matrix(r, c, prec, rng.next_unit(), rng.next());
    const CsrMatrix csr = dense_to_csr(m);
    if (csr_to_dense(csr) != m || dense_to_csr(csr_to_dense(csr)) != csr) {
      return {false, "csr round trip failed"};
    }
    ++cases;
  }

  // Requantize monotonicity in the accumulator.
  for (int i = 0; i < 1000; ++i) {
    const QuantParams qp = testing::random_quant_params(1, rng);
    std::array<std::int32_t, 3> accs;
    for (auto& a : accs) a = static_cast<std::int32_t>(rng.next() % 65536) - 32768;
    std::sort(accs.begin(), accs.end());
    if (requantize(accs[0], 0, qp) > requantize(accs[1], 0, qp) ||
        requantize(accs[1], 0, qp) > requantize(accs[2], 0, qp)) {
      return {false, "requantize monotonicity violated"};
    }
    cases += 2;
  }

  // TRANS is a pure permutation; tile count never changes values;
  // padded lanes stay neutral under non-zero zero points.
  for (int i = 0; i < 400; ++i) {
    const std::size_t n = 1 + rng.next() % 12;
    const std::size_t m = 1 + rng.next() % 12;
    const std::size_t p = 1 + rng.next() % 12;
    const DenseMatrix a =
        generate_matrix(n, m, ElementPrecision::Int8, rng.next_unit(), rng.next());
    const DenseMatrix b =
        generate_matrix(m, p, ElementPrecision::Int8, 0.0, rng.next());
    AcceleratorConfig cfg;
    cfg.pes = 4;
    cfg.scale = true;
    QuantParams qp = testing::random_quant_params(n, rng, -7);

    AcceleratorConfig tcfg = cfg;
    tcfg.trans = true;
    if (untranspose(execute(a, b, tcfg, qp).c) != execute(a, b, cfg, qp).c) {
      return {false, "trans permutation identity failed"};
    }
    ++cases;

    AcceleratorConfig wide = cfg;
    wide.pes = 32;
    if (execute(a, b, wide, qp).c != execute(a, b, cfg, qp).c) {
      return {false, "tile-count independence failed"};
    }
    ++cases;

    // Zero-pad the reduction dimension to a multiple of four.
    const std::size_t m_pad = (m + 3) / 4 * 4;
    std::vector<std::int8_t> ap(n * m_pad, 0), bp(m_pad * p, 0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < m; ++k) ap[r * m_pad + k] = a.i8(r, k);
    }
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < p; ++j) bp[k * p + j] = b.i8(k, j);
    }
    const DenseMatrix a_pad = DenseMatrix::from_int8(n, m_pad, std::move(ap));
    const DenseMatrix b_pad = DenseMatrix::from_int8(m_pad, p, std::move(bp));
    if (execute(a_pad, b_pad, cfg, qp).c != execute(a, b, cfg, qp).c) {
      return {false, "padded-lane neutrality failed"};
    }
    ++cases;
  }

  std::ostringstream detail;
  detail << cases << " generated cases across six property families";
  return {cases >= 10000, detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, CriterionFn>> criteria = {
      {"oracle-equivalence", oracle_equivalence},
      {"requantization-conformance", requantization_conformance},
      {"spmm-gemm-fusion", fusion_equivalence},
      {"float-determinism", float_determinism},
      {"cycle-model-pe-scaling", pe_scaling_ratio},
      {"cycle-model-multicore", multicore_ratios},
      {"sparse-beats-dense-crossover", sparse_crossover},
      {"reconfiguration-economics", reconfiguration_economics},
      {"calibration-sanity", calibration_sanity},
      {"property-suite", property_suite},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %s: %s (%.2fs)\n", outcome.pass ? "PASS" : "FAIL", name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
