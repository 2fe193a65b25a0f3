#include <benchmark/benchmark.h>

#include "fades/engine.hpp"
#include "fades/matrix.hpp"
#include "fades/perf_model.hpp"
#include "fades/quant.hpp"

using namespace fades;

namespace {

AcceleratorConfig bench_cfg(ElementPrecision prec, std::uint32_t pes,
                            std::uint32_t cores = 1) {
  AcceleratorConfig cfg;
  cfg.precision = prec;
  cfg.pes = pes;
  cfg.cores = cores;
  return cfg;
}

QuantParams bench_qp(std::size_t channels) {
  QuantParams qp;
  qp.zero_point_rhs = 3;
  qp.channels.resize(channels, ChannelScale{(1 << 30) + 12345, -7, 100});
  return qp;
}

void BM_ExecuteInt8Dense(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = generate_matrix(dim, dim, ElementPrecision::Int8, 0.0, 1);
  const DenseMatrix b = generate_matrix(dim, dim, ElementPrecision::Int8, 0.0, 2);
  AcceleratorConfig cfg = bench_cfg(ElementPrecision::Int8, 32);
  cfg.scale = true;
  const QuantParams qp = bench_qp(dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(execute(a, b, cfg, qp));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim * dim);
}
BENCHMARK(BM_ExecuteInt8Dense)->Arg(64)->Arg(128)->Arg(256);

void BM_ExecuteInt8Spmm90(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const CsrMatrix a =
      dense_to_csr(generate_matrix(dim, dim, ElementPrecision::Int8, 0.9, 1));
  const DenseMatrix b = generate_matrix(dim, dim, ElementPrecision::Int8, 0.0, 2);
  const AcceleratorConfig cfg = bench_cfg(ElementPrecision::Int8, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(execute(a, b, cfg));
  }
  state.SetItemsProcessed(state.iterations() * a.nnz() * dim);
}
BENCHMARK(BM_ExecuteInt8Spmm90)->Arg(128)->Arg(256);

void BM_ExecuteF32Dense(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = generate_matrix(dim, dim, ElementPrecision::Float32, 0.0, 1);
  const DenseMatrix b = generate_matrix(dim, dim, ElementPrecision::Float32, 0.0, 2);
  const AcceleratorConfig cfg = bench_cfg(ElementPrecision::Float32, 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(execute(a, b, cfg));
  }
  state.SetItemsProcessed(state.iterations() * dim * dim * dim);
}
BENCHMARK(BM_ExecuteF32Dense)->Arg(64)->Arg(128);

void BM_MultiCore(benchmark::State& state) {
  const std::size_t dim = 256;
  const DenseMatrix a = generate_matrix(dim, dim, ElementPrecision::Int8, 0.0, 1);
  const DenseMatrix b = generate_matrix(dim, dim, ElementPrecision::Int8, 0.0, 2);
  const AcceleratorConfig cfg = bench_cfg(
      ElementPrecision::Int8, 32, static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(execute(a, b, cfg));
  }
}
BENCHMARK(BM_MultiCore)->Arg(1)->Arg(4);

void BM_Requantize(benchmark::State& state) {
  const QuantParams qp = bench_qp(1);
  std::int32_t acc = -123456;
  for (auto _ : state) {
    benchmark::DoNotOptimize(requantize(acc, 0, qp));
    acc += 977;
  }
}
BENCHMARK(BM_Requantize);

void BM_PackInt8(benchmark::State& state) {
  std::vector<std::int8_t> elems(4096);
  SplitMix64 rng(9);
  for (auto& e : elems) e = static_cast<std::int8_t>(rng.next());
  for (auto _ : state) {
    benchmark::DoNotOptimize(pack(std::span<const std::int8_t>(elems)));
  }
  state.SetBytesProcessed(state.iterations() * elems.size());
}
BENCHMARK(BM_PackInt8);

void BM_DenseToCsr(benchmark::State& state) {
  const DenseMatrix m = generate_matrix(512, 512, ElementPrecision::Int8, 0.9, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense_to_csr(m));
  }
}
BENCHMARK(BM_DenseToCsr);

void BM_EstimateCycles(benchmark::State& state) {
  Workload w;
  w.n = w.m = w.p = 1024;
  w.spmm = true;
  w.sparsity = 0.9;
  const AcceleratorConfig cfg = bench_cfg(ElementPrecision::Int8, 32, 4);
  const StageTrace trace = synthesize_trace(w, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_cycles(trace, cfg, MachineParams{}));
  }
}
BENCHMARK(BM_EstimateCycles);

}  // namespace

BENCHMARK_MAIN();
