#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fades/matrix.hpp"
#include "fades/quant.hpp"

namespace fades {

/// Kernel admission: GemmOnly accepts dense A, SpmmOnly accepts CSR A,
/// Fused dispatches per call on the representation it is given.
enum class ExecMode { GemmOnly, SpmmOnly, Fused };

/// Accelerator build options. Ranges follow the hardware configuration
/// space: 1-4 cores, 2-256 PEs (power of two), 1-2 parallel row pipelines.
struct AcceleratorConfig {
  std::uint32_t cores = 1;
  std::uint32_t pes = 32;
  std::uint32_t parallel_rows = 1;
  ExecMode mode = ExecMode::Fused;
  bool trans = false;  // emit C column-major
  bool scale = false;  // run stage 3 requantization (Int8 only)
  ElementPrecision precision = ElementPrecision::Int8;
  std::uint32_t fadd_latency = 6;  // interleaved float partial accumulators
  std::uint32_t fifo_depth = 64;   // inter-stage FIFO sizing (informational)
};

void validate_config(const AcceleratorConfig& cfg);

/// Column tiling of B: every tile is pes columns wide except possibly the
/// last one.
struct TilePlan {
  std::size_t tile_width = 0;
  std::size_t tile_count = 0;
  std::size_t last_tile_width = 0;
  std::size_t total_cols = 0;

  std::size_t width_of(std::size_t t) const {
    return t + 1 == tile_count ? last_tile_width : tile_width;
  }
  std::size_t first_col_of(std::size_t t) const { return t * tile_width; }
};

TilePlan make_tile_plan(std::size_t cols, std::uint32_t pes);

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Contiguous block of A rows owned by one core.
struct CoreAssignment {
  std::uint32_t core_id = 0;
  RowRange rows;
};

/// Even split of [0, n_rows) into `cores` contiguous blocks whose sizes
/// differ by at most one. Trailing cores may receive empty ranges.
std::vector<CoreAssignment> split_across_cores(std::size_t n_rows,
                                               std::uint32_t cores);

/// One element of the stage-1 stream. Dense A arrives as packed 32-bit words
/// (lanes along the inner dimension); CSR A arrives as (column, value)
/// entries. Row boundaries are marked explicitly.
struct AEvent {
  enum class Kind : std::uint8_t { RowStart, Word, CsrEntry };
  Kind kind = Kind::RowStart;
  std::uint32_t row = 0;      // global A row
  std::uint32_t k = 0;        // Word: k of lane 0; CsrEntry: column index
  std::uint32_t payload = 0;  // Word: packed word; CsrEntry: value bits
};

std::vector<AEvent> stage1_read(const DenseMatrix& a, RowRange range);
std::vector<AEvent> stage1_read(const CsrMatrix& a, RowRange range);

/// One buffered tile of B. The dense-kernel path keeps each column packed
/// along k so one A word and one B word feed four lane MACs; the sparse path
/// addresses rows directly.
struct BTile {
  std::size_t first_col = 0;
  std::size_t width = 0;
  std::size_t depth = 0;           // B rows (= M)
  std::size_t words_per_col = 0;   // Int8: ceil(depth / 4)
  std::vector<std::uint32_t> packed;  // Int8 dense path, [col][word]
  std::vector<std::int8_t> i8;        // Int8 sparse path, [k][col]
  std::vector<float> f32;             // Float32 path, [k][col]
};

BTile load_b_tile(const DenseMatrix& b, const TilePlan& plan, std::size_t tile);

/// Raw stage-2 output for one (row block, tile) pair: row-major
/// rows x width accumulators, int32 for Int8 inputs, float otherwise.
struct ComputeBlock {
  std::size_t first_row = 0;
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<std::int32_t> i32;
  std::vector<float> f32;
};

ComputeBlock stage2_compute(std::span<const AEvent> events, const BTile& b,
                            const AcceleratorConfig& cfg,
                            std::int32_t zero_point_rhs, RowRange range);

enum class ResultKind { Int8, Int32, Float32 };

/// Output buffer. With trans unset this is the row-major N x P result;
/// with trans set the buffer holds C column-major (rows/cols swap).
struct ResultMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool transposed = false;
  ResultKind kind = ResultKind::Int32;
  std::vector<std::int8_t> i8;
  std::vector<std::int32_t> i32;
  std::vector<float> f32;

  /// Logical C dimensions (N x P) independent of layout.
  std::size_t logical_rows() const { return transposed ? cols : rows; }
  std::size_t logical_cols() const { return transposed ? rows : cols; }
  std::size_t buffer_index(std::size_t i, std::size_t j) const {
    return transposed ? j * cols + i : i * cols + j;
  }
  std::int8_t at_i8(std::size_t i, std::size_t j) const { return i8[buffer_index(i, j)]; }
  std::int32_t at_i32(std::size_t i, std::size_t j) const { return i32[buffer_index(i, j)]; }
  float at_f32(std::size_t i, std::size_t j) const { return f32[buffer_index(i, j)]; }

  bool operator==(const ResultMatrix& other) const = default;
};

/// Rewrites a column-major result into the row-major layout.
ResultMatrix untranspose(const ResultMatrix& r);

/// Post-scale values for one (row block, tile) pair, ready for assembly.
struct OutputChunk {
  std::size_t first_row = 0;
  std::size_t rows = 0;
  std::size_t first_col = 0;
  std::size_t width = 0;
  std::vector<std::int8_t> i8;
  std::vector<std::int32_t> i32;
  std::vector<float> f32;
};

ResultMatrix stage4_write(std::span<const OutputChunk> chunks, std::size_t n,
                          std::size_t p, ResultKind kind, bool trans);

/// Event counts for one (core, tile) pass; the cycle model consumes these.
struct TileRecord {
  std::uint32_t core = 0;
  std::uint32_t tile = 0;
  std::uint64_t first_col = 0;
  std::uint64_t width = 0;
  std::uint64_t a_value_words = 0;        // 32-bit A value words streamed
  std::uint64_t a_index_words = 0;        // CSR column-index words
  std::uint64_t compute_events = 0;       // words entering stage 2
  std::uint64_t pipeline_events_max = 0;  // heaviest of the PR row pipelines
  std::uint64_t b_elements = 0;           // B elements buffered for the tile
  std::uint64_t c_elements = 0;           // C elements written by the tile
  std::uint64_t lanes_active = 0;         // active A lanes (excl. padding)
  std::uint64_t mac_ops = 0;              // lanes_active x active PEs
  std::uint64_t results_scaled = 0;       // outputs through stage 3 scaling
};

struct StageTrace {
  // Workload echo.
  std::uint64_t n = 0, m = 0, p = 0;
  std::uint64_t nnz = 0;  // dense runs: count of non-zero A elements
  bool spmm = false;
  ElementPrecision precision = ElementPrecision::Int8;
  std::uint32_t cores = 1, pes = 32, parallel_rows = 1;
  // Stage counter totals over all cores and tiles.
  std::uint64_t words_read_a = 0;
  std::uint64_t words_read_idx = 0;
  std::uint64_t words_loaded_b = 0;
  std::uint64_t mac_ops = 0;
  std::uint64_t lanes_active = 0;
  std::uint64_t results_scaled = 0;
  std::uint64_t words_written_c = 0;
  std::vector<TileRecord> tiles;
};

struct ExecuteResult {
  ResultMatrix c;
  StageTrace trace;
};

/// Full pipeline over a dense (GEMM) or CSR (SPMM) weight matrix A against
/// dense B. Preconditions: shapes agree; Int8 requires M <= 65536 so int32
/// accumulators cannot wrap; qp.channels carries one entry per A row exactly
/// when precision is Int8 and scale is set, and stays empty otherwise.
/// Cores run in parallel over disjoint row blocks; output is deterministic.
ExecuteResult execute(const DenseMatrix& a, const DenseMatrix& b,
                      const AcceleratorConfig& cfg, const QuantParams& qp = {});
ExecuteResult execute(const CsrMatrix& a, const DenseMatrix& b,
                      const AcceleratorConfig& cfg, const QuantParams& qp = {});

}  // namespace fades
