#include "fades/engine.hpp"

#include <bit>
#include <future>
#include <limits>
#include <stdexcept>

namespace fades {

namespace {

constexpr std::size_t kInt8DepthGuard = 65536;  // |acc| <= M*128*255 < 2^31

bool is_pow2(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::int32_t sext8(std::uint32_t word, unsigned lane) {
  return static_cast<std::int8_t>(static_cast<std::uint8_t>(word >> (8 * lane)));
}

}  // namespace

void validate_config(const AcceleratorConfig& cfg) {
  if (cfg.cores < 1 || cfg.cores > 4) {
    throw std::invalid_argument("config: cores must be in [1, 4]");
  }
  if (cfg.pes < 2 || cfg.pes > 256 || !is_pow2(cfg.pes)) {
    throw std::invalid_argument("config: pes must be a power of two in [2, 256]");
  }
  if (cfg.parallel_rows < 1 || cfg.parallel_rows > 2) {
    throw std::invalid_argument("config: parallel_rows must be 1 or 2");
  }
  if (cfg.fadd_latency < 1) {
    throw std::invalid_argument("config: fadd_latency must be >= 1");
  }
  if (cfg.fifo_depth < 1) {
    throw std::invalid_argument("config: fifo_depth must be >= 1");
  }
}

TilePlan make_tile_plan(std::size_t cols, std::uint32_t pes) {
  TilePlan plan;
  plan.tile_width = pes;
  plan.total_cols = cols;
  plan.tile_count = (cols + pes - 1) / pes;
  plan.last_tile_width = cols == 0 ? 0 : cols - pes * (plan.tile_count - 1);
  return plan;
}

std::vector<CoreAssignment> split_across_cores(std::size_t n_rows,
                                               std::uint32_t cores) {
  if (cores < 1) throw std::invalid_argument("split: cores must be >= 1");
  std::vector<CoreAssignment> out(cores);
  const std::size_t base = n_rows / cores;
  const std::size_t extra = n_rows % cores;
  std::size_t begin = 0;
  for (std::uint32_t c = 0; c < cores; ++c) {
    const std::size_t len = base + (c < extra ? 1 : 0);
    out[c] = CoreAssignment{c, RowRange{begin, begin + len}};
    begin += len;
  }
  return out;
}

std::vector<AEvent> stage1_read(const DenseMatrix& a, RowRange range) {
  const std::size_t m = a.cols();
  std::vector<AEvent> out;
  if (a.precision() == ElementPrecision::Int8) {
    const std::size_t words_per_row = (m + 3) / 4;
    out.reserve(range.size() * (words_per_row + 1));
    for (std::size_t r = range.begin; r < range.end; ++r) {
      out.push_back({AEvent::Kind::RowStart, static_cast<std::uint32_t>(r), 0, 0});
      for (std::size_t w = 0; w < words_per_row; ++w) {
        std::uint32_t word = 0;
        const std::size_t k0 = 4 * w;
        for (unsigned z = 0; z < 4 && k0 + z < m; ++z) {
          word |= static_cast<std::uint32_t>(
                      static_cast<std::uint8_t>(a.i8(r, k0 + z)))
                  << (8 * z);
        }
        out.push_back({AEvent::Kind::Word, static_cast<std::uint32_t>(r),
                       static_cast<std::uint32_t>(k0), word});
      }
    }
  } else {
    out.reserve(range.size() * (m + 1));
    for (std::size_t r = range.begin; r < range.end; ++r) {
      out.push_back({AEvent::Kind::RowStart, static_cast<std::uint32_t>(r), 0, 0});
      for (std::size_t k = 0; k < m; ++k) {
        out.push_back({AEvent::Kind::Word, static_cast<std::uint32_t>(r),
                       static_cast<std::uint32_t>(k),
                       std::bit_cast<std::uint32_t>(a.f32(r, k))});
      }
    }
  }
  return out;
}

std::vector<AEvent> stage1_read(const CsrMatrix& a, RowRange range) {
  std::vector<AEvent> out;
  out.reserve(range.size() + a.nnz());
  for (std::size_t r = range.begin; r < range.end; ++r) {
    out.push_back({AEvent::Kind::RowStart, static_cast<std::uint32_t>(r), 0, 0});
    for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      std::uint32_t bits;
      if (a.precision == ElementPrecision::Int8) {
        bits = static_cast<std::uint32_t>(
            static_cast<std::int32_t>(a.values_i8[k]));
      } else {
        bits = std::bit_cast<std::uint32_t>(a.values_f32[k]);
      }
      out.push_back({AEvent::Kind::CsrEntry, static_cast<std::uint32_t>(r),
                     a.col_idx[k], bits});
    }
  }
  return out;
}

BTile load_b_tile(const DenseMatrix& b, const TilePlan& plan, std::size_t tile) {
  if (tile >= plan.tile_count) {
    throw std::invalid_argument("load_b_tile: tile index out of range");
  }
  BTile t;
  t.first_col = plan.first_col_of(tile);
  t.width = plan.width_of(tile);
  t.depth = b.rows();
  if (b.precision() == ElementPrecision::Int8) {
    t.words_per_col = (t.depth + 3) / 4;
    t.packed.assign(t.width * t.words_per_col, 0u);
    t.i8.assign(t.depth * t.width, 0);
    for (std::size_t k = 0; k < t.depth; ++k) {
      for (std::size_t j = 0; j < t.width; ++j) {
        const std::int8_t v = b.i8(k, t.first_col + j);
        t.i8[k * t.width + j] = v;
        t.packed[j * t.words_per_col + k / 4] |=
            static_cast<std::uint32_t>(static_cast<std::uint8_t>(v))
            << (8 * (k % 4));
      }
    }
  } else {
    t.f32.resize(t.depth * t.width);
    for (std::size_t k = 0; k < t.depth; ++k) {
      for (std::size_t j = 0; j < t.width; ++j) {
        t.f32[k * t.width + j] = b.f32(k, t.first_col + j);
      }
    }
  }
  return t;
}

ComputeBlock stage2_compute(std::span<const AEvent> events, const BTile& b,
                            const AcceleratorConfig& cfg,
                            std::int32_t zero_point_rhs, RowRange range) {
  ComputeBlock block;
  block.first_row = range.begin;
  block.rows = range.size();
  block.width = b.width;

  const bool is_f32 = cfg.precision == ElementPrecision::Float32;
  const std::size_t w = b.width;
  if (is_f32) {
    block.f32.assign(block.rows * w, 0.0f);
  } else {
    block.i32.assign(block.rows * w, 0);
  }

  const float zp_f = static_cast<float>(zero_point_rhs);
  const std::size_t lat = cfg.fadd_latency;
  std::vector<float> partials(is_f32 ? lat * w : 0, 0.0f);
  std::size_t cur_row = std::numeric_limits<std::size_t>::max();
  std::size_t ordinal = 0;

  auto fold_row = [&](std::size_t row) {
    // Partial accumulators combine in ascending index order; the fixed fold
    // keeps float results deterministic and tile-independent.
    float* dst = block.f32.data() + (row - range.begin) * w;
    for (std::size_t j = 0; j < w; ++j) {
      float acc = partials[j];
      for (std::size_t l = 1; l < lat; ++l) acc += partials[l * w + j];
      dst[j] = acc;
    }
  };

  for (const AEvent& e : events) {
    switch (e.kind) {
      case AEvent::Kind::RowStart:
        if (is_f32) {
          if (cur_row != std::numeric_limits<std::size_t>::max()) fold_row(cur_row);
          std::fill(partials.begin(), partials.end(), 0.0f);
          ordinal = 0;
        }
        cur_row = e.row;
        break;
      case AEvent::Kind::Word: {
        if (is_f32) {
          const float a = std::bit_cast<float>(e.payload);
          float* slot = partials.data() + (ordinal % lat) * w;
          const float* brow = b.f32.data() + e.k * w;
          for (std::size_t j = 0; j < w; ++j) slot[j] += a * (brow[j] - zp_f);
          ++ordinal;
        } else {
          std::int32_t* acc = block.i32.data() + (e.row - range.begin) * w;
          const std::size_t word_idx = e.k / 4;
          for (std::size_t j = 0; j < w; ++j) {
            const std::uint32_t bw = b.packed[j * b.words_per_col + word_idx];
            std::int32_t sum = 0;
            for (unsigned z = 0; z < 4; ++z) {
              sum += sext8(e.payload, z) * (sext8(bw, z) - zero_point_rhs);
            }
            acc[j] += sum;
          }
        }
        break;
      }
      case AEvent::Kind::CsrEntry: {
        if (is_f32) {
          const float v = std::bit_cast<float>(e.payload);
          float* slot = partials.data() + (ordinal % lat) * w;
          const float* brow = b.f32.data() + e.k * w;
          for (std::size_t j = 0; j < w; ++j) slot[j] += v * (brow[j] - zp_f);
          ++ordinal;
        } else {
          const auto v = static_cast<std::int32_t>(e.payload);
          std::int32_t* acc = block.i32.data() + (e.row - range.begin) * w;
          const std::int8_t* brow = b.i8.data() + e.k * w;
          for (std::size_t j = 0; j < w; ++j) {
            acc[j] += v * (brow[j] - zero_point_rhs);
          }
        }
        break;
      }
    }
  }
  if (is_f32 && cur_row != std::numeric_limits<std::size_t>::max()) fold_row(cur_row);
  return block;
}

ResultMatrix untranspose(const ResultMatrix& r) {
  if (!r.transposed) return r;
  ResultMatrix out;
  out.rows = r.logical_rows();
  out.cols = r.logical_cols();
  out.transposed = false;
  out.kind = r.kind;
  const std::size_t n = out.rows, p = out.cols;
  auto remap = [&](const auto& src, auto& dst) {
    if (src.empty()) return;
    dst.resize(src.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) dst[i * p + j] = src[j * n + i];
    }
  };
  remap(r.i8, out.i8);
  remap(r.i32, out.i32);
  remap(r.f32, out.f32);
  return out;
}

ResultMatrix stage4_write(std::span<const OutputChunk> chunks, std::size_t n,
                          std::size_t p, ResultKind kind, bool trans) {
  ResultMatrix out;
  out.rows = trans ? p : n;
  out.cols = trans ? n : p;
  out.transposed = trans;
  out.kind = kind;
  switch (kind) {
    case ResultKind::Int8: out.i8.assign(n * p, 0); break;
    case ResultKind::Int32: out.i32.assign(n * p, 0); break;
    case ResultKind::Float32: out.f32.assign(n * p, 0.0f); break;
  }
  for (const OutputChunk& ch : chunks) {
    for (std::size_t r = 0; r < ch.rows; ++r) {
      for (std::size_t c = 0; c < ch.width; ++c) {
        const std::size_t idx =
            out.buffer_index(ch.first_row + r, ch.first_col + c);
        const std::size_t src = r * ch.width + c;
        switch (kind) {
          case ResultKind::Int8: out.i8[idx] = ch.i8[src]; break;
          case ResultKind::Int32: out.i32[idx] = ch.i32[src]; break;
          case ResultKind::Float32: out.f32[idx] = ch.f32[src]; break;
        }
      }
    }
  }
  return out;
}

namespace {

struct CoreWork {
  std::vector<OutputChunk> chunks;
  std::vector<TileRecord> records;
};

struct RowProfile {
  std::vector<std::uint64_t> words;  // A value words per local row
  std::vector<std::uint64_t> lanes;  // active lanes per local row
  std::uint64_t total_words = 0;
  std::uint64_t total_lanes = 0;
  std::uint64_t total_idx_words = 0;
  std::uint64_t pipeline_max(std::uint32_t pr) const {
    if (pr <= 1) return total_words;
    std::uint64_t even = 0, odd = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      (i % 2 == 0 ? even : odd) += words[i];
    }
    return std::max(even, odd);
  }
};

// Per-row word/lane counts for the stage-1 stream of one core. Sparse Int8
// values travel packed four to a 32-bit word within each row, matching the
// dense word framing; Float32 values occupy one word each.
RowProfile profile_rows(const DenseMatrix* dense, const CsrMatrix* csr,
                        ElementPrecision prec, RowRange range) {
  RowProfile prof;
  prof.words.reserve(range.size());
  prof.lanes.reserve(range.size());
  for (std::size_t r = range.begin; r < range.end; ++r) {
    std::uint64_t w = 0, l = 0;
    if (dense != nullptr) {
      const std::uint64_t m = dense->cols();
      w = prec == ElementPrecision::Int8 ? (m + 3) / 4 : m;
      l = m;
    } else {
      const std::uint64_t nr = csr->row_nnz(r);
      w = prec == ElementPrecision::Int8 ? (nr + 3) / 4 : nr;
      l = nr;
      prof.total_idx_words += nr;
    }
    prof.words.push_back(w);
    prof.lanes.push_back(l);
    prof.total_words += w;
    prof.total_lanes += l;
  }
  return prof;
}

CoreWork run_core(const std::vector<AEvent>& events,
                  const std::vector<BTile>& btiles, const AcceleratorConfig& cfg,
                  const QuantParams& qp, RowRange range, std::uint32_t core_id,
                  const RowProfile& prof, bool spmm) {
  CoreWork work;
  const bool scaled =
      cfg.precision == ElementPrecision::Int8 && cfg.scale;
  for (std::size_t t = 0; t < btiles.size(); ++t) {
    const BTile& tile = btiles[t];
    ComputeBlock block =
        stage2_compute(events, tile, cfg, qp.zero_point_rhs, range);

    OutputChunk chunk;
    chunk.first_row = range.begin;
    chunk.rows = range.size();
    chunk.first_col = tile.first_col;
    chunk.width = tile.width;
    if (cfg.precision == ElementPrecision::Float32) {
      chunk.f32 = std::move(block.f32);
    } else if (scaled) {
      chunk.i8.resize(block.rows * block.width);
      for (std::size_t r = 0; r < block.rows; ++r) {
        const std::size_t channel = range.begin + r;
        for (std::size_t j = 0; j < block.width; ++j) {
          chunk.i8[r * block.width + j] =
              requantize(block.i32[r * block.width + j], channel, qp);
        }
      }
    } else {
      chunk.i32 = std::move(block.i32);
    }

    TileRecord rec;
    rec.core = core_id;
    rec.tile = static_cast<std::uint32_t>(t);
    rec.first_col = tile.first_col;
    rec.width = tile.width;
    rec.a_value_words = prof.total_words;
    rec.a_index_words = spmm ? prof.total_idx_words : 0;
    rec.compute_events = prof.total_words;
    rec.pipeline_events_max = prof.pipeline_max(cfg.parallel_rows);
    rec.b_elements = tile.depth * tile.width;
    rec.c_elements = range.size() * tile.width;
    rec.lanes_active = prof.total_lanes;
    rec.mac_ops = prof.total_lanes * tile.width;
    rec.results_scaled = scaled ? range.size() * tile.width : 0;
    work.records.push_back(rec);
    work.chunks.push_back(std::move(chunk));
  }
  return work;
}

ExecuteResult execute_impl(const DenseMatrix* dense, const CsrMatrix* csr,
                           const DenseMatrix& b, const AcceleratorConfig& cfg,
                           const QuantParams& qp) {
  validate_config(cfg);
  validate_quant_params(qp);

  const bool spmm = csr != nullptr;
  if (spmm && cfg.mode == ExecMode::GemmOnly) {
    throw std::invalid_argument("execute: GemmOnly mode rejects CSR input");
  }
  if (!spmm && cfg.mode == ExecMode::SpmmOnly) {
    throw std::invalid_argument("execute: SpmmOnly mode rejects dense input");
  }

  const std::size_t n = spmm ? csr->rows : dense->rows();
  const std::size_t m = spmm ? csr->cols : dense->cols();
  const std::size_t p = b.cols();
  const ElementPrecision a_prec = spmm ? csr->precision : dense->precision();
  if (a_prec != cfg.precision || b.precision() != cfg.precision) {
    throw std::invalid_argument("execute: input precision does not match config");
  }
  if (b.rows() != m) {
    throw std::invalid_argument("execute: shape mismatch, A cols != B rows");
  }
  if (cfg.precision == ElementPrecision::Int8 && m > kInt8DepthGuard) {
    throw std::invalid_argument(
        "execute: Int8 depth guard violated (M must be <= 65536)");
  }
  const bool scaled = cfg.precision == ElementPrecision::Int8 && cfg.scale;
  if (scaled && qp.channels.size() != n) {
    throw std::invalid_argument(
        "execute: scale enabled requires one quant channel per A row");
  }
  if (!scaled && !qp.channels.empty()) {
    throw std::invalid_argument(
        "execute: per-channel quant params given but scaling is inactive");
  }
  if (spmm) validate_csr(*csr);

  const TilePlan plan = make_tile_plan(p, cfg.pes);
  std::vector<BTile> btiles;
  btiles.reserve(plan.tile_count);
  for (std::size_t t = 0; t < plan.tile_count; ++t) {
    btiles.push_back(load_b_tile(b, plan, t));
  }

  const std::vector<CoreAssignment> assignment = split_across_cores(n, cfg.cores);

  auto make_core = [&](const CoreAssignment& ca) -> CoreWork {
    if (ca.rows.size() == 0) return {};
    const std::vector<AEvent> events = spmm ? stage1_read(*csr, ca.rows)
                                            : stage1_read(*dense, ca.rows);
    const RowProfile prof = profile_rows(dense, csr, cfg.precision, ca.rows);
    return run_core(events, btiles, cfg, qp, ca.rows, ca.core_id, prof, spmm);
  };

  std::vector<CoreWork> per_core(assignment.size());
  if (cfg.cores > 1) {
    std::vector<std::future<CoreWork>> futures;
    futures.reserve(assignment.size());
    for (const CoreAssignment& ca : assignment) {
      futures.push_back(
          std::async(std::launch::async, [&, ca] { return make_core(ca); }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) per_core[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      per_core[i] = make_core(assignment[i]);
    }
  }

  std::vector<OutputChunk> chunks;
  StageTrace trace;
  trace.n = n;
  trace.m = m;
  trace.p = p;
  trace.spmm = spmm;
  trace.precision = cfg.precision;
  trace.cores = cfg.cores;
  trace.pes = cfg.pes;
  trace.parallel_rows = cfg.parallel_rows;
  if (spmm) {
    trace.nnz = csr->nnz();
  } else {
    trace.nnz = dense->size() - dense->count_zeros();
  }
  for (CoreWork& work : per_core) {
    for (TileRecord& rec : work.records) {
      trace.words_read_a += rec.a_value_words;
      trace.words_read_idx += rec.a_index_words;
      trace.words_loaded_b += rec.b_elements;
      trace.mac_ops += rec.mac_ops;
      trace.lanes_active += rec.lanes_active;
      trace.results_scaled += rec.results_scaled;
      trace.words_written_c += rec.c_elements;
      trace.tiles.push_back(rec);
    }
    for (OutputChunk& ch : work.chunks) chunks.push_back(std::move(ch));
  }

  const ResultKind kind = cfg.precision == ElementPrecision::Float32
                              ? ResultKind::Float32
                              : (scaled ? ResultKind::Int8 : ResultKind::Int32);
  ExecuteResult result;
  result.c = stage4_write(chunks, n, p, kind, cfg.trans);
  result.trace = std::move(trace);
  return result;
}

}  // namespace

ExecuteResult execute(const DenseMatrix& a, const DenseMatrix& b,
                      const AcceleratorConfig& cfg, const QuantParams& qp) {
  return execute_impl(&a, nullptr, b, cfg, qp);
}

ExecuteResult execute(const CsrMatrix& a, const DenseMatrix& b,
                      const AcceleratorConfig& cfg, const QuantParams& qp) {
  return execute_impl(nullptr, &a, b, cfg, qp);
}

}  // namespace fades
