#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fades/engine.hpp"

namespace fades {

/// Throughput parameters of the modeled device. All rates are per core and
/// per cycle; the dataflow stages of one tile overlap, so a tile costs the
/// slowest stage plus a pipeline fill.
struct MachineParams {
  double clock_hz = 200e6;
  double a_value_words_per_cycle = 1.0;  // A value stream port
  double a_index_words_per_cycle = 1.0;  // CSR index port, read concurrently
  double b_load_words_per_cycle = 1.0;   // B-tile element buffering rate
  double c_write_words_per_cycle = 0.5;  // stage-4 drain, strided writeback
  double pipeline_fill_base = 64.0;      // per-tile fill; fadd_latency adds
  double efficiency = 1.0;               // (0, 1] calibration factor
  double multicore_b_contention = 0.0;   // extra B-port cost per extra core
};

void validate_machine_params(const MachineParams& mp);

enum class ReconfigStrategy { DFX, VFX, FR };

/// Precision-switch cost parameters. Defaults: ~9 MB partial bitstream at
/// ~30 ms, ~25 MB full bitstream at ~200 ms; VFX switches in one cycle.
struct ReconfigParams {
  ReconfigStrategy strategy = ReconfigStrategy::DFX;
  double partial_bitstream_bytes = 9e6;
  double full_bitstream_bytes = 25e6;
  double partial_time_s = 0.030;
  double full_time_s = 0.200;
};

void validate_reconfig_params(const ReconfigParams& rp);

enum class StageLabel { Compute, Read, BLoad, Write };

const char* stage_label_name(StageLabel s);

struct TileCost {
  std::uint32_t core = 0;
  std::uint32_t tile = 0;
  double compute_cycles = 0;
  double read_cycles = 0;
  double b_load_cycles = 0;
  double write_cycles = 0;
  double fill_cycles = 0;
  double tile_cycles = 0;
  StageLabel bottleneck = StageLabel::Compute;
};

struct StageSums {
  double compute = 0;
  double read = 0;
  double b_load = 0;
  double write = 0;
  double fill = 0;
};

struct PerfReport {
  double total_cycles = 0;
  double wall_time_s = 0;
  std::vector<double> core_cycles;
  std::vector<StageSums> core_stage_cycles;
  std::vector<TileCost> tiles;
  double reconfig_overhead_s = 0;
  std::uint64_t switches_count = 0;
};

/// Cycle estimate over a completed trace: per tile the stages overlap, so
/// tile cycles = max(compute, read, b_load, write) + fill; a core's tiles
/// run back to back and cores run concurrently, so the total is the slowest
/// core. Throws std::invalid_argument on an inconsistent trace.
PerfReport estimate_cycles(const StageTrace& trace, const AcceleratorConfig& cfg,
                           const MachineParams& mp);

/// Workload descriptor for analytic what-if traces (no engine run needed).
struct Workload {
  std::size_t n = 0, m = 0, p = 0;
  ElementPrecision precision = ElementPrecision::Int8;
  bool spmm = false;
  double sparsity = 0.0;  // A zero fraction; non-zeros spread evenly
};

/// Expected-case trace for a workload: nnz = round((1-sparsity)*n*m) spread
/// as evenly as possible over rows. Matches execute()'s bookkeeping exactly
/// for dense runs.
StageTrace synthesize_trace(const Workload& w, const AcceleratorConfig& cfg);

struct MulticoreEntry {
  AcceleratorConfig cfg;
  double total_cycles = 0;
  double wall_time_s = 0;
  double ratio_vs_first = 1.0;  // entry time / first entry time
};

/// Models one workload across configs sharing the same cores*pes product.
std::vector<MulticoreEntry> compare_multicore(const Workload& w,
                                              std::span<const AcceleratorConfig> cfgs,
                                              const MachineParams& mp);

struct ReconfigReport {
  ReconfigStrategy strategy = ReconfigStrategy::DFX;
  std::uint64_t switches = 0;
  double per_switch_time_s = 0;
  double per_switch_bytes = 0;
  double total_overhead_s = 0;
  std::vector<double> switch_times_s;  // one entry per precision switch
};

/// Overhead of running a per-layer precision plan under one strategy.
/// A switch occurs wherever consecutive layers differ in precision.
ReconfigReport reconfig_cost(std::span<const ElementPrecision> plan,
                             const ReconfigParams& rp);

struct BreakevenEntry {
  ReconfigStrategy strategy = ReconfigStrategy::DFX;
  double switch_time_s = 0;
  /// Minimum compute time between switches keeping overhead within budget.
  double min_compute_per_switch_s = 0;
  /// Switches affordable for the given layer times at the budget.
  double affordable_switches = 0;
};

struct BreakevenReport {
  double budget_fraction = 0.1;
  double total_compute_s = 0;
  std::vector<BreakevenEntry> entries;  // DFX, VFX, FR
};

BreakevenReport breakeven_analysis(std::span<const double> layer_times_s,
                                   const ReconfigParams& rp,
                                   double budget_fraction = 0.1);

// JSON interchange (schemas documented in the README).
MachineParams machine_params_from_json(const std::string& text);
std::string machine_params_to_json(const MachineParams& mp);
MachineParams load_machine_params(const std::filesystem::path& path);

ReconfigParams reconfig_params_from_json(const std::string& text);
std::string reconfig_params_to_json(const ReconfigParams& rp);
ReconfigParams load_reconfig_params(const std::filesystem::path& path);

std::string stage_trace_to_json(const StageTrace& trace);
StageTrace stage_trace_from_json(const std::string& text);

std::string perf_report_to_json(const PerfReport& report);
std::string perf_report_to_csv(const PerfReport& report);

}  // namespace fades
