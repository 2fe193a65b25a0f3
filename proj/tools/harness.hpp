#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fades/engine.hpp"
#include "fades/matrix.hpp"
#include "fades/perf_model.hpp"

namespace fades::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMismatch = 2;

struct BenchSpec {
  std::size_t n = 256, m = 256, p = 256;
  ElementPrecision precision = ElementPrecision::Int8;
  std::vector<double> sparsities = {0.0};
  std::vector<std::uint32_t> cores_list = {1};
  std::vector<std::uint32_t> pes_list = {32};
  std::uint32_t parallel_rows = 1;
  bool trans = false;
  bool scale = false;
  std::int32_t zero_point_rhs = 0;
  std::uint64_t seed = 1;
  int repeat = 1;
  std::filesystem::path out_dir = "fades-out";
  std::string format = "both";  // json | csv | both
  std::filesystem::path machine_params_file;
  std::filesystem::path quant_params_file;
};

/// Throws std::invalid_argument on degenerate shapes, empty lists,
/// out-of-range sparsities or an unknown format.
void validate_spec(const BenchSpec& spec);

/// Runs every (sparsity, cores, pes) cell against the brute-force oracle,
/// writes report files, prints one line per cell. Cells at sparsity zero run
/// the dense kernel; the rest stream CSR. Returns kExitMismatch if any cell
/// fails verification.
int cmd_run(const BenchSpec& spec);

/// Model-only sparsity sweep: modeled cycles per sparsity against the dense
/// baseline per config. Returns kExitMismatch if the sweep violates the
/// crossover property (sparse worse than dense at sparsity >= 0.5) or
/// monotonicity.
int cmd_sweep(const BenchSpec& spec);

/// Tabulates precision-switch overheads for a per-layer plan under DFX, VFX
/// and FR, plus break-even compute times for a given overhead budget.
int cmd_reconfig(const std::filesystem::path& plan_file,
                 const std::filesystem::path& params_file, double budget,
                 const std::filesystem::path& out_dir, const std::string& format);

// Shared helpers (exposed for the CLI tests).
std::vector<std::uint32_t> parse_u32_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);
void parse_shape(const std::string& text, BenchSpec& spec);

}  // namespace fades::cli
