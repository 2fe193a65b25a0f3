#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "harness.hpp"

using fades::cli::BenchSpec;

namespace {

void add_common_flags(CLI::App* cmd, BenchSpec& spec, std::string& shape,
                      std::string& precision, std::string& sparsity,
                      std::string& cores, std::string& pes) {
  cmd->add_option("--shape", shape, "Matrix dimensions N,M,P")
      ->capture_default_str();
  cmd->add_option("--precision", precision, "Element precision: int8 | f32")
      ->check(CLI::IsMember({"int8", "f32"}))
      ->capture_default_str();
  cmd->add_option("--sparsity", sparsity, "Comma list of A zero fractions");
  cmd->add_option("--cores", cores, "Comma list of core counts (1..4)");
  cmd->add_option("--pes", pes, "Comma list of PEs per core (2..256, pow2)");
  cmd->add_option("--pr", spec.parallel_rows, "Parallel row pipelines (1..2)")
      ->capture_default_str();
  cmd->add_flag("--trans", spec.trans, "Write C column-major");
  cmd->add_flag("--scale", spec.scale, "Enable stage-3 int8 requantization");
  cmd->add_option("--zero-point", spec.zero_point_rhs,
                  "Activation (B) zero point")
      ->capture_default_str();
  cmd->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  cmd->add_option("--machine-params", spec.machine_params_file,
                  "Machine parameter JSON file");
  cmd->add_option("--out", spec.out_dir, "Report output directory")
      ->capture_default_str();
  cmd->add_option("--format", spec.format, "Report files: json | csv | both")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();
}

void finish_spec(BenchSpec& spec, const std::string& shape,
                 const std::string& precision, const std::string& sparsity,
                 const std::string& cores, const std::string& pes) {
  if (!shape.empty()) fades::cli::parse_shape(shape, spec);
  spec.precision = precision == "f32" ? fades::ElementPrecision::Float32
                                      : fades::ElementPrecision::Int8;
  if (!sparsity.empty()) spec.sparsities = fades::cli::parse_double_list(sparsity);
  if (!cores.empty()) spec.cores_list = fades::cli::parse_u32_list(cores);
  if (!pes.empty()) spec.pes_list = fades::cli::parse_u32_list(pes);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fades: functional simulator and cycle model for a fused sparse-dense "
      "matrix engine"};
  app.require_subcommand(1);

  BenchSpec run_spec, sweep_spec;
  std::string run_shape, run_precision = "int8", run_sparsity, run_cores, run_pes;
  std::string sweep_shape, sweep_precision = "int8", sweep_sparsity, sweep_cores,
              sweep_pes;

  CLI::App* run = app.add_subcommand(
      "run", "Execute cells against the brute-force oracle and model them");
  add_common_flags(run, run_spec, run_shape, run_precision, run_sparsity,
                   run_cores, run_pes);
  run->add_option("--repeat", run_spec.repeat, "Runs per cell (self-timing)")
      ->capture_default_str();
  run->add_option("--quant-params", run_spec.quant_params_file,
                  "Per-channel quantization JSON file");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Model sparse vs dense cycles over a sparsity grid");
  add_common_flags(sweep, sweep_spec, sweep_shape, sweep_precision,
                   sweep_sparsity, sweep_cores, sweep_pes);

  CLI::App* reconfig = app.add_subcommand(
      "reconfig", "Cost a per-layer precision plan under DFX, VFX and FR");
  std::string plan_file;
  std::string params_file;
  double budget = 0.1;
  std::string reconfig_out = "fades-out";
  std::string reconfig_format = "both";
  reconfig->add_option("--plan", plan_file, "Layer plan JSON file")->required();
  reconfig->add_option("--reconfig-params", params_file,
                       "Reconfiguration parameter JSON file");
  reconfig->add_option("--budget", budget, "Overhead budget fraction")
      ->capture_default_str();
  reconfig->add_option("--out", reconfig_out, "Report output directory")
      ->capture_default_str();
  reconfig->add_option("--format", reconfig_format,
                       "Report files: json | csv | both")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : fades::cli::kExitUsage;
  }

  try {
    if (run->parsed()) {
      // Sparsity grid defaults to dense-only for run.
      finish_spec(run_spec, run_shape, run_precision, run_sparsity, run_cores,
                  run_pes);
      return fades::cli::cmd_run(run_spec);
    }
    if (sweep->parsed()) {
      if (sweep_sparsity.empty()) {
        sweep_spec.sparsities = {0.0, 0.25, 0.5, 0.75, 0.9};
      }
      finish_spec(sweep_spec, sweep_shape, sweep_precision, sweep_sparsity,
                  sweep_cores, sweep_pes);
      if (sweep_shape.empty()) {
        sweep_spec.n = sweep_spec.m = sweep_spec.p = 1024;
      }
      return fades::cli::cmd_sweep(sweep_spec);
    }
    if (reconfig->parsed()) {
      return fades::cli::cmd_reconfig(plan_file, params_file, budget,
                                      reconfig_out, reconfig_format);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return fades::cli::kExitUsage;
  }
  return fades::cli::kExitUsage;
}
