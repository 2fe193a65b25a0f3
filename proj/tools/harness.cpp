#include "harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fades/quant.hpp"
#include "fades/reference.hpp"

namespace fades::cli {

namespace {

using nlohmann::ordered_json;

const char* precision_name(ElementPrecision p) {
  return p == ElementPrecision::Int8 ? "int8" : "f32";
}

ElementPrecision precision_from_name(const std::string& name) {
  if (name == "int8") return ElementPrecision::Int8;
  if (name == "f32" || name == "float32" || name == "float") {
    return ElementPrecision::Float32;
  }
  throw std::invalid_argument("unknown precision: " + name);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_report(const BenchSpec& spec, const ordered_json& j,
                  const std::string& csv, const char* stem) {
  if (spec.format == "json" || spec.format == "both") {
    atomic_write(spec.out_dir / (std::string(stem) + ".json"), j.dump(2) + "\n");
  }
  if (spec.format == "csv" || spec.format == "both") {
    atomic_write(spec.out_dir / (std::string(stem) + ".csv"), csv);
  }
}

ordered_json spec_json(const BenchSpec& spec) {
  ordered_json j;
  j["shape"] = {spec.n, spec.m, spec.p};
  j["precision"] = precision_name(spec.precision);
  j["sparsities"] = spec.sparsities;
  j["cores"] = spec.cores_list;
  j["pes"] = spec.pes_list;
  j["parallel_rows"] = spec.parallel_rows;
  j["trans"] = spec.trans;
  j["scale"] = spec.scale;
  j["zero_point_rhs"] = spec.zero_point_rhs;
  j["seed"] = spec.seed;
  j["repeat"] = spec.repeat;
  return j;
}

ordered_json trace_totals_json(const StageTrace& t) {
  return ordered_json{{"words_read_a", t.words_read_a},
                      {"words_read_idx", t.words_read_idx},
                      {"words_loaded_b", t.words_loaded_b},
                      {"mac_ops", t.mac_ops},
                      {"lanes_active", t.lanes_active},
                      {"results_scaled", t.results_scaled},
                      {"words_written_c", t.words_written_c}};
}

ordered_json plan_json(std::size_t p, std::uint32_t pes) {
  const TilePlan plan = make_tile_plan(p, pes);
  return ordered_json{{"tiles", plan.tile_count},
                      {"tile_width", plan.tile_width},
                      {"last_tile_width", plan.last_tile_width}};
}

std::string top_bottleneck(const PerfReport& r) {
  std::map<std::string, std::size_t> counts;
  for (const TileCost& t : r.tiles) ++counts[stage_label_name(t.bottleneck)];
  std::string best = "none";
  std::size_t best_count = 0;
  for (const auto& [name, count] : counts) {
    if (count > best_count) {
      best = name;
      best_count = count;
    }
  }
  return best;
}

/// Deterministic per-channel params for benchmark cells that enable scaling
/// without supplying a file. Multipliers sit in the normalized [0.5, 1)
/// band with small negative shifts, the usual territory for conv layers.
QuantParams synthesized_quant_params(std::size_t channels, std::uint64_t seed,
                                     std::int32_t zero_point_rhs) {
  SplitMix64 rng(seed ^ 0x5CA1EDull);
  QuantParams qp;
  qp.zero_point_rhs = zero_point_rhs;
  qp.zero_point_out = static_cast<std::int32_t>(rng.next() % 11) - 5;
  qp.channels.resize(channels);
  for (ChannelScale& ch : qp.channels) {
    ch.multiplier = (1 << 30) + static_cast<std::int32_t>(rng.next() % (1u << 30));
    ch.shift = -6 - static_cast<int>(rng.next() % 5);
    ch.bias = static_cast<std::int32_t>(rng.next() % 2001) - 1000;
  }
  return qp;
}

struct CellOutcome {
  bool match = false;
  std::uint64_t nnz = 0;
  std::string mode;
  StageTrace trace;
  PerfReport perf;
  double self_time_s = 0;
};

bool verify_float_cell(const ResultMatrix& got, const DenseMatrix& a,
                       const DenseMatrix& b, std::int32_t zp, std::size_t m) {
  const std::vector<double> want = reference::gemm_f64(a, b, zp);
  const std::vector<double> bound = reference::gemm_abs_bound(a, b, zp);
  const double rel = 1e-4 + 4e-7 * static_cast<double>(m);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      const std::size_t idx = i * b.cols() + j;
      if (std::abs(got.at_f32(i, j) - want[idx]) > rel * bound[idx] + 1e-9) {
        return false;
      }
    }
  }
  return true;
}

CellOutcome run_cell(const BenchSpec& spec, const AcceleratorConfig& cfg,
                     double sparsity, const DenseMatrix& a, const DenseMatrix& b,
                     const QuantParams& qp, const MachineParams& mp) {
  CellOutcome out;
  out.mode = sparsity > 0.0 ? "spmm" : "gemm";

  ExecuteResult result;
  const auto start = std::chrono::steady_clock::now();
  if (sparsity > 0.0) {
    const CsrMatrix csr = dense_to_csr(a);
    for (int r = 0; r < spec.repeat; ++r) result = execute(csr, b, cfg, qp);
  } else {
    for (int r = 0; r < spec.repeat; ++r) result = execute(a, b, cfg, qp);
  }
  out.self_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count() /
      spec.repeat;
  out.nnz = result.trace.nnz;
  out.trace = result.trace;

  if (spec.precision == ElementPrecision::Int8) {
    out.match = result.c == reference::execute_int8(a, b, cfg, qp);
  } else {
    out.match = verify_float_cell(result.c, a, b, qp.zero_point_rhs, spec.m);
  }
  if (out.match) {
    out.perf = estimate_cycles(result.trace, cfg, mp);
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> parse_u32_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  }
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

void parse_shape(const std::string& text, BenchSpec& spec) {
  const std::vector<double> dims = parse_double_list(text);
  if (dims.size() != 3) {
    throw std::invalid_argument("--shape expects N,M,P");
  }
  spec.n = static_cast<std::size_t>(dims[0]);
  spec.m = static_cast<std::size_t>(dims[1]);
  spec.p = static_cast<std::size_t>(dims[2]);
}

void validate_spec(const BenchSpec& spec) {
  if (spec.n < 1 || spec.m < 1 || spec.p < 1) {
    throw std::invalid_argument("shape dimensions must all be >= 1");
  }
  if (spec.sparsities.empty() || spec.cores_list.empty() || spec.pes_list.empty()) {
    throw std::invalid_argument("sparsity/cores/pes lists must be non-empty");
  }
  for (double s : spec.sparsities) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("sparsities must lie in [0, 1]");
    }
  }
  if (spec.repeat < 1) throw std::invalid_argument("repeat must be >= 1");
  if (spec.format != "json" && spec.format != "csv" && spec.format != "both") {
    throw std::invalid_argument("format must be json, csv or both");
  }
  for (std::uint32_t cc : spec.cores_list) {
    for (std::uint32_t pe : spec.pes_list) {
      AcceleratorConfig cfg;
      cfg.cores = cc;
      cfg.pes = pe;
      cfg.parallel_rows = spec.parallel_rows;
      validate_config(cfg);
    }
  }
}

int cmd_run(const BenchSpec& spec) {
  validate_spec(spec);
  const MachineParams mp = spec.machine_params_file.empty()
                               ? MachineParams{}
                               : load_machine_params(spec.machine_params_file);

  ordered_json report;
  report["schema_version"] = 1;
  report["command"] = "run";
  report["spec"] = spec_json(spec);
  report["cells"] = ordered_json::array();

  std::ostringstream csv;
  csv << "n,m,p,precision,sparsity,cores,pes,pr,trans,scale,mode,nnz,match,"
         "total_cycles,modeled_ms,bottleneck\n";

  bool all_match = true;
  for (std::size_t si = 0; si < spec.sparsities.size(); ++si) {
    const double sparsity = spec.sparsities[si];
    SplitMix64 seeder(spec.seed + 7919 * si);
    const std::uint64_t seed_a = seeder.next();
    const std::uint64_t seed_b = seeder.next();
    const DenseMatrix a = generate_matrix(spec.n, spec.m, spec.precision,
                                          sparsity, seed_a);
    const DenseMatrix b =
        generate_matrix(spec.m, spec.p, spec.precision, 0.0, seed_b);

    QuantParams qp;
    qp.zero_point_rhs = spec.zero_point_rhs;
    const bool scaled = spec.scale && spec.precision == ElementPrecision::Int8;
    if (scaled) {
      qp = spec.quant_params_file.empty()
               ? synthesized_quant_params(spec.n, spec.seed, spec.zero_point_rhs)
               : load_quant_params(spec.quant_params_file);
      if (qp.channels.size() != spec.n) {
        throw std::invalid_argument(
            "quant params must carry one channel per output row");
      }
    }

    for (std::uint32_t cc : spec.cores_list) {
      for (std::uint32_t pe : spec.pes_list) {
        AcceleratorConfig cfg;
        cfg.cores = cc;
        cfg.pes = pe;
        cfg.parallel_rows = spec.parallel_rows;
        cfg.trans = spec.trans;
        cfg.scale = spec.scale;
        cfg.precision = spec.precision;

        const CellOutcome cell = run_cell(spec, cfg, sparsity, a, b, qp, mp);
        all_match = all_match && cell.match;

        ordered_json jc;
        jc["sparsity"] = sparsity;
        jc["cores"] = cc;
        jc["pes"] = pe;
        jc["parallel_rows"] = spec.parallel_rows;
        jc["trans"] = spec.trans;
        jc["scale"] = spec.scale;
        jc["mode"] = cell.mode;
        jc["nnz"] = cell.nnz;
        jc["match"] = cell.match;
        jc["plan"] = plan_json(spec.p, pe);
        jc["trace"] = trace_totals_json(cell.trace);
        csv << spec.n << ',' << spec.m << ',' << spec.p << ','
            << precision_name(spec.precision) << ',' << sparsity << ',' << cc
            << ',' << pe << ',' << spec.parallel_rows << ',' << spec.trans << ','
            << spec.scale << ',' << cell.mode << ',' << cell.nnz << ','
            << (cell.match ? "true" : "false") << ',';
        if (cell.match) {
          // Timing is only reported for cells that passed verification.
          jc["model"] = {{"total_cycles", cell.perf.total_cycles},
                         {"wall_time_ms", cell.perf.wall_time_s * 1e3},
                         {"bottleneck", top_bottleneck(cell.perf)}};
          csv << cell.perf.total_cycles << ',' << cell.perf.wall_time_s * 1e3
              << ',' << top_bottleneck(cell.perf) << '\n';
        } else {
          jc["model"] = nullptr;
          csv << ",,\n";
        }
        report["cells"].push_back(jc);

        std::string modeled;
        if (cell.match) {
          char buf[48];
          std::snprintf(buf, sizeof buf, " modeled=%.3fms",
                        cell.perf.wall_time_s * 1e3);
          modeled = buf;
        }
        std::printf("[%s] s=%.2f cc=%u pe=%u mode=%s nnz=%llu%s self=%.1fms\n",
                    cell.match ? "ok" : "MISMATCH", sparsity, cc, pe,
                    cell.mode.c_str(),
                    static_cast<unsigned long long>(cell.nnz), modeled.c_str(),
                    cell.self_time_s * 1e3);
      }
    }
  }

  write_report(spec, report, csv.str(), "report");
  return all_match ? kExitOk : kExitMismatch;
}

int cmd_sweep(const BenchSpec& spec) {
  validate_spec(spec);
  const MachineParams mp = spec.machine_params_file.empty()
                               ? MachineParams{}
                               : load_machine_params(spec.machine_params_file);

  ordered_json report;
  report["schema_version"] = 1;
  report["command"] = "sweep";
  report["spec"] = spec_json(spec);
  report["curves"] = ordered_json::array();

  std::ostringstream csv;
  csv << "cores,pes,sparsity,total_cycles,wall_ms,bottleneck,dense_cycles,"
         "crossover_ok\n";

  bool all_ok = true;
  for (std::uint32_t cc : spec.cores_list) {
    for (std::uint32_t pe : spec.pes_list) {
      AcceleratorConfig cfg;
      cfg.cores = cc;
      cfg.pes = pe;
      cfg.parallel_rows = spec.parallel_rows;
      cfg.scale = spec.scale;
      cfg.precision = spec.precision;

      Workload dense_w{spec.n, spec.m, spec.p, spec.precision, false, 0.0};
      const PerfReport dense =
          estimate_cycles(synthesize_trace(dense_w, cfg), cfg, mp);

      ordered_json curve;
      curve["cores"] = cc;
      curve["pes"] = pe;
      curve["dense_cycles"] = dense.total_cycles;
      curve["points"] = ordered_json::array();

      bool monotone = true, crossover_ok = true;
      double prev = std::numeric_limits<double>::infinity();
      for (double s : spec.sparsities) {
        Workload w{spec.n, spec.m, spec.p, spec.precision, true, s};
        const PerfReport r = estimate_cycles(synthesize_trace(w, cfg), cfg, mp);
        if (r.total_cycles > prev) monotone = false;
        prev = r.total_cycles;
        const bool cell_crossover = s < 0.5 || r.total_cycles <= dense.total_cycles;
        crossover_ok = crossover_ok && cell_crossover;
        curve["points"].push_back({{"sparsity", s},
                                   {"total_cycles", r.total_cycles},
                                   {"wall_time_ms", r.wall_time_s * 1e3},
                                   {"bottleneck", top_bottleneck(r)}});
        csv << cc << ',' << pe << ',' << s << ',' << r.total_cycles << ','
            << r.wall_time_s * 1e3 << ',' << top_bottleneck(r) << ','
            << dense.total_cycles << ',' << (cell_crossover ? "true" : "false")
            << '\n';
      }
      curve["monotone"] = monotone;
      curve["crossover_ok"] = crossover_ok;
      report["curves"].push_back(curve);
      all_ok = all_ok && monotone && crossover_ok;
      std::printf("[%s] cc=%u pe=%u dense=%.0f cycles, %zu sweep points\n",
                  monotone && crossover_ok ? "ok" : "VIOLATION", cc, pe,
                  dense.total_cycles, spec.sparsities.size());
    }
  }

  write_report(spec, report, csv.str(), "sweep");
  return all_ok ? kExitOk : kExitMismatch;
}

int cmd_reconfig(const std::filesystem::path& plan_file,
                 const std::filesystem::path& params_file, double budget,
                 const std::filesystem::path& out_dir, const std::string& format) {
  std::ifstream is(plan_file);
  if (!is) throw std::runtime_error("cannot open plan: " + plan_file.string());
  nlohmann::json plan_json = nlohmann::json::parse(is);

  std::vector<ElementPrecision> plan;
  std::vector<double> layer_times;
  for (const auto& layer : plan_json.at("layers")) {
    plan.push_back(precision_from_name(layer.at("precision").get<std::string>()));
    layer_times.push_back(layer.value("time_s", 0.0));
  }

  ReconfigParams base = params_file.empty() ? ReconfigParams{}
                                            : load_reconfig_params(params_file);

  ordered_json report;
  report["schema_version"] = 1;
  report["command"] = "reconfig";
  ordered_json jplan;
  jplan["layers"] = plan.size();
  jplan["precisions"] = ordered_json::array();
  for (ElementPrecision p : plan) jplan["precisions"].push_back(precision_name(p));
  report["plan"] = jplan;
  report["strategies"] = ordered_json::array();

  std::ostringstream csv;
  csv << "strategy,switches,per_switch_time_s,total_overhead_s,"
         "min_compute_per_switch_s\n";

  const BreakevenReport breakeven = breakeven_analysis(layer_times, base, budget);
  const std::pair<ReconfigStrategy, const char*> strategies[] = {
      {ReconfigStrategy::DFX, "dfx"},
      {ReconfigStrategy::VFX, "vfx"},
      {ReconfigStrategy::FR, "fr"}};
  for (const auto& [strategy, name] : strategies) {
    ReconfigParams rp = base;
    rp.strategy = strategy;
    const ReconfigReport r = reconfig_cost(plan, rp);
    const BreakevenEntry& be = breakeven.entries[static_cast<int>(strategy)];
    report["strategies"].push_back(
        {{"strategy", name},
         {"switches", r.switches},
         {"per_switch_time_s", r.per_switch_time_s},
         {"per_switch_bytes", r.per_switch_bytes},
         {"total_overhead_s", r.total_overhead_s},
         {"min_compute_per_switch_s", be.min_compute_per_switch_s}});
    csv << name << ',' << r.switches << ',' << r.per_switch_time_s << ','
        << r.total_overhead_s << ',' << be.min_compute_per_switch_s << '\n';
    std::printf("%s: %llu switches, %.3fs overhead (breakeven %.3fs/switch)\n",
                name, static_cast<unsigned long long>(r.switches),
                r.total_overhead_s, be.min_compute_per_switch_s);
  }
  report["breakeven"] = {{"budget_fraction", breakeven.budget_fraction},
                         {"total_compute_s", breakeven.total_compute_s}};

  BenchSpec out_spec;
  out_spec.out_dir = out_dir;
  out_spec.format = format;
  write_report(out_spec, report, csv.str(), "reconfig");
  return kExitOk;
}

}  // namespace fades::cli
