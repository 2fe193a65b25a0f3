#include "fades/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fades {

void validate_machine_params(const MachineParams& mp) {
  const double positive[] = {mp.clock_hz,
                             mp.a_value_words_per_cycle,
                             mp.a_index_words_per_cycle,
                             mp.b_load_words_per_cycle,
                             mp.c_write_words_per_cycle};
  for (double v : positive) {
    if (!(v > 0)) {
      throw std::invalid_argument("MachineParams: rates and clock must be positive");
    }
  }
  if (!(mp.pipeline_fill_base >= 0)) {
    throw std::invalid_argument("MachineParams: pipeline_fill_base must be >= 0");
  }
  if (!(mp.efficiency > 0 && mp.efficiency <= 1.0)) {
    throw std::invalid_argument("MachineParams: efficiency must be in (0, 1]");
  }
  if (!(mp.multicore_b_contention >= 0)) {
    throw std::invalid_argument("MachineParams: contention must be >= 0");
  }
}

void validate_reconfig_params(const ReconfigParams& rp) {
  if (!(rp.partial_bitstream_bytes > 0 && rp.full_bitstream_bytes > 0 &&
        rp.partial_time_s > 0 && rp.full_time_s > 0)) {
    throw std::invalid_argument("ReconfigParams: sizes and times must be positive");
  }
  if (!(rp.partial_bitstream_bytes < rp.full_bitstream_bytes &&
        rp.partial_time_s < rp.full_time_s)) {
    throw std::invalid_argument("ReconfigParams: partial must be < full");
  }
}

const char* stage_label_name(StageLabel s) {
  switch (s) {
    case StageLabel::Compute: return "compute";
    case StageLabel::Read: return "read";
    case StageLabel::BLoad: return "b_load";
    case StageLabel::Write: return "write";
  }
  return "?";
}

namespace {

void validate_trace(const StageTrace& trace) {
  std::map<std::uint32_t, std::uint64_t> width_per_core;
  std::uint64_t c_total = 0;
  for (const TileRecord& rec : trace.tiles) {
    if (rec.width == 0) {
      throw std::invalid_argument("trace: tile with zero width");
    }
    if (rec.pipeline_events_max > rec.compute_events) {
      throw std::invalid_argument("trace: pipeline events exceed total events");
    }
    width_per_core[rec.core] += rec.width;
    c_total += rec.c_elements;
  }
  for (const auto& [core, width] : width_per_core) {
    if (width != trace.p) {
      throw std::invalid_argument("trace: per-core tile widths must cover P");
    }
  }
  if (c_total != trace.words_written_c) {
    throw std::invalid_argument("trace: written-C total inconsistent");
  }
}

}  // namespace

PerfReport estimate_cycles(const StageTrace& trace, const AcceleratorConfig& cfg,
                           const MachineParams& mp) {
  validate_machine_params(mp);
  validate_trace(trace);

  const double fill = mp.pipeline_fill_base + cfg.fadd_latency;
  const double b_rate =
      mp.b_load_words_per_cycle /
      (1.0 + mp.multicore_b_contention * (trace.cores > 0 ? trace.cores - 1 : 0));

  PerfReport report;
  report.core_cycles.assign(trace.cores, 0.0);
  report.core_stage_cycles.assign(trace.cores, StageSums{});
  report.tiles.reserve(trace.tiles.size());

  for (const TileRecord& rec : trace.tiles) {
    TileCost cost;
    cost.core = rec.core;
    cost.tile = rec.tile;
    cost.compute_cycles = static_cast<double>(rec.pipeline_events_max);
    cost.read_cycles =
        static_cast<double>(rec.pipeline_events_max) / mp.a_value_words_per_cycle;
    cost.b_load_cycles = static_cast<double>(rec.b_elements) / b_rate;
    cost.write_cycles =
        static_cast<double>(rec.c_elements) / mp.c_write_words_per_cycle;
    cost.fill_cycles = fill;

    double slowest = cost.compute_cycles;
    cost.bottleneck = StageLabel::Compute;
    const std::pair<double, StageLabel> others[] = {
        {cost.read_cycles, StageLabel::Read},
        {cost.b_load_cycles, StageLabel::BLoad},
        {cost.write_cycles, StageLabel::Write}};
    for (const auto& [cycles, label] : others) {
      if (cycles > slowest) {
        slowest = cycles;
        cost.bottleneck = label;
      }
    }
    cost.tile_cycles = slowest + fill;

    StageSums& sums = report.core_stage_cycles[rec.core];
    sums.compute += cost.compute_cycles;
    sums.read += cost.read_cycles;
    sums.b_load += cost.b_load_cycles;
    sums.write += cost.write_cycles;
    sums.fill += fill;
    report.core_cycles[rec.core] += cost.tile_cycles;
    report.tiles.push_back(cost);
  }

  report.total_cycles = 0.0;
  for (double c : report.core_cycles) report.total_cycles = std::max(report.total_cycles, c);
  report.wall_time_s = report.total_cycles / (mp.clock_hz * mp.efficiency);
  return report;
}

StageTrace synthesize_trace(const Workload& w, const AcceleratorConfig& cfg) {
  validate_config(cfg);
  if (w.n == 0 || w.m == 0 || w.p == 0) {
    throw std::invalid_argument("synthesize_trace: dimensions must be >= 1");
  }
  if (!(w.sparsity >= 0.0 && w.sparsity <= 1.0)) {
    throw std::invalid_argument("synthesize_trace: sparsity must be in [0,1]");
  }

  const auto nnz = static_cast<std::uint64_t>(
      std::llround((1.0 - w.sparsity) * static_cast<double>(w.n * w.m)));
  const bool int8 = w.precision == ElementPrecision::Int8;
  const bool scaled = int8 && cfg.scale;

  // Non-zeros spread as evenly as possible: the first (nnz mod n) rows carry
  // one extra element.
  const std::uint64_t base_nnz = nnz / w.n;
  const std::uint64_t extra_rows = nnz % w.n;
  auto row_nnz = [&](std::size_t r) {
    return base_nnz + (r < extra_rows ? 1 : 0);
  };
  auto row_words = [&](std::size_t r) -> std::uint64_t {
    if (!w.spmm) return int8 ? (w.m + 3) / 4 : w.m;
    const std::uint64_t nr = row_nnz(r);
    return int8 ? (nr + 3) / 4 : nr;
  };

  const TilePlan plan = make_tile_plan(w.p, cfg.pes);
  const std::vector<CoreAssignment> assignment = split_across_cores(w.n, cfg.cores);

  StageTrace trace;
  trace.n = w.n;
  trace.m = w.m;
  trace.p = w.p;
  trace.nnz = nnz;
  trace.spmm = w.spmm;
  trace.precision = w.precision;
  trace.cores = cfg.cores;
  trace.pes = cfg.pes;
  trace.parallel_rows = cfg.parallel_rows;

  for (const CoreAssignment& ca : assignment) {
    if (ca.rows.size() == 0) continue;
    std::uint64_t words = 0, lanes = 0, idx_words = 0;
    std::uint64_t even = 0, odd = 0;
    for (std::size_t r = ca.rows.begin; r < ca.rows.end; ++r) {
      const std::uint64_t rw = row_words(r);
      words += rw;
      ((r - ca.rows.begin) % 2 == 0 ? even : odd) += rw;
      lanes += w.spmm ? row_nnz(r) : w.m;
      if (w.spmm) idx_words += row_nnz(r);
    }
    const std::uint64_t pipeline_max =
        cfg.parallel_rows > 1 ? std::max(even, odd) : words;

    for (std::size_t t = 0; t < plan.tile_count; ++t) {
      TileRecord rec;
      rec.core = ca.core_id;
      rec.tile = static_cast<std::uint32_t>(t);
      rec.first_col = plan.first_col_of(t);
      rec.width = plan.width_of(t);
      rec.a_value_words = words;
      rec.a_index_words = idx_words;
      rec.compute_events = words;
      rec.pipeline_events_max = pipeline_max;
      rec.b_elements = w.m * rec.width;
      rec.c_elements = ca.rows.size() * rec.width;
      rec.lanes_active = lanes;
      rec.mac_ops = lanes * rec.width;
      rec.results_scaled = scaled ? rec.c_elements : 0;
      trace.words_read_a += rec.a_value_words;
      trace.words_read_idx += rec.a_index_words;
      trace.words_loaded_b += rec.b_elements;
      trace.mac_ops += rec.mac_ops;
      trace.lanes_active += rec.lanes_active;
      trace.results_scaled += rec.results_scaled;
      trace.words_written_c += rec.c_elements;
      trace.tiles.push_back(rec);
    }
  }
  return trace;
}

std::vector<MulticoreEntry> compare_multicore(const Workload& w,
                                              std::span<const AcceleratorConfig> cfgs,
                                              const MachineParams& mp) {
  if (cfgs.empty()) {
    throw std::invalid_argument("compare_multicore: need at least one config");
  }
  const std::uint64_t product =
      static_cast<std::uint64_t>(cfgs[0].cores) * cfgs[0].pes;
  for (const AcceleratorConfig& cfg : cfgs) {
    if (static_cast<std::uint64_t>(cfg.cores) * cfg.pes != product) {
      throw std::invalid_argument(
          "compare_multicore: configs must share the cores*pes product");
    }
  }
  std::vector<MulticoreEntry> out;
  out.reserve(cfgs.size());
  for (const AcceleratorConfig& cfg : cfgs) {
    const StageTrace trace = synthesize_trace(w, cfg);
    const PerfReport report = estimate_cycles(trace, cfg, mp);
    MulticoreEntry entry;
    entry.cfg = cfg;
    entry.total_cycles = report.total_cycles;
    entry.wall_time_s = report.wall_time_s;
    out.push_back(entry);
  }
  for (MulticoreEntry& entry : out) {
    entry.ratio_vs_first = out[0].wall_time_s > 0
                               ? entry.wall_time_s / out[0].wall_time_s
                               : 1.0;
  }
  return out;
}

ReconfigReport reconfig_cost(std::span<const ElementPrecision> plan,
                             const ReconfigParams& rp) {
  if (plan.empty()) {
    throw std::invalid_argument("reconfig_cost: plan must be non-empty");
  }
  validate_reconfig_params(rp);
  ReconfigReport report;
  report.strategy = rp.strategy;
  switch (rp.strategy) {
    case ReconfigStrategy::DFX:
      report.per_switch_time_s = rp.partial_time_s;
      report.per_switch_bytes = rp.partial_bitstream_bytes;
      break;
    case ReconfigStrategy::FR:
      report.per_switch_time_s = rp.full_time_s;
      report.per_switch_bytes = rp.full_bitstream_bytes;
      break;
    case ReconfigStrategy::VFX:
      // Both datapaths resident, selected by multiplexer: zero-cost switch.
      report.per_switch_time_s = 0.0;
      report.per_switch_bytes = 0.0;
      break;
  }
  for (std::size_t i = 1; i < plan.size(); ++i) {
    if (plan[i] != plan[i - 1]) {
      ++report.switches;
      report.switch_times_s.push_back(report.per_switch_time_s);
      report.total_overhead_s += report.per_switch_time_s;
    }
  }
  return report;
}

BreakevenReport breakeven_analysis(std::span<const double> layer_times_s,
                                   const ReconfigParams& rp,
                                   double budget_fraction) {
  if (!(budget_fraction > 0 && budget_fraction < 1)) {
    throw std::invalid_argument("breakeven: budget fraction must be in (0,1)");
  }
  validate_reconfig_params(rp);
  BreakevenReport report;
  report.budget_fraction = budget_fraction;
  for (double t : layer_times_s) {
    if (!(t >= 0)) throw std::invalid_argument("breakeven: negative layer time");
    report.total_compute_s += t;
  }
  const std::pair<ReconfigStrategy, double> strategies[] = {
      {ReconfigStrategy::DFX, rp.partial_time_s},
      {ReconfigStrategy::VFX, 0.0},
      {ReconfigStrategy::FR, rp.full_time_s}};
  for (const auto& [strategy, t_switch] : strategies) {
    BreakevenEntry entry;
    entry.strategy = strategy;
    entry.switch_time_s = t_switch;
    // Overhead <= budget * total requires compute-per-switch of at least
    // t_switch/budget - t_switch.
    entry.min_compute_per_switch_s =
        t_switch > 0 ? t_switch / budget_fraction - t_switch : 0.0;
    entry.affordable_switches =
        t_switch > 0 ? report.total_compute_s * budget_fraction /
                           ((1.0 - budget_fraction) * t_switch)
                     : std::numeric_limits<double>::infinity();
    report.entries.push_back(entry);
  }
  return report;
}

namespace {

const char* strategy_name(ReconfigStrategy s) {
  switch (s) {
    case ReconfigStrategy::DFX: return "dfx";
    case ReconfigStrategy::VFX: return "vfx";
    case ReconfigStrategy::FR: return "fr";
  }
  return "?";
}

ReconfigStrategy strategy_from_name(const std::string& name) {
  if (name == "dfx") return ReconfigStrategy::DFX;
  if (name == "vfx") return ReconfigStrategy::VFX;
  if (name == "fr") return ReconfigStrategy::FR;
  throw std::invalid_argument("unknown reconfiguration strategy: " + name);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

MachineParams machine_params_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MachineParams mp;
  mp.clock_hz = j.value("clock_hz", mp.clock_hz);
  mp.a_value_words_per_cycle =
      j.value("a_value_words_per_cycle", mp.a_value_words_per_cycle);
  mp.a_index_words_per_cycle =
      j.value("a_index_words_per_cycle", mp.a_index_words_per_cycle);
  mp.b_load_words_per_cycle =
      j.value("b_load_words_per_cycle", mp.b_load_words_per_cycle);
  mp.c_write_words_per_cycle =
      j.value("c_write_words_per_cycle", mp.c_write_words_per_cycle);
  mp.pipeline_fill_base = j.value("pipeline_fill_base", mp.pipeline_fill_base);
  mp.efficiency = j.value("efficiency", mp.efficiency);
  mp.multicore_b_contention =
      j.value("multicore_b_contention", mp.multicore_b_contention);
  validate_machine_params(mp);
  return mp;
}

std::string machine_params_to_json(const MachineParams& mp) {
  nlohmann::ordered_json j;
  j["clock_hz"] = mp.clock_hz;
  j["a_value_words_per_cycle"] = mp.a_value_words_per_cycle;
  j["a_index_words_per_cycle"] = mp.a_index_words_per_cycle;
  j["b_load_words_per_cycle"] = mp.b_load_words_per_cycle;
  j["c_write_words_per_cycle"] = mp.c_write_words_per_cycle;
  j["pipeline_fill_base"] = mp.pipeline_fill_base;
  j["efficiency"] = mp.efficiency;
  j["multicore_b_contention"] = mp.multicore_b_contention;
  return j.dump(2);
}

MachineParams load_machine_params(const std::filesystem::path& path) {
  return machine_params_from_json(slurp(path));
}

ReconfigParams reconfig_params_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ReconfigParams rp;
  if (j.contains("strategy")) rp.strategy = strategy_from_name(j["strategy"]);
  rp.partial_bitstream_bytes =
      j.value("partial_bitstream_bytes", rp.partial_bitstream_bytes);
  rp.full_bitstream_bytes = j.value("full_bitstream_bytes", rp.full_bitstream_bytes);
  rp.partial_time_s = j.value("partial_time_s", rp.partial_time_s);
  rp.full_time_s = j.value("full_time_s", rp.full_time_s);
  validate_reconfig_params(rp);
  return rp;
}

std::string reconfig_params_to_json(const ReconfigParams& rp) {
  nlohmann::ordered_json j;
  j["strategy"] = strategy_name(rp.strategy);
  j["partial_bitstream_bytes"] = rp.partial_bitstream_bytes;
  j["full_bitstream_bytes"] = rp.full_bitstream_bytes;
  j["partial_time_s"] = rp.partial_time_s;
  j["full_time_s"] = rp.full_time_s;
  return j.dump(2);
}

ReconfigParams load_reconfig_params(const std::filesystem::path& path) {
  return reconfig_params_from_json(slurp(path));
}

std::string stage_trace_to_json(const StageTrace& trace) {
  nlohmann::ordered_json j;
  j["n"] = trace.n;
  j["m"] = trace.m;
  j["p"] = trace.p;
  j["nnz"] = trace.nnz;
  j["spmm"] = trace.spmm;
  j["precision"] = trace.precision == ElementPrecision::Int8 ? "int8" : "f32";
  j["cores"] = trace.cores;
  j["pes"] = trace.pes;
  j["parallel_rows"] = trace.parallel_rows;
  j["totals"] = {{"words_read_a", trace.words_read_a},
                 {"words_read_idx", trace.words_read_idx},
                 {"words_loaded_b", trace.words_loaded_b},
                 {"mac_ops", trace.mac_ops},
                 {"lanes_active", trace.lanes_active},
                 {"results_scaled", trace.results_scaled},
                 {"words_written_c", trace.words_written_c}};
  j["tiles"] = nlohmann::ordered_json::array();
  for (const TileRecord& rec : trace.tiles) {
    j["tiles"].push_back({{"core", rec.core},
                          {"tile", rec.tile},
                          {"first_col", rec.first_col},
                          {"width", rec.width},
                          {"a_value_words", rec.a_value_words},
                          {"a_index_words", rec.a_index_words},
                          {"compute_events", rec.compute_events},
                          {"pipeline_events_max", rec.pipeline_events_max},
                          {"b_elements", rec.b_elements},
                          {"c_elements", rec.c_elements},
                          {"lanes_active", rec.lanes_active},
                          {"mac_ops", rec.mac_ops},
                          {"results_scaled", rec.results_scaled}});
  }
  return j.dump(2);
}

StageTrace stage_trace_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  StageTrace trace;
  trace.n = j.at("n");
  trace.m = j.at("m");
  trace.p = j.at("p");
  trace.nnz = j.at("nnz");
  trace.spmm = j.at("spmm");
  trace.precision = j.at("precision") == "int8" ? ElementPrecision::Int8
                                                : ElementPrecision::Float32;
  trace.cores = j.at("cores");
  trace.pes = j.at("pes");
  trace.parallel_rows = j.at("parallel_rows");
  const auto& totals = j.at("totals");
  trace.words_read_a = totals.at("words_read_a");
  trace.words_read_idx = totals.at("words_read_idx");
  trace.words_loaded_b = totals.at("words_loaded_b");
  trace.mac_ops = totals.at("mac_ops");
  trace.lanes_active = totals.at("lanes_active");
  trace.results_scaled = totals.at("results_scaled");
  trace.words_written_c = totals.at("words_written_c");
  for (const auto& t : j.at("tiles")) {
    TileRecord rec;
    rec.core = t.at("core");
    rec.tile = t.at("tile");
    rec.first_col = t.at("first_col");
    rec.width = t.at("width");
    rec.a_value_words = t.at("a_value_words");
    rec.a_index_words = t.at("a_index_words");
    rec.compute_events = t.at("compute_events");
    rec.pipeline_events_max = t.at("pipeline_events_max");
    rec.b_elements = t.at("b_elements");
    rec.c_elements = t.at("c_elements");
    rec.lanes_active = t.at("lanes_active");
    rec.mac_ops = t.at("mac_ops");
    rec.results_scaled = t.at("results_scaled");
    trace.tiles.push_back(rec);
  }
  return trace;
}

std::string perf_report_to_json(const PerfReport& report) {
  nlohmann::ordered_json j;
  j["total_cycles"] = report.total_cycles;
  j["wall_time_s"] = report.wall_time_s;
  j["reconfig_overhead_s"] = report.reconfig_overhead_s;
  j["switches_count"] = report.switches_count;
  j["cores"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.core_cycles.size(); ++c) {
    const StageSums& sums = report.core_stage_cycles[c];
    j["cores"].push_back({{"core", c},
                          {"cycles", report.core_cycles[c]},
                          {"compute", sums.compute},
                          {"read", sums.read},
                          {"b_load", sums.b_load},
                          {"write", sums.write},
                          {"fill", sums.fill}});
  }
  j["tiles"] = nlohmann::ordered_json::array();
  for (const TileCost& t : report.tiles) {
    j["tiles"].push_back({{"core", t.core},
                          {"tile", t.tile},
                          {"compute", t.compute_cycles},
                          {"read", t.read_cycles},
                          {"b_load", t.b_load_cycles},
                          {"write", t.write_cycles},
                          {"fill", t.fill_cycles},
                          {"cycles", t.tile_cycles},
                          {"bottleneck", stage_label_name(t.bottleneck)}});
  }
  return j.dump(2);
}

std::string perf_report_to_csv(const PerfReport& report) {
  std::ostringstream os;
  os << "core,tile,compute,read,b_load,write,fill,cycles,bottleneck\n";
  for (const TileCost& t : report.tiles) {
    os << t.core << ',' << t.tile << ',' << t.compute_cycles << ','
       << t.read_cycles << ',' << t.b_load_cycles << ',' << t.write_cycles << ','
       << t.fill_cycles << ',' << t.tile_cycles << ','
       << stage_label_name(t.bottleneck) << '\n';
  }
  return os.str();
}

}  // namespace fades
