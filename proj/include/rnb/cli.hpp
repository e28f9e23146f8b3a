// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

// Library side of the `rnb` command-line tool: scenario parsing, the
// program/infer/account pipeline, report comparison and plot-data emission.
// The executable in tools/ only wires these functions to arguments.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnb/analytic.hpp"
#include "rnb/cost_model.hpp"
#include "rnb/error.hpp"
#include "rnb/netgraph.hpp"
#include "rnb/params.hpp"
#include "rnb/photonic_tile.hpp"
#include "rnb/prm_scheduler.hpp"
#include "rnb/weights_io.hpp"

namespace rnb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kReportSchema = "rnb-report/1";

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_text(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, what + " not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const fs::path& path, const std::string& what) {
  const std::string text = read_text(path, what);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, what + " " + path.string() + ": invalid JSON: " + e.what());
  }
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::io, "cannot write " + path.string());
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline NetworkDesc load_net(const fs::path& path) { return parse_netdesc_json(read_json(path, "network")); }

inline ComponentParams load_params(const std::optional<fs::path>& path) {
  if (!path) return {};
  return apply_overrides({}, read_json(*path, "params file"));
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json new_report(bool timestamp) {
  json r;
  r["schema"] = kReportSchema;
  if (timestamp) r["generated_at"] = utc_timestamp();
  return r;
}

inline std::string tile_label(const TileConfig& t) {
  return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

// ---------------------------------------------------------------------------
// Scenario

struct Scenario {
  fs::path net_path;
  std::optional<fs::path> weights_path;  // empty: seeded random weights
  std::vector<TileConfig> tiles;
  int c_loop = 10;
  std::size_t dwdm = 16;
  bool reuse = true;
  json params = json::object();
  std::uint64_t seed = 1;
  std::size_t inputs = 4;
  std::uint64_t input_seed = 7;
  std::optional<std::size_t> physical_tiles;
  std::string curve = "identity";
  json echo;

  CalibrationCurve calibration() const {
    return curve == "sin_squared" ? CalibrationCurve::sin_squared(c_loop) : CalibrationCurve::identity(c_loop);
  }

  /// Resolved settings as they appear in reports.
  json to_json() const {
    json j = echo;
    j["tiles"] = json::array();
    for (const auto& t : tiles) j["tiles"].push_back({{"rows", t.rows}, {"cols", t.cols}});
    j["c_loop"] = c_loop;
    j["dwdm"] = dwdm;
    j["reuse"] = reuse;
    j["params"] = params;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["input_seed"] = input_seed;
    j["physical_tiles"] = physical_tiles ? json(*physical_tiles) : json(nullptr);
    j["curve"] = curve;
    return j;
  }
};

namespace detail {

inline std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw Error(ErrorCode::schema, std::string("$.") + key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline TileConfig parse_tile(const json& t, const std::string& path) {
  TileConfig cfg;
  if (t.is_number_integer()) {
    if (t.get<long long>() < 1) throw Error(ErrorCode::schema, path + ": expected a positive tile size");
    cfg.rows = cfg.cols = t.get<std::size_t>();
  } else if (t.is_object()) {
    cfg.rows = rnb::detail::get_size(t, "rows", path);
    cfg.cols = rnb::detail::get_size(t, "cols", path);
  } else {
    throw Error(ErrorCode::schema, path + ": expected a size or {rows, cols}");
  }
  return cfg;
}

}  // namespace detail

/// Parses a scenario object; relative paths resolve against `base_dir`.
inline Scenario parse_scenario(const json& j, const fs::path& base_dir = {}) {
  if (!j.is_object()) throw Error(ErrorCode::schema, "$: expected an object");
  static const std::vector<std::string> known = {"net",    "weights", "tiles",      "tile",
                                                 "c_loop", "dwdm",    "reuse",      "params",
                                                 "seed",   "inputs",  "input_seed", "physical_tiles",
                                                 "curve",  "name"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::schema, "$." + key + ": unknown scenario field");
    }
  }
  Scenario s;
  s.echo = json::object();
  if (j.contains("name")) s.echo["name"] = j["name"];
  const std::string net = rnb::detail::get_string(j, "net", "$");
  s.net_path = base_dir / net;
  s.echo["net"] = net;
  const std::string weights = rnb::detail::get_string(j, "weights", "$", "random");
  if (weights != "random") s.weights_path = base_dir / weights;
  s.echo["weights"] = weights;

  if (j.contains("tiles")) {
    if (!j["tiles"].is_array() || j["tiles"].empty()) {
      throw Error(ErrorCode::schema, "$.tiles: expected a non-empty array");
    }
    for (std::size_t i = 0; i < j["tiles"].size(); ++i) {
      s.tiles.push_back(detail::parse_tile(j["tiles"][i], "$.tiles[" + std::to_string(i) + "]"));
    }
  } else if (j.contains("tile")) {
    s.tiles.push_back(detail::parse_tile(j["tile"], "$.tile"));
  } else {
    s.tiles.push_back(TileConfig{});
  }
  s.c_loop = static_cast<int>(rnb::detail::get_size(j, "c_loop", "$", 10));
  s.dwdm = rnb::detail::get_size(j, "dwdm", "$", 16);
  for (auto& t : s.tiles) {
    t.dwdm_capacity = s.dwdm;
    t.validate();
  }
  if (j.contains("reuse")) {
    if (!j["reuse"].is_boolean()) throw Error(ErrorCode::schema, "$.reuse: expected true or false");
    s.reuse = j["reuse"].get<bool>();
  }
  if (j.contains("params")) {
    apply_overrides({}, j["params"]);  // type check early
    s.params = j["params"];
  }
  s.seed = detail::get_u64(j, "seed", 1);
  s.inputs = rnb::detail::get_count(j, "inputs", "$", 4);
  s.input_seed = detail::get_u64(j, "input_seed", 7);
  if (j.contains("physical_tiles") && !j["physical_tiles"].is_null()) {
    s.physical_tiles = rnb::detail::get_size(j, "physical_tiles", "$");
  }
  s.curve = rnb::detail::get_string(j, "curve", "$", "identity");
  if (s.curve != "identity" && s.curve != "sin_squared") {
    throw Error(ErrorCode::schema, "$.curve: expected identity or sin_squared");
  }
  s.calibration().validate();
  return s;
}

inline Scenario load_scenario(const fs::path& path) {
  return parse_scenario(read_json(path, "scenario"), path.parent_path());
}

// ---------------------------------------------------------------------------
// simulate

struct RunOutput {
  std::string label;
  WriteTrace trace;
  CostReport cost;
};

struct SimulationOutput {
  json report;
  std::vector<RunOutput> runs;
};

inline Tensor uniform_input(const Shape& shape, SplitMix64& rng) {
  std::vector<double> v(numel(shape));
  for (double& e : v) e = 2.0 * rng.uniform() - 1.0;
  return Tensor(shape, std::move(v));
}

inline json to_json(const AgingReport& a) {
  json h = json::object();
  for (const auto& [writes, cells] : a.histogram) h[std::to_string(writes)] = cells;
  return {{"max_writes", a.max_writes}, {"mean_writes", a.mean_writes}, {"cells", a.per_cell.size()},
          {"histogram", h}};
}

/// Program, infer and account for every tile size in the scenario.
inline SimulationOutput simulate(const Scenario& sc, const ComponentParams& base_params, bool timestamp) {
  const ComponentParams params = apply_overrides(base_params, sc.params);
  const NetworkDesc net = load_net(sc.net_path);
  const WeightStore weights = sc.weights_path ? load_weights(sc.weights_path->string())
                                              : init_weights(net, sc.seed);
  const CalibrationCurve curve = sc.calibration();

  std::vector<Tensor> inputs;
  SplitMix64 rng(sc.input_seed);
  for (std::size_t i = 0; i < sc.inputs; ++i) inputs.push_back(uniform_input(net.input_shape, rng));

  SimulationOutput out;
  out.report = new_report(timestamp);
  out.report["scenario"] = sc.to_json();
  out.report["network"] = {{"name", net.name}, {"parameters", parameter_count(net)}};
  out.report["params"] = to_json(params);
  out.report["runs"] = json::array();

  for (const TileConfig& tile : sc.tiles) {
    PhotonicOptions opts;
    opts.tile = tile;
    opts.session.physical_tiles = sc.physical_tiles;
    opts.share = sc.reuse;
    PhotonicEngine engine(net, weights, curve, params, opts);
    const WriteTrace trace = engine.program();

    double max_dev = 0.0, bound = 0.0;
    for (const Tensor& x : inputs) {
      std::vector<LayerProbe> probes;
      const Tensor y = engine.forward(x, &probes);
      max_dev = std::max(max_dev, max_abs_diff(y, forward_float(net, weights, x)));
      bound = std::max(bound, propagated_bound(probes));
    }
    const CostReport cost = simulate_cost(trace, engine.workload(), params);
    const ProgrammingStats stats = programming_stats(trace, tile.cols, tile.dwdm_capacity);

    json prog = {{"element_writes", stats.element_writes},
                 {"offset_writes", stats.offset_writes},
                 {"total_writes", trace.total_writes()},
                 {"tile_programs", stats.tile_programs},
                 {"calibration_iterations", trace.calibration_iterations},
                 {"normalized_programming_times", stats.normalized_programming_times},
                 {"write_time_ns", trace.write_time_ns},
                 {"per_matrix_writes", trace.per_matrix_writes}};
    if (sc.reuse) {
      // Same weights with every use stored separately.
      Session twin(tile, opts.session);
      const WriteTrace unshared = twin.execute(unshared_schedule(net, build_schedule(net)),
                                               build_plans(net, weights, tile, false), curve, params);
      prog["baseline_element_writes"] = unshared.element_writes;
      prog["write_ratio"] = unshared.element_writes == 0
                                ? json(nullptr)
                                : json(static_cast<double>(trace.element_writes) /
                                       static_cast<double>(unshared.element_writes));
    }

    json run;
    run["label"] = tile_label(tile);
    run["tile"] = {{"rows", tile.rows}, {"cols", tile.cols}, {"dwdm_capacity", tile.dwdm_capacity}};
    run["tile_cells"] = tile.rows * tile.cols;
    run["programming"] = prog;
    run["cost"] = to_json(cost);
    run["area"] = to_json(area_report(net, tile, params, sc.reuse));
    run["aging"] = to_json(aging_proxy(trace));
    if (inputs.empty()) {
      run["equivalence"] = {{"inputs", 0}, {"max_deviation", nullptr}, {"propagated_bound", nullptr},
                            {"within_bound", nullptr}};
    } else {
      run["equivalence"] = {{"inputs", inputs.size()},
                            {"max_deviation", max_dev},
                            {"propagated_bound", bound},
                            {"within_bound", max_dev <= bound}};
    }
    out.report["runs"].push_back(run);
    out.runs.push_back({tile_label(tile), trace, cost});
  }
  return out;
}

/// Writes report.json plus a trace and cost CSV per run into `dir`.
inline void write_simulation(const SimulationOutput& sim, const fs::path& dir) {
  write_json(dir / "report.json", sim.report);
  for (const RunOutput& r : sim.runs) {
    std::ostringstream trace, cost;
    write_trace_csv(trace, r.trace);
    write_cost_csv(cost, r.cost);
    write_text(dir / ("trace_" + r.label + ".csv"), trace.str());
    write_text(dir / ("cost_" + r.label + ".csv"), cost.str());
  }
}

// ---------------------------------------------------------------------------
// cost

inline std::string format_cost_table(const std::vector<Arch>& archs, const ArchFormulaInputs& in) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %20s %16s %16s\n", "arch", "programming_times", "latency_units",
                "power_units");
  os << line;
  for (Arch a : archs) {
    const ArchCost c = analytic_cost(a, in);
    std::snprintf(line, sizeof line, "%-12s %20.10g %16.10g %16.10g\n", std::string(to_string(a)).c_str(),
                  c.programming_times, c.latency_units, c.power_units);
    os << line;
  }
  return os.str();
}

inline void write_cost_table_csv(std::ostream& os, const std::vector<Arch>& archs,
                                 const std::vector<ArchFormulaInputs>& grid, bool header = true) {
  if (header) os << "arch,M,N,K,C,B,beta_a,beta_p,beta_t,programming_times,latency_units,power_units\n";
  char line[256];
  for (const auto& in : grid) {
    for (Arch a : archs) {
      const ArchCost c = analytic_cost(a, in);
      std::snprintf(line, sizeof line, "%s,%llu,%llu,%llu,%llu,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                    std::string(to_string(a)).c_str(), static_cast<unsigned long long>(in.M),
                    static_cast<unsigned long long>(in.N), static_cast<unsigned long long>(in.K),
                    static_cast<unsigned long long>(in.C), static_cast<unsigned long long>(in.B), in.beta_a,
                    in.beta_p, in.beta_t, c.programming_times, c.latency_units, c.power_units);
      os << line;
    }
  }
}

// ---------------------------------------------------------------------------
// compare

struct RunComparison {
  std::string label;
  CostReport baseline;
  CostReport scenario;
  Savings savings;
};

inline void check_schema(const json& report, const std::string& which) {
  if (!report.is_object() || !report.contains("schema") || !report["schema"].is_string()) {
    throw Error(ErrorCode::version, which + " report has no schema field");
  }
  const std::string got = report["schema"].get<std::string>();
  if (got != kReportSchema) {
    throw Error(ErrorCode::version,
                which + " report schema '" + got + "' is not supported (expected " + kReportSchema + ")");
  }
  if (!report.contains("runs") || !report["runs"].is_array() || report["runs"].empty()) {
    throw Error(ErrorCode::schema, which + " report has no runs");
  }
}

inline std::vector<RunComparison> compare_reports(const json& baseline, const json& scenario) {
  check_schema(baseline, "baseline");
  check_schema(scenario, "scenario");
  const json& a = baseline["runs"];
  const json& b = scenario["runs"];
  if (a.size() != b.size()) {
    throw Error(ErrorCode::schema, "reports have " + std::to_string(a.size()) + " and " +
                                       std::to_string(b.size()) + " runs");
  }
  std::vector<RunComparison> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string la = a[i].value("label", ""), lb = b[i].value("label", "");
    if (la != lb) throw Error(ErrorCode::schema, "run " + std::to_string(i) + " is '" + la + "' vs '" + lb + "'");
    if (!a[i].contains("cost") || !b[i].contains("cost")) {
      throw Error(ErrorCode::schema, "run '" + la + "' has no cost section");
    }
    RunComparison c;
    c.label = la;
    c.baseline = cost_report_from_json(a[i]["cost"]);
    c.scenario = cost_report_from_json(b[i]["cost"]);
    c.savings = compare_costs(c.baseline, c.scenario);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::string percent(const std::optional<double>& s) {
  if (!s) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * *s);
  return std::string(buf) == "-0.0%" ? "0.0%" : buf;
}

inline std::string format_comparison(const std::vector<RunComparison>& runs) {
  std::ostringstream os;
  for (const auto& r : runs) {
    os << "run " << r.label << ": energy savings " << percent(r.savings.energy) << ", latency savings "
       << percent(r.savings.latency) << "\n";
    for (const char* c : kEnergyCategories) os << "  " << c << ": " << percent(r.savings.category.at(c)) << "\n";
  }
  return os.str();
}

inline void write_comparison_csv(std::ostream& os, const std::vector<RunComparison>& runs) {
  os << "category,baseline,scenario,delta\n";
  char line[256];
  for (const auto& r : runs) {
    const std::string prefix = runs.size() > 1 ? r.label + "/" : "";
    auto row = [&](const std::string& name, double a, double b) {
      std::snprintf(line, sizeof line, "%s%s,%.9g,%.9g,%.9g\n", prefix.c_str(), name.c_str(), a, b, b - a);
      os << line;
    };
    for (const char* c : kEnergyCategories) row(c, r.baseline.energy_uj.at(c), r.scenario.energy_uj.at(c));
    row("total_energy_uj", r.baseline.total_energy_uj(), r.scenario.total_energy_uj());
    row("latency_ns", r.baseline.latency_ns, r.scenario.latency_ns);
  }
}

// ---------------------------------------------------------------------------
// Published latency/energy rows for the 8x256x256 reuse-8 workload.

struct Table3Data {
  std::vector<Table3Point> no_reuse;
  std::vector<Table3Point> reuse;
  double reuse_factor = 8.0;
};

inline Table3Data table3_data() {
  return {{{64, 217190, 35.70}, {256, 54297, 9.68}, {1024, 13574, 3.17}},
          {{64, 77490, 12.50}, {256, 20197, 3.35}, {1024, 5874, 1.06}},
          8.0};
}

/// Cost report for one measured row: the write component of the fit is
/// booked as programming and calibration, the remainder as "other".
inline CostReport measured_cost_report(const Table3Model& m, const Table3Point& p, bool reuse, int c_loop) {
  CostReport r;
  for (const char* c : kEnergyCategories) r.energy_uj[c] = 0.0;
  const double div = reuse ? m.reuse_factor : 1.0;
  const double write_uj = m.energy.write.at(p.tile_n) / div;
  r.energy_uj["programming"] = write_uj / c_loop;
  r.energy_uj["calibration"] = write_uj - write_uj / c_loop;
  r.energy_uj["other"] = p.energy_uj - write_uj;
  r.write_latency_ns = m.delay.write.at(p.tile_n) / div;
  r.compute_latency_ns = p.delay_ns - r.write_latency_ns;
  r.latency_ns = p.delay_ns;
  return r;
}

inline json measured_report(const Table3Model& m, const Table3Point& p, bool reuse, int c_loop, bool timestamp) {
  json r = new_report(timestamp);
  r["scenario"] = {{"source", "published 8x256x256 rows"},
                   {"tile_n", p.tile_n},
                   {"reuse", reuse},
                   {"reuse_factor", m.reuse_factor},
                   {"c_loop", c_loop}};
  json run;
  run["label"] = "N=" + std::to_string(static_cast<long long>(p.tile_n));
  run["tile_cells"] = p.tile_n;
  run["measured"] = {{"delay_ns", p.delay_ns}, {"energy_uj", p.energy_uj}};
  run["cost"] = to_json(measured_cost_report(m, p, reuse, c_loop));
  r["runs"] = json::array({run});
  return r;
}

/// Fit from the first two rows, checked against every row.
inline Table3Model fit_published_table3(const Table3Data& d) {
  return fit_table3({d.no_reuse[0], d.no_reuse[1]}, {d.reuse[0], d.reuse[1]}, d.reuse_factor);
}

inline void write_table3_fit_csv(std::ostream& os, const Table3Model& m, const Table3Data& d) {
  os << "tile_n,delay_no_reuse_ns,delay_reuse_ns,energy_no_reuse_uj,energy_reuse_uj,"
        "observed_delay_no_reuse_ns,observed_delay_reuse_ns,observed_energy_no_reuse_uj,observed_energy_reuse_uj\n";
  char line[320];
  for (double n : {16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0}) {
    std::string observed = ",,,";
    for (std::size_t i = 0; i < d.no_reuse.size(); ++i) {
      if (d.no_reuse[i].tile_n == n) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g", d.no_reuse[i].delay_ns, d.reuse[i].delay_ns,
                      d.no_reuse[i].energy_uj, d.reuse[i].energy_uj);
        observed = buf;
      }
    }
    std::snprintf(line, sizeof line, "%.0f,%.9g,%.9g,%.9g,%.9g,%s\n", n, m.predict_delay_ns(n, false),
                  m.predict_delay_ns(n, true), m.predict_energy_uj(n, false), m.predict_energy_uj(n, true),
                  observed.c_str());
    os << line;
  }
}

inline json table3_fit_json(const Table3Model& m, const Table3Data& d) {
  auto axis = [](const Table3Axis& a) {
    return json{{"write", {{"a", a.write.a}, {"b", a.write.b}}}, {"residual", {{"a", a.residual.a}, {"b", a.residual.b}}}};
  };
  json rows = json::array();
  for (std::size_t i = 0; i < d.no_reuse.size(); ++i) {
    const double n = d.no_reuse[i].tile_n;
    auto rel = [](double pred, double obs) { return (pred - obs) / obs; };
    rows.push_back({{"tile_n", n},
                    {"fitted", i < 2},
                    {"delay_no_reuse_rel_error", rel(m.predict_delay_ns(n, false), d.no_reuse[i].delay_ns)},
                    {"delay_reuse_rel_error", rel(m.predict_delay_ns(n, true), d.reuse[i].delay_ns)},
                    {"energy_no_reuse_rel_error", rel(m.predict_energy_uj(n, false), d.no_reuse[i].energy_uj)},
                    {"energy_reuse_rel_error", rel(m.predict_energy_uj(n, true), d.reuse[i].energy_uj)}});
  }
  return {{"reuse_factor", m.reuse_factor}, {"delay_ns", axis(m.delay)}, {"energy_uj", axis(m.energy)},
          {"rows", rows}};
}

/// Grid used for the plot sweep of the closed-form comparison.
inline std::vector<ArchFormulaInputs> table2_grid() {
  std::vector<ArchFormulaInputs> grid;
  for (std::uint64_t n = 8; n <= 1024; n *= 2)
    for (std::uint64_t b : {4, 16, 64})
      for (std::uint64_t k : {1, 4, 16})
        for (std::uint64_t c : {1, 10, 100}) {
          ArchFormulaInputs in;
          in.M = in.N = n;
          in.B = b;
          in.K = k;
          in.C = c;
          grid.push_back(in);
        }
  return grid;
}

/// Writes every plot-ready artifact into `dir`.
inline void emit_plot_data(const fs::path& dir, int c_loop, bool timestamp) {
  std::ostringstream t2;
  write_cost_table_csv(t2, {kAllArchs.begin(), kAllArchs.end()}, table2_grid());
  write_text(dir / "table2_sweep.csv", t2.str());

  const Table3Data d = table3_data();
  const Table3Model m = fit_published_table3(d);
  std::ostringstream t3;
  write_table3_fit_csv(t3, m, d);
  write_text(dir / "table3_fit.csv", t3.str());
  write_json(dir / "table3_fit.json", table3_fit_json(m, d));
  for (std::size_t i = 0; i < d.no_reuse.size(); ++i) {
    const std::string n = std::to_string(static_cast<long long>(d.no_reuse[i].tile_n));
    write_json(dir / ("table3_n" + n + "_no_reuse.json"), measured_report(m, d.no_reuse[i], false, c_loop, timestamp));
    write_json(dir / ("table3_n" + n + "_reuse.json"), measured_report(m, d.reuse[i], true, c_loop, timestamp));
  }
}

// ---------------------------------------------------------------------------
// train-toy

struct TrainToyOptions {
  fs::path net_path;
  std::string dataset = "blobs";  // blobs | idx
  std::size_t samples = 400;
  std::uint64_t data_seed = 1;
  double separation = 5.0;
  std::optional<fs::path> images, labels;
  std::optional<fs::path> initial_weights;
  TrainConfig train;
};

struct TrainToyOutcome {
  TrainResult result;
  double final_accuracy = 0.0;
};

inline Dataset load_toy_dataset(const TrainToyOptions& o, const NetworkDesc& net) {
  if (o.dataset == "blobs") {
    if (net.input_shape.size() != 1) {
      throw Error(ErrorCode::invalid_input, "blob data needs a network with a flat input");
    }
    return make_blobs(o.samples, net.input_shape[0], o.data_seed, o.separation);
  }
  if (o.dataset == "idx") {
    if (!o.images || !o.labels) throw Error(ErrorCode::invalid_input, "idx data needs --images and --labels");
    Dataset d = load_idx(o.images->string(), o.labels->string(), o.samples);
    if (numel(d.sample_shape) != numel(net.input_shape)) {
      throw Error(ErrorCode::dimension, "idx samples " + shape_str(d.sample_shape) + " do not fit network input " +
                                            shape_str(net.input_shape));
    }
    for (Tensor& t : d.inputs) t = t.reshaped(net.input_shape);
    d.sample_shape = net.input_shape;
    return d;
  }
  throw Error(ErrorCode::invalid_input, "unknown dataset '" + o.dataset + "'");
}

inline TrainToyOutcome train_toy(const TrainToyOptions& o) {
  const NetworkDesc net = load_net(o.net_path);
  const Dataset data = load_toy_dataset(o, net);
  std::optional<WeightStore> init;
  if (o.initial_weights) init = load_weights(o.initial_weights->string());
  TrainToyOutcome out;
  out.result = toy_train(net, data, o.train, std::move(init));
  out.final_accuracy = evaluate(net, out.result.weights, data);
  return out;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<EpochMetrics>& history) {
  os << "epoch,loss,accuracy,lr\n";
  char line[128];
  for (const auto& m : history) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g\n", m.epoch, m.loss, m.accuracy, m.lr);
    os << line;
  }
}

}  // namespace rnb::cli
