// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Energy, latency and area accounting.
 *
 * Write energy comes straight from the trace: each element write of C
 * iterations costs C x heater power x settle time. The first iteration is
 * booked as programming, the remaining C - 1 as calibration.
 *
 * Compute energy is power x active time, one symbol per clock cycle:
 *   laser, modulation, dac : per input symbol
 *   adc, sample_hold       : per output sample
 *   memory                 : eDRAM bytes moved plus blend-unit remaps
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <cstdio>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "rnb/error.hpp"
#include "rnb/network.hpp"
#include "rnb/params.hpp"
#include "rnb/photonic_tile.hpp"
#include "rnb/prm_scheduler.hpp"

namespace rnb {

/// "other" holds measured energy that no modeled component accounts for; the
/// simulator itself never books into it.
inline constexpr std::array<const char*, 9> kEnergyCategories = {
    "programming", "calibration", "laser", "modulation", "adc", "dac", "sample_hold", "memory", "other"};

/// Inference-side operation counts accumulated by the photonic engine.
struct Workload {
  std::uint64_t tile_mvms = 0;
  std::uint64_t input_symbols = 0;
  std::uint64_t output_samples = 0;
  std::uint64_t mvm_cycles = 0;
  std::uint64_t memory_bytes = 0;
  std::uint64_t shuffles = 0;
  std::uint64_t shuffled_elements = 0;

  Workload& operator+=(const Workload& o) {
    tile_mvms += o.tile_mvms;
    input_symbols += o.input_symbols;
    output_samples += o.output_samples;
    mvm_cycles += o.mvm_cycles;
    memory_bytes += o.memory_bytes;
    shuffles += o.shuffles;
    shuffled_elements += o.shuffled_elements;
    return *this;
  }

  bool empty() const { return tile_mvms == 0 && memory_bytes == 0 && shuffles == 0; }
};

struct CostReport {
  std::map<std::string, double> energy_uj;
  double write_latency_ns = 0.0;
  double compute_latency_ns = 0.0;
  double latency_ns = 0.0;

  double total_energy_uj() const {
    double t = 0.0;
    for (const char* c : kEnergyCategories) t += energy_uj.at(c);
    return t;
  }
};

inline CostReport simulate_cost(const WriteTrace& trace, const Workload& workload,
                                const ComponentParams& params) {
  params.validate();
  CostReport r;
  for (const char* c : kEnergyCategories) r.energy_uj[c] = 0.0;

  // Tally equal per-write energies and multiply once, so identical writes
  // scale exactly with their count.
  std::map<double, std::uint64_t> program_nj, calibrate_nj;
  auto book = [&](const WriteEvent& e) {
    const double first = e.iterations > 0 ? e.energy_nj / e.iterations : 0.0;
    ++program_nj[first];
    ++calibrate_nj[e.energy_nj - first];
  };
  for (const auto& e : trace.events) book(e);
  for (const auto& e : trace.offset_events) book(e);
  auto total = [](const std::map<double, std::uint64_t>& tally) {
    double t = 0.0;
    for (const auto& [nj, n] : tally) t += nj * static_cast<double>(n);
    return t;
  };
  r.energy_uj["programming"] = total(program_nj) * 1e-3;
  r.energy_uj["calibration"] = total(calibrate_nj) * 1e-3;

  const double cycle = params.cycle_ns();
  const double in_sym = static_cast<double>(workload.input_symbols);
  const double out_smp = static_cast<double>(workload.output_samples);
  // mW x ns = pJ; pJ x 1e-6 = uJ
  r.energy_uj["laser"] = params.laser_mw_per_channel * in_sym * cycle * 1e-6;
  r.energy_uj["modulation"] = params.modulator_driver_mw * in_sym * cycle * 1e-6;
  r.energy_uj["dac"] = params.dac_mw * in_sym * cycle * 1e-6;
  r.energy_uj["adc"] = params.adc_mw * out_smp * cycle * 1e-6;
  r.energy_uj["sample_hold"] = params.sample_hold_mw * out_smp * cycle * 1e-6;
  r.energy_uj["memory"] = (params.edram_pj_per_byte * static_cast<double>(workload.memory_bytes) +
                           params.shuffle_energy_pj * static_cast<double>(workload.shuffled_elements)) *
                          1e-6;

  r.write_latency_ns = trace.write_time_ns;
  r.compute_latency_ns = static_cast<double>(workload.mvm_cycles) * cycle +
                         static_cast<double>(workload.shuffles) * params.shuffle_latency_ns;
  r.latency_ns = r.write_latency_ns + r.compute_latency_ns;
  return r;
}

/// 1 - scenario / baseline; empty when the baseline is zero and the
/// scenario is not.
inline std::optional<double> savings_ratio(double baseline, double scenario) {
  if (baseline == 0.0) return scenario == 0.0 ? std::optional<double>(0.0) : std::nullopt;
  return 1.0 - scenario / baseline;
}

struct Savings {
  std::optional<double> energy;
  std::optional<double> latency;
  std::map<std::string, std::optional<double>> category;
};

inline Savings compare_costs(const CostReport& baseline, const CostReport& scenario) {
  Savings s;
  s.energy = savings_ratio(baseline.total_energy_uj(), scenario.total_energy_uj());
  s.latency = savings_ratio(baseline.latency_ns, scenario.latency_ns);
  for (const char* c : kEnergyCategories) {
    s.category[c] = savings_ratio(baseline.energy_uj.at(c), scenario.energy_uj.at(c));
  }
  return s;
}

inline nlohmann::json to_json(const CostReport& r) {
  nlohmann::json j;
  j["energy_uj"] = nlohmann::json::object();
  for (const char* c : kEnergyCategories) j["energy_uj"][c] = r.energy_uj.at(c);
  j["total_energy_uj"] = r.total_energy_uj();
  j["latency_ns"] = r.latency_ns;
  j["write_latency_ns"] = r.write_latency_ns;
  j["compute_latency_ns"] = r.compute_latency_ns;
  return j;
}

inline CostReport cost_report_from_json(const nlohmann::json& j) {
  CostReport r;
  try {
    for (const char* c : kEnergyCategories) r.energy_uj[c] = j.at("energy_uj").at(c).get<double>();
    r.latency_ns = j.at("latency_ns").get<double>();
    r.write_latency_ns = j.value("write_latency_ns", 0.0);
    r.compute_latency_ns = j.value("compute_latency_ns", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("cost report: ") + e.what());
  }
  return r;
}

inline void write_cost_csv(std::ostream& os, const CostReport& r) {
  os << "category,energy_uj\n";
  char line[128];
  for (const char* c : kEnergyCategories) {
    std::snprintf(line, sizeof line, "%s,%.9g\n", c, r.energy_uj.at(c));
    os << line;
  }
  std::snprintf(line, sizeof line, "total,%.9g\n", r.total_energy_uj());
  os << line;
}

// ---------------------------------------------------------------------------
// Area

struct AreaReport {
  std::size_t distinct_tiles = 0;
  std::size_t offset_cells = 0;
  double mrr_mm2 = 0.0;
  double offset_mrr_mm2 = 0.0;
  double adc_mm2 = 0.0;
  double dac_mm2 = 0.0;
  double sample_hold_mm2 = 0.0;
  double edram_mm2 = 0.0;
  double bus_mm2 = 0.0;

  double total_mm2() const {
    return mrr_mm2 + offset_mrr_mm2 + adc_mm2 + dac_mm2 + sample_hold_mm2 + edram_mm2 + bus_mm2;
  }
};

/// Area for a set of distinct tile-mapped matrices (rows x cols each).
/// Each PPU carries one DAC per tile column, one ADC and S&H per tile row,
/// one eDRAM macro and one bus.
inline AreaReport area_from_matrices(const std::vector<std::pair<std::size_t, std::size_t>>& matrices,
                                     const TileConfig& cfg, const ComponentParams& params) {
  cfg.validate();
  AreaReport a;
  for (const auto& [r, c] : matrices) {
    a.distinct_tiles += ceil_div(r, cfg.rows) * ceil_div(c, cfg.cols);
    a.offset_cells += offset_row_cost(c);
  }
  a.mrr_mm2 = static_cast<double>(a.distinct_tiles * cfg.cells()) * params.mrr_cell_area_mm2;
  a.offset_mrr_mm2 = static_cast<double>(a.offset_cells) * params.mrr_cell_area_mm2;
  const double ppus = params.ppu_count;
  a.adc_mm2 = ppus * static_cast<double>(cfg.rows) * params.adc_area_mm2;
  a.dac_mm2 = ppus * static_cast<double>(cfg.cols) * params.dac_area_mm2;
  a.sample_hold_mm2 = ppus * static_cast<double>(cfg.rows) * params.sh_area_mm2;
  a.edram_mm2 = ppus * params.edram_area_mm2;
  a.bus_mm2 = ppus * params.bus_area_mm2;
  return a;
}

/// Area of the MRR arrays a network needs; shared groups count once.
inline AreaReport area_report(const NetworkDesc& net, const TileConfig& cfg,
                              const ComponentParams& params, bool share = true) {
  std::vector<std::pair<std::size_t, std::size_t>> matrices;
  std::set<std::string> seen;
  for (const ResolvedLayer& rl : resolve_network(net, share)) {
    if (!rl.desc->optical() || !seen.insert(rl.matrix_key).second) continue;
    matrices.push_back(net.layer(rl.param_name).matrix_dims());
  }
  return area_from_matrices(matrices, cfg, params);
}

inline nlohmann::json to_json(const AreaReport& a) {
  return {{"distinct_tiles", a.distinct_tiles}, {"offset_cells", a.offset_cells},
          {"mrr_mm2", a.mrr_mm2},               {"offset_mrr_mm2", a.offset_mrr_mm2},
          {"adc_mm2", a.adc_mm2},               {"dac_mm2", a.dac_mm2},
          {"sample_hold_mm2", a.sample_hold_mm2}, {"edram_mm2", a.edram_mm2},
          {"bus_mm2", a.bus_mm2},               {"total_mm2", a.total_mm2()}};
}

// ---------------------------------------------------------------------------
// Aging proxy

struct AgingReport {
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::uint64_t> per_cell;
  std::map<std::uint64_t, std::size_t> histogram;  // writes -> cell count
  std::uint64_t max_writes = 0;
  double mean_writes = 0.0;
};

/// Weight-cell write counts over one or more traces (offset rows excluded).
inline AgingReport aging_proxy(const std::vector<const WriteTrace*>& traces) {
  AgingReport a;
  for (const WriteTrace* t : traces)
    for (const auto& e : t->events) ++a.per_cell[{e.tile_id, e.row, e.col}];
  std::uint64_t sum = 0;
  for (const auto& [cell, n] : a.per_cell) {
    ++a.histogram[n];
    a.max_writes = std::max(a.max_writes, n);
    sum += n;
  }
  if (!a.per_cell.empty()) a.mean_writes = static_cast<double>(sum) / a.per_cell.size();
  return a;
}

inline AgingReport aging_proxy(const WriteTrace& trace) { return aging_proxy({&trace}); }

// ---------------------------------------------------------------------------
// Reuse-vs-no-reuse decomposition of measured (tile size, delay, energy) rows.
//
// With reuse factor T, no_reuse = D + W and reuse = D + W / T, so the write
// component is W = T / (T - 1) (no_reuse - reuse) and D = no_reuse - W. Both
// are fitted as a / N + b in the tile size N.

struct Table3Point {
  double tile_n = 0.0;
  double delay_ns = 0.0;
  double energy_uj = 0.0;
};

struct InverseAffine {
  double a = 0.0, b = 0.0;
  double at(double n) const { return a / n + b; }
};

struct Table3Axis {
  InverseAffine write;
  InverseAffine residual;
};

struct Table3Residual {
  double tile_n;
  double delay_no_reuse, delay_reuse, energy_no_reuse, energy_reuse;  // predicted - observed
};

struct Table3Model {
  double reuse_factor = 8.0;
  Table3Axis delay;
  Table3Axis energy;
  std::vector<Table3Residual> residuals;

  double predict_delay_ns(double n, bool reuse) const {
    return delay.residual.at(n) + delay.write.at(n) / (reuse ? reuse_factor : 1.0);
  }
  double predict_energy_uj(double n, bool reuse) const {
    return energy.residual.at(n) + energy.write.at(n) / (reuse ? reuse_factor : 1.0);
  }
};

namespace detail {

/// Least squares y = a / n + b (exact through two points).
inline InverseAffine fit_inverse_affine(const std::vector<double>& n, const std::vector<double>& y) {
  const std::size_t m = n.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = 1.0 / n[i];
    sx += x; sy += y[i]; sxx += x * x; sxy += x * y[i];
  }
  const double det = m * sxx - sx * sx;
  if (det == 0.0) throw Error(ErrorCode::fit, "tile sizes must be distinct");
  InverseAffine f;
  f.a = (m * sxy - sx * sy) / det;
  f.b = (sy - f.a * sx) / m;
  return f;
}

}  // namespace detail

inline Table3Model fit_table3(const std::vector<Table3Point>& no_reuse,
                              const std::vector<Table3Point>& reuse, double reuse_factor = 8.0) {
  if (no_reuse.size() < 2 || reuse.size() != no_reuse.size()) {
    throw Error(ErrorCode::fit, "need >= 2 matching tile sizes for reuse and no-reuse rows");
  }
  if (!(reuse_factor > 1.0)) throw Error(ErrorCode::fit, "reuse factor must be > 1");
  const double w_gain = reuse_factor / (reuse_factor - 1.0);
  std::vector<double> n, dw, dd, ew, ed;
  for (std::size_t i = 0; i < no_reuse.size(); ++i) {
    const Table3Point& a = no_reuse[i];
    const Table3Point& b = reuse[i];
    if (a.tile_n != b.tile_n || !(a.tile_n > 0.0)) {
      throw Error(ErrorCode::fit, "reuse and no-reuse rows must list the same positive tile sizes");
    }
    n.push_back(a.tile_n);
    const double wd = w_gain * (a.delay_ns - b.delay_ns);
    const double we = w_gain * (a.energy_uj - b.energy_uj);
    dw.push_back(wd);
    dd.push_back(a.delay_ns - wd);
    ew.push_back(we);
    ed.push_back(a.energy_uj - we);
  }
  Table3Model m;
  m.reuse_factor = reuse_factor;
  m.delay = {detail::fit_inverse_affine(n, dw), detail::fit_inverse_affine(n, dd)};
  m.energy = {detail::fit_inverse_affine(n, ew), detail::fit_inverse_affine(n, ed)};
  for (std::size_t i = 0; i < n.size(); ++i) {
    m.residuals.push_back({n[i], m.predict_delay_ns(n[i], false) - no_reuse[i].delay_ns,
                           m.predict_delay_ns(n[i], true) - reuse[i].delay_ns,
                           m.predict_energy_uj(n[i], false) - no_reuse[i].energy_uj,
                           m.predict_energy_uj(n[i], true) - reuse[i].energy_uj});
  }
  return m;
}

}  // namespace rnb
