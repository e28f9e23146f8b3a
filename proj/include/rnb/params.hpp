// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "rnb/error.hpp"

namespace rnb {

/// Component constants. The Table-1 device values are the defaults; the
/// remaining knobs (settle time, clock, laser, S&H power, eDRAM access
/// energy, blend-unit costs) are not tabulated and are exposed for overrides.
struct ComponentParams {
  double heater_tuner_mw = 14.0;
  double modulator_driver_mw = 0.8;  // at 10 Gb/s
  double adc_mw = 39.0;
  double dac_mw = 3.93;
  double mrr_cell_area_mm2 = 0.127 * 0.127;
  double adc_area_mm2 = 1.2288;
  double dac_area_mm2 = 0.0004;
  double sh_area_mm2 = 0.00004;
  double edram_area_mm2 = 0.268;
  double bus_area_mm2 = 0.009;
  double pd_responsivity_a_per_w = 1.1;

  double write_settle_ns = 100.0;      // one program/calibrate iteration
  double clock_ghz = 10.0;             // one MVM symbol per cycle
  double laser_mw_per_channel = 10.0;
  double sample_hold_mw = 0.5;
  double edram_pj_per_byte = 1.0;
  int ppu_count = 1;

  double shuffle_energy_pj = 0.0;      // per shuffled activation element
  double shuffle_latency_ns = 0.0;     // per shuffle, overlapped by default

  double cycle_ns() const { return 1.0 / clock_ghz; }

  /// Energy of one element write of C iterations, in nJ (mW x ns = pJ).
  double write_energy_nj(int iterations) const {
    return iterations * heater_tuner_mw * write_settle_ns * 1e-3;
  }
  double write_time_ns(int iterations) const { return iterations * write_settle_ns; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(std::isfinite(v) && v > 0.0)) {
        throw Error(ErrorCode::invalid_input,
                    std::string("component parameter ") + name + " must be > 0");
      }
    };
    auto nonneg = [](double v, const char* name) {
      if (!(std::isfinite(v) && v >= 0.0)) {
        throw Error(ErrorCode::invalid_input,
                    std::string("component parameter ") + name + " must be >= 0");
      }
    };
    positive(heater_tuner_mw, "heater_tuner_mw");
    positive(modulator_driver_mw, "modulator_driver_mw");
    positive(adc_mw, "adc_mw");
    positive(dac_mw, "dac_mw");
    positive(mrr_cell_area_mm2, "mrr_cell_area_mm2");
    positive(adc_area_mm2, "adc_area_mm2");
    positive(dac_area_mm2, "dac_area_mm2");
    positive(sh_area_mm2, "sh_area_mm2");
    positive(edram_area_mm2, "edram_area_mm2");
    positive(bus_area_mm2, "bus_area_mm2");
    positive(pd_responsivity_a_per_w, "pd_responsivity_a_per_w");
    positive(write_settle_ns, "write_settle_ns");
    positive(clock_ghz, "clock_ghz");
    positive(laser_mw_per_channel, "laser_mw_per_channel");
    positive(sample_hold_mw, "sample_hold_mw");
    nonneg(edram_pj_per_byte, "edram_pj_per_byte");
    nonneg(shuffle_energy_pj, "shuffle_energy_pj");
    nonneg(shuffle_latency_ns, "shuffle_latency_ns");
    if (ppu_count < 1) throw Error(ErrorCode::invalid_input, "ppu_count must be >= 1");
  }
};

#define RNB_PARAM_FIELDS(X)                                                         \
  X(heater_tuner_mw) X(modulator_driver_mw) X(adc_mw) X(dac_mw) X(mrr_cell_area_mm2) \
  X(adc_area_mm2) X(dac_area_mm2) X(sh_area_mm2) X(edram_area_mm2) X(bus_area_mm2)   \
  X(pd_responsivity_a_per_w) X(write_settle_ns) X(clock_ghz) X(laser_mw_per_channel)  \
  X(sample_hold_mw) X(edram_pj_per_byte) X(ppu_count) X(shuffle_energy_pj)           \
  X(shuffle_latency_ns)

inline nlohmann::json to_json(const ComponentParams& p) {
  nlohmann::json j;
#define X(field) j[#field] = p.field;
  RNB_PARAM_FIELDS(X)
#undef X
  return j;
}

/// Applies the keys present in `overrides`; unknown keys and wrong types are
/// schema errors.
inline ComponentParams apply_overrides(ComponentParams p, const nlohmann::json& overrides) {
  if (!overrides.is_object()) {
    throw Error(ErrorCode::schema, "$.params: expected an object");
  }
  for (const auto& [key, value] : overrides.items()) {
    bool known = false;
#define X(field)                                                                    \
    if (key == #field) {                                                            \
      known = true;                                                                 \
      if (!value.is_number()) {                                                     \
        throw Error(ErrorCode::schema, "$.params." + key + ": expected a number");  \
      }                                                                             \
      p.field = value.get<decltype(p.field)>();                                     \
    }
    RNB_PARAM_FIELDS(X)
#undef X
    if (!known) throw Error(ErrorCode::schema, "$.params." + key + ": unknown parameter");
  }
  p.validate();
  return p;
}

#undef RNB_PARAM_FIELDS

}  // namespace rnb
