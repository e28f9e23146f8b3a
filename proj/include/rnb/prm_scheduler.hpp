// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Photonic reuse scheduling: tiles weight matrices onto MRR arrays, groups
 * layers/blocks that share a basic weight block, and programs every basic
 * block exactly once per session.
 *
 * Session model. A session owns the tile states. By default each logical tile
 * has its own physical slot, so weights persist for the whole session and a
 * second pass writes nothing. With `physical_tiles` set, logical tile i lands
 * in slot i mod physical_tiles and distinct matrices overwrite each other,
 * which is what the per-cell write histogram (aging proxy) measures.
 *
 * Offset rows (one 1 x N row per matrix) get tile ids outside the weight-tile
 * range: after all logical tiles in the default mode, and physical_tiles +
 * ordinal in pooled mode. Their writes are counted separately from
 * element writes.
 */

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rnb/analytic.hpp"
#include "rnb/error.hpp"
#include "rnb/network.hpp"
#include "rnb/numerics.hpp"
#include "rnb/obu.hpp"
#include "rnb/params.hpp"
#include "rnb/photonic_tile.hpp"
#include "rnb/weights_io.hpp"

namespace rnb {

struct ReuseGroup {
  std::string basic_id;
  Granularity granularity = Granularity::layer_wise;
  std::vector<std::string> members;
  std::vector<ObuTransform> transforms;
  /// Parametric layers of the basic block, in order.
  std::vector<std::string> basic_layers;

  std::size_t reuse_times() const { return members.size(); }
};

inline std::vector<ReuseGroup> build_schedule(const NetworkDesc& net) {
  resolve_network(net);  // throws on incompatible members

  std::map<std::string, std::size_t> layer_spec, block_spec;
  for (std::size_t r = 0; r < net.reuse.size(); ++r) {
    for (const auto& m : net.reuse[r].members) {
      (net.reuse[r].granularity == Granularity::layer_wise ? layer_spec : block_spec)[m] = r;
    }
  }
  auto group_from_spec = [&](const ReuseSpec& spec) {
    ReuseGroup g;
    g.basic_id = spec.basic;
    g.granularity = spec.granularity;
    g.members = spec.members;
    g.transforms = spec.transforms;
    if (spec.granularity == Granularity::layer_wise) {
      g.basic_layers = {spec.basic};
    } else {
      for (const auto& l : net.blocks[net.block_index(spec.basic)].layers)
        if (l.parametric()) g.basic_layers.push_back(l.name);
    }
    return g;
  };

  std::vector<ReuseGroup> groups;
  std::set<std::size_t> emitted;
  for (const BlockDesc& block : net.blocks) {
    if (auto it = block_spec.find(block.name); it != block_spec.end()) {
      if (emitted.insert(it->second).second) groups.push_back(group_from_spec(net.reuse[it->second]));
      continue;
    }
    const bool has_layer_members = std::any_of(block.layers.begin(), block.layers.end(),
                                               [&](const LayerDesc& l) { return layer_spec.count(l.name); });
    if (!has_layer_members) {
      ReuseGroup g;
      g.basic_id = block.name;
      g.granularity = Granularity::block_wise;
      g.members = {block.name};
      g.transforms = {ObuTransform::identity()};
      for (const auto& l : block.layers)
        if (l.parametric()) g.basic_layers.push_back(l.name);
      if (!g.basic_layers.empty()) groups.push_back(std::move(g));
      continue;
    }
    for (const LayerDesc& l : block.layers) {
      if (!l.parametric()) continue;
      if (auto it = layer_spec.find(l.name); it != layer_spec.end()) {
        if (emitted.insert(it->second).second) groups.push_back(group_from_spec(net.reuse[it->second]));
        continue;
      }
      ReuseGroup g;
      g.basic_id = l.name;
      g.granularity = Granularity::layer_wise;
      g.members = {l.name};
      g.transforms = {ObuTransform::identity()};
      g.basic_layers = {l.name};
      groups.push_back(std::move(g));
    }
  }
  return groups;
}

/// Splits every group into one singleton per member: the programming
/// schedule of the unshared twin network.
inline std::vector<ReuseGroup> unshared_schedule(const NetworkDesc& net,
                                                 const std::vector<ReuseGroup>& groups) {
  std::vector<ReuseGroup> out;
  for (const auto& g : groups) {
    for (std::size_t m = 0; m < g.members.size(); ++m) {
      ReuseGroup s;
      s.basic_id = g.members[m];
      s.granularity = g.granularity;
      s.members = {g.members[m]};
      s.transforms = {g.transforms[m]};
      if (g.granularity == Granularity::layer_wise) {
        s.basic_layers = {g.members[m]};
      } else {
        for (const auto& l : net.blocks[net.block_index(g.members[m])].layers)
          if (l.parametric()) s.basic_layers.push_back(l.name);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tiling

struct TileSlot {
  std::size_t grid_row = 0, grid_col = 0;
  std::size_t row0 = 0, col0 = 0;
  std::size_t valid_rows = 0, valid_cols = 0;
};

struct MappingPlan {
  std::string matrix_id;
  std::size_t rows = 0, cols = 0;
  TileConfig cfg;
  std::size_t grid_rows = 0, grid_cols = 0;
  double scale = 1.0;             // max |w|; W_b = w / scale
  std::vector<TileSlot> tiles;    // row-major over the grid
  std::vector<Tensor> targets;    // per tile transmissions, padding at 0.5

  std::size_t tile_count() const { return tiles.size(); }
  std::size_t tile_index(std::size_t grid_row, std::size_t grid_col) const {
    return grid_row * grid_cols + grid_col;
  }
};

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

/// Max-abs normalization into [-1, 1], 8-bit weight quantization, offset
/// decomposition and zero-padded tiling.
inline MappingPlan tile_matrix(const Tensor& w, const TileConfig& cfg, std::string id = {},
                               int weight_bits = 8) {
  cfg.validate();
  if (w.rank() != 2 || w.empty()) throw Error(ErrorCode::mapping, "tile_matrix needs a non-empty matrix");
  MappingPlan plan;
  plan.matrix_id = std::move(id);
  plan.rows = w.rows();
  plan.cols = w.cols();
  plan.cfg = cfg;
  plan.grid_rows = ceil_div(plan.rows, cfg.rows);
  plan.grid_cols = ceil_div(plan.cols, cfg.cols);
  const double m = max_abs(w);
  plan.scale = m > 0.0 ? m : 1.0;

  std::vector<double> normalized(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) normalized[i] = std::clamp(w[i] / plan.scale, -1.0, 1.0);
  const Tensor w_b = dequantize(quantize(Tensor(w.shape(), std::move(normalized)), weight_bits, 1.0));
  const OffsetDecomposition d = decompose_offset(w_b);

  for (std::size_t gr = 0; gr < plan.grid_rows; ++gr) {
    for (std::size_t gc = 0; gc < plan.grid_cols; ++gc) {
      TileSlot slot;
      slot.grid_row = gr;
      slot.grid_col = gc;
      slot.row0 = gr * cfg.rows;
      slot.col0 = gc * cfg.cols;
      slot.valid_rows = std::min(cfg.rows, plan.rows - slot.row0);
      slot.valid_cols = std::min(cfg.cols, plan.cols - slot.col0);
      Tensor target = Tensor::filled({cfg.rows, cfg.cols}, d.w_offset_value);
      for (std::size_t r = 0; r < slot.valid_rows; ++r)
        for (std::size_t c = 0; c < slot.valid_cols; ++c)
          target(r, c) = d.w_prime(slot.row0 + r, slot.col0 + c);
      plan.tiles.push_back(slot);
      plan.targets.push_back(std::move(target));
    }
  }
  return plan;
}

/// Matrix programmed for a dense or conv layer: [out, in] or [cout, cin*k*k].
inline Tensor layer_matrix(const LayerDesc& layer, const WeightStore& weights) {
  const auto [r, c] = layer.matrix_dims();
  const Tensor w = weights.tensor(layer.weight_key());
  if (w.size() != r * c) {
    throw Error(ErrorCode::mapping, "weight '" + layer.weight_key() + "' has shape " +
                                        shape_str(w.shape()) + ", expected " +
                                        shape_str(layer.weight_shape()));
  }
  return w.reshaped({r, c});
}

/// One plan per distinct tile-mapped matrix, keyed by matrix_key.
inline std::map<std::string, MappingPlan> build_plans(const NetworkDesc& net, const WeightStore& weights,
                                                      const TileConfig& cfg, bool share = true) {
  std::map<std::string, MappingPlan> plans;
  for (const ResolvedLayer& rl : resolve_network(net, share)) {
    if (!rl.desc->optical() || plans.count(rl.matrix_key)) continue;
    const LayerDesc& owner = net.layer(rl.param_name);
    plans.emplace(rl.matrix_key, tile_matrix(layer_matrix(owner, weights), cfg, rl.matrix_key));
  }
  return plans;
}

// ---------------------------------------------------------------------------
// Execution

struct WriteTrace {
  int c_loop = 0;
  std::vector<WriteEvent> events;         // weight cells, canonical order
  std::vector<WriteEvent> offset_events;  // offset rows
  std::map<std::string, std::uint64_t> per_matrix_writes;
  std::uint64_t element_writes = 0;
  std::uint64_t offset_writes = 0;
  std::uint64_t calibration_iterations = 0;  // C x element writes
  std::uint64_t tile_programs = 0;           // tile programmings with >= 1 write
  double write_time_ns = 0.0;                // tiles programmed one after another

  std::uint64_t total_writes() const { return element_writes + offset_writes; }
};

struct SessionOptions {
  std::optional<std::size_t> physical_tiles;
  double write_tolerance = kDefaultWriteTolerance;
};

class Session {
 public:
  explicit Session(TileConfig cfg = {}, SessionOptions opts = {}) : cfg_(cfg), opts_(opts) {
    cfg_.validate();
    if (opts_.physical_tiles && *opts_.physical_tiles == 0) {
      throw Error(ErrorCode::invalid_input, "physical tile pool must be >= 1");
    }
  }

  const TileConfig& config() const { return cfg_; }

  WriteTrace execute(const std::vector<ReuseGroup>& groups,
                     const std::map<std::string, MappingPlan>& plans, const CalibrationCurve& curve,
                     const ComponentParams& params) {
    curve.validate();
    WriteTrace trace;
    trace.c_loop = curve.c_loop;
    for (const ReuseGroup& g : groups) {
      for (const std::string& key : g.basic_layers) {
        auto it = plans.find(key);
        if (it == plans.end()) continue;  // norm layers are electrical
        program_matrix(it->second, curve, params, trace);
      }
    }
    trace.calibration_iterations = static_cast<std::uint64_t>(curve.c_loop) * trace.element_writes;
    return trace;
  }

  bool has_matrix(const std::string& key) const { return first_logical_.count(key) != 0; }

  /// Programmed state of tile `index` of a matrix.
  const MrrTileState& tile(const std::string& key, std::size_t index) const {
    auto it = first_logical_.find(key);
    if (it == first_logical_.end()) {
      throw Error(ErrorCode::session, "matrix '" + key + "' has not been programmed in this session");
    }
    const std::size_t slot = physical_slot(it->second + index);
    auto rit = resident_.find(slot);
    if (rit == resident_.end() || rit->second != key) {
      throw Error(ErrorCode::session, "tiles of matrix '" + key + "' were overwritten in the tile pool");
    }
    return physical_.at(slot);
  }

  const MrrTileState& offset_row(const std::string& key) const {
    auto it = offset_rows_.find(key);
    if (it == offset_rows_.end()) {
      throw Error(ErrorCode::session, "offset row of '" + key + "' has not been programmed");
    }
    return it->second;
  }

  /// Per-cell write counts keyed by (tile id, row, col).
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::uint32_t> cell_writes() const {
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::uint32_t> out;
    for (const auto& [slot, st] : physical_)
      for (std::size_t r = 0; r < st.config.rows; ++r)
        for (std::size_t c = 0; c < st.config.cols; ++c)
          out[{slot, r, c}] = st.write_count[r * st.config.cols + c];
    return out;
  }

 private:
  std::size_t physical_slot(std::size_t logical) const {
    return opts_.physical_tiles ? logical % *opts_.physical_tiles : logical;
  }

  void program_matrix(const MappingPlan& plan, const CalibrationCurve& curve,
                      const ComponentParams& params, WriteTrace& trace) {
    const std::string& key = plan.matrix_id;
    if (plan.cfg.rows != cfg_.rows || plan.cfg.cols != cfg_.cols) {
      throw Error(ErrorCode::mapping, "plan '" + key + "' was tiled for a different tile size");
    }
    if (!first_logical_.count(key)) {
      first_logical_[key] = next_logical_;
      next_logical_ += plan.tile_count();
    }
    const std::size_t first = first_logical_[key];
    std::uint64_t& matrix_writes = trace.per_matrix_writes[key];
    for (std::size_t i = 0; i < plan.tile_count(); ++i) {
      const std::size_t slot = physical_slot(first + i);
      auto it = physical_.find(slot);
      if (it == physical_.end()) it = physical_.emplace(slot, MrrTileState::fresh(cfg_, slot)).first;
      ProgramResult r = program_tile(it->second, plan.targets[i], curve, params, opts_.write_tolerance);
      it->second = std::move(r.state);
      resident_[slot] = key;
      if (!r.events.empty()) ++trace.tile_programs;
      trace.element_writes += r.events.size();
      matrix_writes += r.events.size();
      trace.write_time_ns += r.program_time_ns;
      trace.events.insert(trace.events.end(), r.events.begin(), r.events.end());
    }

    auto oit = offset_rows_.find(key);
    if (oit == offset_rows_.end()) {
      const std::size_t id = opts_.physical_tiles ? *opts_.physical_tiles + offset_rows_.size()
                                                  : next_offset_id();
      TileConfig row_cfg{1, offset_row_cost(plan.cols), cfg_.dwdm_capacity};
      oit = offset_rows_.emplace(key, MrrTileState::fresh(row_cfg, id)).first;
    }
    const Tensor offset_target = Tensor::filled({1, oit->second.config.cols}, kOffsetValue);
    ProgramResult r = program_tile(oit->second, offset_target, curve, params, opts_.write_tolerance);
    oit->second = std::move(r.state);
    trace.offset_writes += r.events.size();
    trace.write_time_ns += r.program_time_ns;
    trace.offset_events.insert(trace.offset_events.end(), r.events.begin(), r.events.end());
  }

  std::size_t next_offset_id() { return kOffsetIdBase + offset_rows_.size(); }

  // Offset rows sit far above any weight-tile id in the unpooled mode.
  static constexpr std::size_t kOffsetIdBase = std::size_t{1} << 32;

  TileConfig cfg_;
  SessionOptions opts_;
  std::map<std::string, std::size_t> first_logical_;
  std::size_t next_logical_ = 0;
  std::map<std::size_t, MrrTileState> physical_;
  std::map<std::size_t, std::string> resident_;
  std::map<std::string, MrrTileState> offset_rows_;
};

inline WriteTrace execute_plan(Session& session, const std::vector<ReuseGroup>& groups,
                               const std::map<std::string, MappingPlan>& plans,
                               const CalibrationCurve& curve, const ComponentParams& params) {
  return session.execute(groups, plans, curve, params);
}

inline void write_trace_csv(std::ostream& os, const WriteTrace& trace) {
  os << "tile_id,row,col,target,iterations,energy_nj,time_ns\n";
  char line[256];
  auto emit = [&](const WriteEvent& e) {
    std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.9f,%d,%.6f,%.3f\n", e.tile_id, e.row, e.col,
                  e.target, e.iterations, e.energy_nj, e.time_ns);
    os << line;
  };
  for (const auto& e : trace.events) emit(e);
  for (const auto& e : trace.offset_events) emit(e);
}

struct ProgrammingStats {
  std::uint64_t element_writes = 0;
  std::uint64_t offset_writes = 0;
  std::uint64_t tile_programs = 0;
  std::uint64_t normalized_programming_times = 0;  // min(N, B)
};

inline ProgrammingStats programming_stats(const WriteTrace& trace, std::uint64_t n, std::uint64_t b) {
  return {trace.element_writes, trace.offset_writes, trace.tile_programs, std::min(n, b)};
}

struct NormalizedProgramming {
  double mzi = 0.0, crosslight = 0.0, holylight = 0.0, rnb = 0.0;
};

inline NormalizedProgramming normalized_costs(const ArchFormulaInputs& in) {
  return {analytic_cost(Arch::mzi, in).programming_times,
          analytic_cost(Arch::crosslight, in).programming_times,
          analytic_cost(Arch::holylight, in).programming_times,
          analytic_cost(Arch::rnb, in).programming_times};
}

}  // namespace rnb
