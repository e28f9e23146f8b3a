// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "rnb/prm_scheduler.hpp"

namespace rnb {
namespace {

using testing::dense;
using testing::dense_stack;
using testing::random_weights;
using testing::relu;

WriteTrace run(const NetworkDesc& net, bool share, std::uint64_t seed = 1, TileConfig cfg = {}) {
  const WeightStore w = random_weights(net, seed);
  Session s(cfg);
  auto groups = build_schedule(net);
  if (!share) groups = unshared_schedule(net, groups);
  return execute_plan(s, groups, build_plans(net, w, cfg, share), CalibrationCurve::identity(), {});
}

TEST(BuildSchedule, BlockSharedEightTimes) {
  const auto groups = build_schedule(dense_stack(8, 16, true));
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].reuse_times(), 8u);
  EXPECT_EQ(groups[0].members.front(), "b1");
  EXPECT_EQ(groups[0].members.back(), "b8");
}

TEST(BuildSchedule, UnannotatedBlocksAreSingletons) {
  const auto groups = build_schedule(dense_stack(5, 4, false));
  ASSERT_EQ(groups.size(), 5u);
  for (const auto& g : groups) EXPECT_EQ(g.reuse_times(), 1u);
}

TEST(BuildSchedule, LayerWiseTwoByThree) {
  NetworkDesc net;
  net.input_shape = {8};
  BlockDesc b;
  b.name = "b1";
  for (int i = 1; i <= 6; ++i) b.layers.push_back(dense("fc" + std::to_string(i), 8, 8));
  net.blocks.push_back(b);
  net.reuse.push_back({"fc1", {"fc1", "fc2", "fc3"}, Granularity::layer_wise,
                       std::vector<ObuTransform>(3, ObuTransform::identity())});
  net.reuse.push_back({"fc4", {"fc4", "fc5", "fc6"}, Granularity::layer_wise,
                       std::vector<ObuTransform>(3, ObuTransform::identity())});
  const auto groups = build_schedule(net);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].reuse_times(), 3u);
  EXPECT_EQ(groups[1].reuse_times(), 3u);
  EXPECT_EQ(groups[1].basic_id, "fc4");
}

TEST(BuildSchedule, IncompatibleMemberNamesMemberAndShape) {
  NetworkDesc net;
  net.input_shape = {8};
  net.blocks.push_back({"b1", {dense("a", 8, 8), dense("b", 8, 4)}});
  net.reuse.push_back({"a", {"a", "b"}, Granularity::layer_wise,
                       std::vector<ObuTransform>(2, ObuTransform::identity())});
  try {
    build_schedule(net);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schedule);
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("in=8, out=8"), std::string::npos);
  }
}

TEST(BuildSchedule, ReluBelongsToNoGroupButLayersDo) {
  NetworkDesc net;
  net.input_shape = {4};
  net.blocks.push_back({"b1", {dense("fc1", 4, 4), relu("r"), dense("fc2", 4, 4)}});
  const auto groups = build_schedule(net);
  std::size_t layers = 0;
  for (const auto& g : groups) layers += g.basic_layers.size();
  EXPECT_EQ(layers, 2u);
}

TEST(TileMatrix, GridCounts) {
  const TileConfig cfg;
  EXPECT_EQ(tile_matrix(testing::random_tensor({256, 256}, 1), cfg).tile_count(), 1024u);
  EXPECT_EQ(tile_matrix(testing::random_tensor({8, 8}, 2), cfg).tile_count(), 1u);
  const MappingPlan p = tile_matrix(testing::random_tensor({10, 10}, 3), cfg);
  EXPECT_EQ(p.tile_count(), 4u);
  EXPECT_EQ(p.tiles[3].valid_rows, 2u);
  EXPECT_EQ(p.tiles[3].valid_cols, 2u);
  // padding holds logical zero
  EXPECT_EQ(p.targets[3](5, 5), 0.5);
}

TEST(TileMatrix, CoversEveryWeightOnce) {
  const Tensor w = testing::random_tensor({13, 9}, 4);
  const MappingPlan p = tile_matrix(w, {});
  EXPECT_GT(p.scale, 0.0);
  std::vector<int> hits(w.size(), 0);
  for (std::size_t t = 0; t < p.tile_count(); ++t) {
    const TileSlot& s = p.tiles[t];
    for (std::size_t r = 0; r < s.valid_rows; ++r)
      for (std::size_t c = 0; c < s.valid_cols; ++c) {
        ++hits[(s.row0 + r) * w.cols() + s.col0 + c];
        const double logical = 2 * p.targets[t](r, c) - 1;
        EXPECT_NEAR(logical * p.scale, w(s.row0 + r, s.col0 + c), p.scale / 127.0);
      }
  }
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ExecutePlan, EightFoldSharedStackCounts) {
  const WriteTrace none = run(dense_stack(8, 256, false), false);
  const WriteTrace reuse = run(dense_stack(8, 256, true), true);
  EXPECT_EQ(none.element_writes, 524288u);
  EXPECT_EQ(reuse.element_writes, 65536u);
  EXPECT_EQ(none.element_writes, 8 * reuse.element_writes);
  EXPECT_EQ(none.offset_writes, 8u * 256u);
  EXPECT_EQ(reuse.offset_writes, 256u);
  EXPECT_EQ(reuse.calibration_iterations, 10u * 65536u);
}

TEST(ExecutePlan, SingleTile) {
  const WriteTrace t = run(dense_stack(1, 8, false), true);
  EXPECT_EQ(t.element_writes, 64u);
  EXPECT_EQ(t.tile_programs, 1u);
}

TEST(ExecutePlan, ReuseLawOverShapes) {
  for (std::size_t n : {8, 12, 40}) {
    for (std::size_t t : {2, 3, 5}) {
      const auto a = run(dense_stack(t, n, false), false);
      const auto b = run(dense_stack(t, n, true), true);
      EXPECT_EQ(a.element_writes, t * b.element_writes) << n << " " << t;
    }
  }
}

TEST(ExecutePlan, SecondPassWritesNothing) {
  const NetworkDesc net = dense_stack(3, 16, false);
  const WeightStore w = random_weights(net, 5);
  Session s;
  const auto groups = build_schedule(net);
  const auto plans = build_plans(net, w, {});
  const WriteTrace first = execute_plan(s, groups, plans, CalibrationCurve::identity(), {});
  const WriteTrace second = execute_plan(s, groups, plans, CalibrationCurve::identity(), {});
  EXPECT_GT(first.element_writes, 0u);
  EXPECT_EQ(second.element_writes, 0u);
  EXPECT_EQ(second.offset_writes, 0u);
  EXPECT_TRUE(second.events.empty());
}

TEST(ExecutePlan, DeterministicTraceBytes) {
  auto csv = [] {
    std::ostringstream os;
    write_trace_csv(os, run(dense_stack(2, 12, true), true, 42));
    return os.str();
  };
  const std::string a = csv();
  EXPECT_EQ(a, csv());
  EXPECT_EQ(a.substr(0, a.find('\n')), "tile_id,row,col,target,iterations,energy_nj,time_ns");
}

TEST(ExecutePlan, TransposeMemberAddsNoWrites) {
  NetworkDesc net;
  net.input_shape = {8};
  net.blocks.push_back({"b1", {dense("a", 8, 16), dense("b", 16, 8)}});
  net.reuse.push_back({"a", {"a", "b"}, Granularity::layer_wise, {ObuTransform::identity(), ObuTransform::transpose()}});
  const WriteTrace t = run(net, true);
  EXPECT_EQ(t.element_writes, 128u);
}

TEST(Session, PooledTilesOverwriteBetweenMatrices) {
  const NetworkDesc net = dense_stack(8, 16, false);
  const WeightStore w = random_weights(net, 9);
  Session s({}, SessionOptions{4});
  const WriteTrace t = execute_plan(s, build_schedule(net), build_plans(net, w, {}), CalibrationCurve::identity(), {});
  // Cells already within one write step of the next target are skipped.
  EXPECT_LE(t.element_writes, 8u * 256u);
  EXPECT_GT(t.element_writes, 7u * 256u);
  std::uint32_t max = 0;
  for (const auto& [cell, n] : s.cell_writes()) max = std::max(max, n);
  EXPECT_EQ(max, 8u);
  EXPECT_THROW(s.tile("b1.fc", 0), Error);
  EXPECT_NO_THROW(s.tile("b8.fc", 0));
}

TEST(NormalizedCosts, ClosedFormExamples) {
  ArchFormulaInputs in;
  in.N = 256;
  in.B = 16;
  in.K = 8;
  in.C = 100;
  const auto c = normalized_costs(in);
  EXPECT_EQ(c.rnb, 16.0);
  EXPECT_EQ(c.holylight, 12800.0);
  EXPECT_EQ(c.holylight / c.rnb, 800.0);
  in.K = 1;
  in.C = 1;
  EXPECT_EQ(normalized_costs(in).rnb, normalized_costs(in).holylight);
  ArchFormulaInputs m;
  m.M = m.N = 8;
  m.K = 1;
  EXPECT_EQ(normalized_costs(m).mzi, 1536.0);
}

}  // namespace
}  // namespace rnb
