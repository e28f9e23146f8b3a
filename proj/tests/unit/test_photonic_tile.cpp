// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rnb/photonic_tile.hpp"

namespace rnb {
namespace {

MrrTileState programmed(const Tensor& target, TileConfig cfg = {}) {
  MrrTileState s = MrrTileState::fresh(cfg);
  return program_tile(s, target, CalibrationCurve::identity(), ComponentParams{}).state;
}

TEST(OffsetDecomposition, HandExample) {
  const Tensor wb = Tensor::matrix({{-1, 1}, {0.5, -0.5}});
  const OffsetDecomposition d = decompose_offset(wb);
  EXPECT_EQ(d.w_prime, Tensor::matrix({{0, 1}, {0.75, 0.25}}));
  EXPECT_EQ(d.w_offset_value, 0.5);
  const Tensor x = Tensor::vector({1, 2});
  EXPECT_EQ(offset_product(d, x), Tensor::vector({1.5, 1.5}));
  EXPECT_EQ(reconstruct_product(d, x), Tensor::vector({1, -0.5}));
  EXPECT_EQ(reconstruct_product(d, x), matvec_reference(wb, x));
}

TEST(OffsetDecomposition, ZeroAndScalar) {
  const OffsetDecomposition z = decompose_offset(Tensor::zeros({3, 3}));
  EXPECT_EQ(z.w_prime, Tensor::filled({3, 3}, 0.5));
  EXPECT_EQ(reconstruct_product(z, Tensor::vector({0.2, 0.4, 0.9})), Tensor::zeros({3}));
  EXPECT_EQ(reconstruct_product(decompose_offset(Tensor::matrix({{1}})), Tensor::vector({3}))[0], 3.0);
}

TEST(OffsetDecomposition, OutOfRangeIsNormalizationError) {
  try {
    decompose_offset(Tensor::matrix({{1.5}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::normalization);
  }
}

TEST(OffsetRowCost, CountsColumns) {
  EXPECT_EQ(offset_row_cost(256), 256u);
  EXPECT_EQ(offset_row_cost(1), 1u);
  EXPECT_EQ(offset_row_cost(8), 8u);
}

TEST(VoltageForTarget, IdentityCurve) {
  const auto c = CalibrationCurve::identity();
  EXPECT_DOUBLE_EQ(voltage_for_target(c, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(voltage_for_target(c, 0.0), 0.0);
}

TEST(VoltageForTarget, SinSquaredRoundTrip) {
  const auto c = CalibrationCurve::sin_squared();
  EXPECT_NEAR(voltage_for_target(c, 0.5), std::sqrt(0.5), 1e-9);
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    const double v = voltage_for_target(c, x);
    EXPECT_NEAR(c.transmission(v), x, 1e-9);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(VoltageForTarget, UnreachableTarget) {
  try {
    voltage_for_target(CalibrationCurve::identity(), 1.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unreachable_target);
  }
}

TEST(ProgramTile, FreshTileWritesEveryCell) {
  const auto target = testing::random_tensor({8, 8}, 1, 0.0, 1.0);
  const ComponentParams p;
  const auto r = program_tile(MrrTileState::fresh({}), target, CalibrationCurve::identity(10), p);
  ASSERT_EQ(r.events.size(), 64u);
  for (const auto& e : r.events) {
    EXPECT_EQ(e.iterations, 10);
    EXPECT_DOUBLE_EQ(e.energy_nj, 10 * 14.0 * 100.0 * 1e-3);
    EXPECT_DOUBLE_EQ(e.time_ns, 1000.0);
  }
  // 8 serial writes per row, rows in parallel
  EXPECT_DOUBLE_EQ(r.program_time_ns, 8000.0);
  EXPECT_LE(max_abs_diff(r.state.programmed, target), 1e-12);
  EXPECT_EQ(r.state.total_writes(), 64u);
}

TEST(ProgramTile, IdempotentAndSingleCellChange) {
  const auto target = testing::random_tensor({8, 8}, 2, 0.0, 1.0);
  const auto curve = CalibrationCurve::identity(7);
  const ComponentParams p;
  auto first = program_tile(MrrTileState::fresh({}), target, curve, p);
  auto again = program_tile(first.state, target, curve, p);
  EXPECT_TRUE(again.events.empty());
  EXPECT_EQ(again.program_time_ns, 0.0);
  Tensor changed = target;
  changed(3, 4) = changed(3, 4) > 0.5 ? 0.1 : 0.9;
  auto one = program_tile(first.state, changed, curve, p);
  ASSERT_EQ(one.events.size(), 1u);
  EXPECT_EQ(one.events[0].row, 3u);
  EXPECT_EQ(one.events[0].col, 4u);
  EXPECT_EQ(one.events[0].iterations, 7);
  EXPECT_EQ(one.state.write_count[3 * 8 + 4], 2u);
}

TEST(ProgramTile, SubToleranceChangeIsSkipped) {
  const Tensor target = Tensor::filled({8, 8}, 0.5);
  auto first = program_tile(MrrTileState::fresh({}), target, CalibrationCurve::identity(), {});
  Tensor nudged = target;
  nudged(0, 0) += 0.5 / 255.0;
  EXPECT_TRUE(program_tile(first.state, nudged, CalibrationCurve::identity(), {}).events.empty());
}

TEST(ProgramTile, CostLinearInC) {
  const auto target = testing::random_tensor({8, 8}, 3, 0.0, 1.0);
  double e1 = 0, t1 = 0;
  for (int c : {1, 5, 20}) {
    const auto r = program_tile(MrrTileState::fresh({}), target, CalibrationCurve::identity(c), {});
    double e = 0;
    for (const auto& ev : r.events) e += ev.energy_nj;
    if (c == 1) {
      e1 = e;
      t1 = r.program_time_ns;
    }
    EXPECT_NEAR(e, c * e1, 1e-9);
    EXPECT_NEAR(r.program_time_ns, c * t1, 1e-9);
  }
}

TEST(ProgramTile, DimensionMismatchIsMappingError) {
  try {
    program_tile(MrrTileState::fresh({}), Tensor::zeros({4, 4}), CalibrationCurve::identity(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::mapping);
  }
}

TEST(TileMvm, HandExampleHorizontalAndVertical) {
  const TileConfig cfg{2, 2, 16};
  const MrrTileState s = programmed(Tensor::matrix({{0, 1}, {1, 0}}), cfg);
  const double half_step = 0.5 * 2.0 / 255.0;
  EXPECT_LE(max_abs_diff(tile_mvm(s, Tensor::vector({1, 0})), Tensor::vector({0, 1})), half_step);
  EXPECT_LE(max_abs_diff(tile_mvm(s, Tensor::vector({1, 0}), InputDirection::vertical),
                         Tensor::vector({0, 1})),
            half_step);
}

TEST(TileMvm, VerticalInputIsTransposedProduct) {
  const TileConfig cfg{2, 2, 16};
  const Tensor w = Tensor::matrix({{0, 1}, {0, 0}});
  const MrrTileState s = programmed(w, cfg);
  const Tensor x = Tensor::vector({1, 0});
  EXPECT_LE(max_abs_diff(tile_mvm(s, x, InputDirection::vertical), matvec_reference(transpose2d(w), x)),
            1.0 / 255.0);
  EXPECT_EQ(tile_mvm(s, x), Tensor::vector({0, 0}));
}

TEST(TileMvm, WithinOneAdcStepOfOracle) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Tensor w = testing::random_tensor({8, 8}, seed, 0.0, 1.0);
    const Tensor x = testing::random_tensor({8}, seed + 1000, 0.0, 1.0);
    const MrrTileState s = programmed(w);
    const double step = 8.0 / 255.0;
    EXPECT_LE(max_abs_diff(tile_mvm(s, x), matvec_reference(w, x)), step);
    EXPECT_LE(max_abs_diff(tile_mvm(s, x, InputDirection::vertical),
                           matvec_reference(transpose2d(w), x)),
              step);
  }
}

TEST(TileMvm, ZeroLogicalWeightGivesZeroAfterOffset) {
  const MrrTileState s = programmed(Tensor::filled({8, 8}, 0.5));
  MrrTileState off = MrrTileState::fresh({1, 8, 16});
  off = program_tile(off, Tensor::filled({1, 8}, 0.5), CalibrationCurve::identity(), {}).state;
  const Tensor x = testing::random_tensor({8}, 11, 0.0, 1.0);
  const Tensor raw = tile_mvm(s, x);
  const double o = offset_readout(off, x);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(2 * (raw[i] - o), 0.0);
}

TEST(TileMvm, InputOutsideUnitRangeIsEncodingError) {
  const MrrTileState s = programmed(Tensor::filled({8, 8}, 0.5));
  try {
    tile_mvm(s, Tensor::filled({8}, -0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::encoding);
  }
}

}  // namespace
}  // namespace rnb
