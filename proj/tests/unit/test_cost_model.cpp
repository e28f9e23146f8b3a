// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rnb/analytic.hpp"
#include "rnb/cost_model.hpp"
#include "rnb/params.hpp"

namespace rnb {
namespace {

using testing::dense_stack;

ArchFormulaInputs inputs(std::uint64_t n, std::uint64_t b, std::uint64_t k, std::uint64_t c) {
  ArchFormulaInputs in;
  in.M = n;
  in.N = n;
  in.B = b;
  in.K = k;
  in.C = c;
  return in;
}

WriteTrace trace_for(const NetworkDesc& net, bool share, int c_loop = 10) {
  const WeightStore w = testing::random_weights(net, 3);
  Session s;
  auto groups = build_schedule(net);
  if (!share) groups = unshared_schedule(net, groups);
  return s.execute(groups, build_plans(net, w, {}, share), CalibrationCurve::identity(c_loop), {});
}

TEST(AnalyticCost, ClosedFormExamples) {
  EXPECT_EQ(analytic_cost(Arch::rnb, inputs(256, 16, 8, 10)).latency_units, 2.0);
  EXPECT_EQ(analytic_cost(Arch::holylight, inputs(256, 16, 8, 10)).latency_units, 160.0);
  EXPECT_EQ(analytic_cost(Arch::rnb, inputs(256, 16, 8, 10)).programming_times, 16.0);
  EXPECT_EQ(analytic_cost(Arch::rnb, inputs(256, 16, 1, 1)).programming_times, 16.0);
  auto bt = inputs(256, 16, 8, 10);
  const double p1 = analytic_cost(Arch::crosslight, bt).power_units;
  bt.beta_t = 2.0;
  EXPECT_EQ(analytic_cost(Arch::crosslight, bt).power_units, p1 / 2);
}

TEST(AnalyticCost, RnbInvariantBaselinesIncreasing) {
  for (std::uint64_t c = 1; c < 50; ++c) {
    const auto lo = inputs(64, 16, 4, c), hi = inputs(64, 16, 4, c + 1);
    EXPECT_EQ(analytic_cost(Arch::rnb, lo).programming_times, analytic_cost(Arch::rnb, hi).programming_times);
    EXPECT_LT(analytic_cost(Arch::holylight, lo).programming_times,
              analytic_cost(Arch::holylight, hi).programming_times);
    EXPECT_LT(analytic_cost(Arch::crosslight, lo).programming_times,
              analytic_cost(Arch::crosslight, hi).programming_times);
  }
}

TEST(AnalyticCost, ParseArch) {
  EXPECT_EQ(parse_arch("holylight"), Arch::holylight);
  EXPECT_THROW(parse_arch("tpu"), Error);
  EXPECT_THROW(analytic_cost(Arch::rnb, inputs(0, 16, 1, 1)), Error);
}

TEST(SimulateCost, CategoriesSumAndWriteEnergy) {
  const WriteTrace t = trace_for(dense_stack(2, 16, false), false);
  Workload w;
  w.tile_mvms = 100;
  w.input_symbols = 800;
  w.output_samples = 900;
  w.mvm_cycles = 100;
  w.memory_bytes = 4096;
  const ComponentParams p;
  const CostReport r = simulate_cost(t, w, p);
  double sum = 0;
  for (const char* c : kEnergyCategories) {
    EXPECT_GE(r.energy_uj.at(c), 0.0);
    sum += r.energy_uj.at(c);
  }
  EXPECT_DOUBLE_EQ(sum, r.total_energy_uj());
  double writes = 0;
  for (const auto& e : t.events) writes += e.energy_nj;
  for (const auto& e : t.offset_events) writes += e.energy_nj;
  EXPECT_NEAR(r.energy_uj.at("programming") + r.energy_uj.at("calibration"), writes * 1e-3, 1e-9);
  EXPECT_NEAR(r.energy_uj.at("calibration"), 9 * r.energy_uj.at("programming"), 1e-9);
  EXPECT_NEAR(r.energy_uj.at("adc"), 39.0 * 900 * 0.1 * 1e-6, 1e-15);
  EXPECT_DOUBLE_EQ(r.latency_ns, t.write_time_ns + 100 * 0.1);
}

TEST(SimulateCost, EmptyWorkloadAndZeroTrace) {
  const CostReport r = simulate_cost(WriteTrace{}, Workload{}, {});
  for (const char* c : kEnergyCategories) EXPECT_EQ(r.energy_uj.at(c), 0.0);
  EXPECT_EQ(r.latency_ns, 0.0);
}

TEST(SimulateCost, ReuseCutsWriteEnergyByT) {
  const auto none = simulate_cost(trace_for(dense_stack(8, 32, false), false), {}, {});
  const auto reuse = simulate_cost(trace_for(dense_stack(8, 32, true), true), {}, {});
  const double a = none.energy_uj.at("programming") + none.energy_uj.at("calibration");
  const double b = reuse.energy_uj.at("programming") + reuse.energy_uj.at("calibration");
  EXPECT_NEAR(a / b, 8.0, 1e-12);
}

TEST(Savings, MonotoneInReuseFactor) {
  Workload w;
  w.input_symbols = 10000;
  w.output_samples = 10000;
  w.mvm_cycles = 1000;
  const auto base = simulate_cost(trace_for(dense_stack(8, 16, false), false), w, {});
  double prev = -1;
  for (std::size_t t : {1, 2, 4, 8}) {
    NetworkDesc net = dense_stack(8, 16, false);
    ReuseSpec spec{"b1", {}, Granularity::block_wise, {}};
    for (std::size_t m = 0; m < t; ++m) spec.members.push_back(net.blocks[m].name);
    spec.transforms.assign(t, ObuTransform::identity());
    net.reuse.push_back(spec);
    const auto s = compare_costs(base, simulate_cost(trace_for(net, true), w, {}));
    ASSERT_TRUE(s.energy.has_value());
    EXPECT_GE(*s.energy, prev);
    prev = *s.energy;
  }
}

TEST(Savings, UndefinedRatioIsEmpty) {
  EXPECT_FALSE(savings_ratio(0.0, 1.0).has_value());
  EXPECT_EQ(*savings_ratio(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(*savings_ratio(35.70, 12.50), 1 - 12.50 / 35.70);
}

TEST(CostReport, JsonRoundTripAndCsv) {
  const auto r = simulate_cost(trace_for(dense_stack(1, 8, false), false), {}, {});
  const CostReport back = cost_report_from_json(to_json(r));
  EXPECT_EQ(back.energy_uj, r.energy_uj);
  EXPECT_EQ(back.latency_ns, r.latency_ns);
  std::ostringstream os;
  write_cost_csv(os, r);
  EXPECT_EQ(os.str().substr(0, 18), "category,energy_uj");
}

TEST(AreaReport, OneTileAndSharing) {
  const ComponentParams p;
  const AreaReport one = area_report(dense_stack(1, 8, false), {}, p);
  EXPECT_EQ(one.distinct_tiles, 1u);
  EXPECT_NEAR(one.mrr_mm2, 1.032256, 1e-12);
  EXPECT_NEAR(one.mrr_mm2, 1.032, 5e-4);
  const AreaReport shared = area_report(dense_stack(8, 64, true), {}, p);
  const AreaReport unshared = area_report(dense_stack(8, 64, true), {}, p, false);
  EXPECT_EQ(unshared.distinct_tiles, 8 * shared.distinct_tiles);
  EXPECT_DOUBLE_EQ(unshared.mrr_mm2, 8 * shared.mrr_mm2);
  EXPECT_DOUBLE_EQ(shared.mrr_mm2, area_report(dense_stack(1, 64, false), {}, p).mrr_mm2);
}

TEST(AreaReport, EmptyMatrixSetHasOnlyPeripherals) {
  const AreaReport a = area_from_matrices({}, {}, {});
  EXPECT_EQ(a.mrr_mm2, 0.0);
  EXPECT_EQ(a.offset_mrr_mm2, 0.0);
  EXPECT_NEAR(a.total_mm2(), 8 * 1.2288 + 8 * 0.0004 + 8 * 0.00004 + 0.268 + 0.009, 1e-12);
}

TEST(AgingProxy, ReuseAndIdempotence) {
  const NetworkDesc none = dense_stack(8, 16, false), shared = dense_stack(8, 16, true);
  const WeightStore w = testing::random_weights(none, 2);
  auto pooled = [&](const NetworkDesc& net, const std::vector<ReuseGroup>& groups) {
    Session s({}, SessionOptions{4});
    return s.execute(groups, build_plans(net, w, {}), CalibrationCurve::identity(), {});
  };
  // One physical 16x16 matrix worth of tiles serves every layer.
  const auto a = aging_proxy(pooled(none, build_schedule(none)));
  const auto b = aging_proxy(pooled(shared, build_schedule(shared)));
  EXPECT_EQ(a.max_writes, 8u);
  EXPECT_EQ(b.max_writes, 1u);
  EXPECT_TRUE(aging_proxy(WriteTrace{}).histogram.empty());

  Session s;
  const auto plans = build_plans(shared, w, {});
  const WriteTrace t1 = s.execute(build_schedule(shared), plans, CalibrationCurve::identity(), {});
  const WriteTrace t2 = s.execute(build_schedule(shared), plans, CalibrationCurve::identity(), {});
  EXPECT_EQ(aging_proxy({&t1, &t2}).max_writes, aging_proxy(t1).max_writes);
}

TEST(FitTable3, PredictsHeldOutRow) {
  const std::vector<Table3Point> none = {{64, 217190, 35.70}, {256, 54297, 9.68}};
  const std::vector<Table3Point> reuse = {{64, 77490, 12.50}, {256, 20197, 3.35}};
  const Table3Model m = fit_table3(none, reuse);
  EXPECT_NEAR(m.predict_delay_ns(1024, true), 5874, 0.01 * 5874);
  EXPECT_NEAR(m.predict_delay_ns(1024, false), 13574, 0.01 * 13574);
  EXPECT_NEAR(m.predict_energy_uj(1024, true), 1.06, 0.01 * 1.06);
  EXPECT_NEAR(m.predict_energy_uj(1024, false), 3.17, 0.01 * 3.17);
  for (const auto& r : m.residuals) {
    EXPECT_NEAR(r.delay_no_reuse, 0.0, 1e-6);
    EXPECT_NEAR(r.energy_reuse, 0.0, 1e-9);
  }
}

TEST(FitTable3, NeedsTwoDistinctSizes) {
  try {
    fit_table3({{64, 1, 1}}, {{64, 1, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::fit);
  }
  EXPECT_THROW(fit_table3({{64, 2, 2}, {64, 2, 2}}, {{64, 1, 1}, {64, 1, 1}}), Error);
}

TEST(Params, OverridesAreTypeChecked) {
  ComponentParams p;
  p = apply_overrides(p, nlohmann::json{{"write_settle_ns", 50.0}});
  EXPECT_EQ(p.write_settle_ns, 50.0);
  try {
    apply_overrides(p, nlohmann::json{{"bogus", 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema);
    EXPECT_NE(std::string(e.what()).find("$.params.bogus"), std::string::npos);
  }
  EXPECT_THROW(apply_overrides(p, nlohmann::json{{"adc_mw", "x"}}), Error);
}

}  // namespace
}  // namespace rnb
