/* Copyright 2026 The tyrt Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "tyrt/power.hpp"

namespace tyrt {
namespace {

TEST(Energy, StageExamples) {
  EXPECT_NEAR(stage_energy(52.27, 1.8, 16.86), 1.586, 5e-4);
  EXPECT_NEAR(stage_energy(18.78, 1.8, 34.69), 1.173, 5e-4);
  EXPECT_DOUBLE_EQ(stage_energy(40.0, 0.0, 10.0), 0.0);
}

TEST(Energy, ReportsAreConsistent) {
  const StageReport r = StageReport::measured(Stage::kCapture, 18.78, 1.8, 34.69);
  EXPECT_NEAR(r.power_mw, 33.804, 1e-9);
  EXPECT_NO_THROW(r.check_consistency());
  StageReport bad = r;
  bad.energy_mj *= 1.05;
  EXPECT_THROW(bad.check_consistency(0.01), Error);
}

TEST(Loop, SingleStageEqualsStage) {
  const StageReport r = StageReport::measured(Stage::kInference, 50, 1.8, 20);
  const LoopSummary s = loop_summary({r});
  EXPECT_DOUBLE_EQ(s.total_time_ms, 20);
  EXPECT_DOUBLE_EQ(s.avg_power_mw, r.power_mw);
  EXPECT_DOUBLE_EQ(s.loop_energy_mj, r.energy_mj);
  EXPECT_DOUBLE_EQ(s.fps, 50);
  EXPECT_THROW(loop_summary({}), Error);
}

TEST(Loop, BuiltinProfileTotals) {
  const Profile p = load_profile("paper-gap9");
  const LoopSummary s = loop_summary(p.loop_stages());
  EXPECT_NEAR(s.total_time_ms, 56.45, 1e-9);
  EXPECT_NEAR(s.fps, 1000.0 / 56.45, 1e-9);
  EXPECT_NEAR(s.loop_energy_mj, 2.969, 1e-3);
  // Sum of stages versus the declared 3.05 mJ: within 3%.
  EXPECT_LE(std::abs(s.loop_energy_mj - p.declared_loop_energy_mj) / p.declared_loop_energy_mj, 0.03);
  EXPECT_NEAR(s.avg_power_mw, 54.0, 0.05 * 54.0);
}

TEST(Battery, RuntimeExamplesAndHomogeneity) {
  EXPECT_NEAR(battery_runtime_hours(154, 3.8, 62.9), 9.30, 0.005);
  EXPECT_NEAR(battery_runtime_hours(154, 3.8, 54.0), 10.84, 0.005);
  EXPECT_DOUBLE_EQ(battery_runtime_hours(308, 3.8, 62.9), 2 * battery_runtime_hours(154, 3.8, 62.9));
  for (double k : {0.5, 2.0, 3.0, 10.0}) {
    EXPECT_NEAR(battery_runtime_hours(154, 3.8, 62.9 * k), battery_runtime_hours(154, 3.8, 62.9) / k,
                1e-12);
  }
  EXPECT_NEAR(battery_energy_mwh(154, 3.8), 585.2, 1e-9);
}

TEST(Dvfs, CalibratedToReferencePower) {
  const Profile p = load_profile("paper-gap9");
  EXPECT_NEAR(dvfs_power_mw(p.machine, p.machine.voltage_v, p.machine.frequency_hz), 94.10, 1e-6);
  EXPECT_NEAR(p.max_frequency_hz(p.machine.voltage_v), p.machine.frequency_hz, 1e-6);
  MachineModel m = p.machine;
  EXPECT_THROW(calibrate_dynamic_power(m, 0.001), Error);
}

TEST(Dvfs, LatencyStrictlyDecreasesWithFrequency) {
  const Profile p = load_profile("paper-gap9");
  const SweepResult r = dvfs_sweep(6000000, p.default_sweep_grid(), p.machine);
  for (size_t i = 1; i < r.points.size(); ++i) {
    const OperatingPoint& a = r.points[i - 1];
    const OperatingPoint& b = r.points[i];
    if (a.voltage_v == b.voltage_v && b.frequency_hz > a.frequency_hz) {
      EXPECT_LT(b.latency_ms, a.latency_ms);
    }
  }
  for (const OperatingPoint& x : r.points) {
    EXPECT_NEAR(x.energy_mj, x.power_mw * x.latency_ms / 1000, 1e-9);
    EXPECT_GT(x.latency_ms, 0);
    EXPECT_GT(x.power_mw, 0);
  }
  EXPECT_THROW(dvfs_sweep(1000, {}, p.machine), Error);
}

TEST(Pareto, Examples) {
  const std::vector<OperatingPoint> two{{0.8, 1e8, 10, 0, 5}, {0.8, 1e8, 20, 0, 6}};
  EXPECT_EQ(pareto_frontier(two).size(), 1u);
  const std::vector<OperatingPoint> one{{0.8, 1e8, 10, 0, 5}};
  EXPECT_EQ(pareto_frontier(one).size(), 1u);
}

bool dominates(const OperatingPoint& a, const OperatingPoint& b) {
  return a.latency_ms <= b.latency_ms && a.energy_mj <= b.energy_mj &&
         (a.latency_ms < b.latency_ms || a.energy_mj < b.energy_mj);
}

TEST(Pareto, MatchesBruteForceDominanceFilter) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_real_distribution<double> lat(1, 100), en(0.1, 10);
    std::uniform_int_distribution<int> coarse(1, 10);
    std::vector<OperatingPoint> pts(100);
    for (OperatingPoint& p : pts) {
      // Coarse values on odd trials to exercise ties.
      p.latency_ms = trial % 2 ? coarse(rng) : lat(rng);
      p.energy_mj = trial % 2 ? coarse(rng) : en(rng);
    }
    std::vector<std::pair<double, double>> want;
    for (size_t i = 0; i < pts.size(); ++i) {
      bool dominated = false;
      for (size_t j = 0; j < pts.size(); ++j) dominated |= j != i && dominates(pts[j], pts[i]);
      if (!dominated) want.emplace_back(pts[i].latency_ms, pts[i].energy_mj);
    }
    std::sort(want.begin(), want.end());
    want.erase(std::unique(want.begin(), want.end()), want.end());
    std::vector<std::pair<double, double>> got;
    for (const OperatingPoint& p : pareto_frontier(pts)) got.emplace_back(p.latency_ms, p.energy_mj);
    ASSERT_EQ(got, want) << "trial " << trial;
    for (size_t i = 1; i < got.size(); ++i) {
      EXPECT_GT(got[i].first, got[i - 1].first);
      EXPECT_LT(got[i].second, got[i - 1].second);
    }
  }
}

TEST(Profile, TextRoundTripAndOverrides) {
  const Profile p = load_profile("paper-gap9");
  const Profile q = parse_profile_text(profile_text(p));
  EXPECT_EQ(profile_text(q), profile_text(p));
  EXPECT_EQ(q.stages.size(), p.stages.size());
  const Profile r = parse_profile_text("name = custom\nstage.capture.current_ma = 10\n"
                                       "stage.capture.voltage_v = 2\nstage.capture.time_ms = 5\n");
  EXPECT_EQ(r.name, "custom");
  EXPECT_NEAR(r.report(Stage::kCapture).energy_mj, 0.1, 1e-12);
  EXPECT_THROW(parse_profile_text("bogus.key = 1\n"), Error);
  EXPECT_THROW(parse_profile_text("stage.capture.current_ma = abc\n"), Error);
  EXPECT_THROW(load_profile("no-such-profile"), Error);
}

TEST(Profile, StageTableShowsBothTotals) {
  const Profile p = load_profile("paper-gap9");
  std::ostringstream os;
  write_stage_table(os, p.loop_stages(), &p);
  EXPECT_NE(os.str().find("loop(sum)"), std::string::npos);
  EXPECT_NE(os.str().find("loop(declared)"), std::string::npos);
}

}  // namespace
}  // namespace tyrt
