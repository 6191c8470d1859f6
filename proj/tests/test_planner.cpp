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

#include <limits>
#include <random>

#include "test_support.hpp"
#include "tyrt/planner.hpp"
#include "tyrt/quantizer.hpp"

namespace tyrt {
namespace {

/// A program holding one 3x3 conv, 16 -> 16 channels, on a 32x32 map.
Program single_conv() {
  Program p;
  p.tensors = {{"x", {1, 16, 32, 32}}, {"y", {1, 16, 32, 32}}};
  p.input = 0;
  Node n;
  n.op = OpKind::kConv;
  n.name = "conv";
  n.inputs = {0};
  n.output = 1;
  n.conv = {16, 16, 3, 3, 1, 1, 1, 1};
  p.nodes = {n};
  p.outputs = {1};
  return p;
}

MemBudget budget(int64_t l1, int64_t l2 = 1536 * 1024, int64_t l3 = 8 * 1024 * 1024) {
  MemBudget b;
  b.l1_bytes = l1;
  b.l2_bytes = l2;
  b.l3_bytes = l3;
  return b;
}

QuantExecutable small_exe(Version v, SizeClass s, int res) {
  const GraphSpec g = build_graph(v, s, 20, res);
  std::mt19937_64 rng(7);
  const std::vector<FloatTensor> imgs{testing::random_ftensor(rng, {1, 3, res, res}, 0, 1)};
  return compile(g, quantize_model(g, random_weights(g, 7), imgs));
}

TEST(Budget, Validation) {
  EXPECT_THROW(budget(0).validate(), Error);
  EXPECT_THROW(budget(4096, 1024).validate(), Error);
  EXPECT_THROW(budget(1024, 4096, 2048).validate(), Error);
  EXPECT_NO_THROW(budget(1024, 1024, 1024).validate());
}

TEST(Planner, FullWorkingSetFitsGivesOneTile) {
  const Program p = single_conv();
  const Footprint f = tile_footprint(p, p.nodes[0], 32, 32, 16);
  EXPECT_EQ(f.input, 34 * 34 * 16);
  EXPECT_EQ(f.params, 16 * 16 * 9 + 4 * 16);
  EXPECT_EQ(f.output, 32 * 32 * 16);
  const TileSchedule s = plan_tiles(p, budget(f.total(false)));
  ASSERT_EQ(s.layers[0].tiles.size(), 1u);
  const TransferTotals t = simulate_transfers(s);
  // Input (no padding bytes), weights and output each moved once.
  EXPECT_EQ(t.l2_to_l1, 32 * 32 * 16 + f.params);
  EXPECT_EQ(t.l1_to_l2, 32 * 32 * 16);
  EXPECT_EQ(t.l3_to_l2, 0);
}

TEST(Planner, HandDerivedHalfBudgetTiling) {
  const Program p = single_conv();
  const int64_t full = tile_footprint(p, p.nodes[0], 32, 32, 16).total(false);
  ASSERT_EQ(full, 37248);
  const TileSchedule s = plan_tiles(p, budget(full / 2));  // 18624
  const LayerSchedule& l = s.layers[0];
  // Double-buffered rows of full width: 2*(544*(th+2) + 512*th) + 2368 <= 18624
  // gives th = 6, so ceil(32/6) = 6 row bands.
  EXPECT_TRUE(l.double_buffered);
  EXPECT_EQ(l.tile_h, 6);
  EXPECT_EQ(l.tile_w, 32);
  EXPECT_EQ(l.tile_c, 16);
  ASSERT_EQ(l.tiles.size(), 6u);
  // In-bounds input rows per band: 7, 8, 8, 8, 8, 3 = 42 rows of 32x16 bytes.
  // The 10 extra rows are the 2-row halos of the 5 band boundaries.
  const TransferTotals t = simulate_transfers(s);
  EXPECT_EQ(t.l2_to_l1, 42 * 512 + 2368);
  EXPECT_EQ(t.l2_to_l1 - 2368 - 32 * 512, 5 * 2 * 512);
  EXPECT_EQ(t.l1_to_l2, 32 * 32 * 16);
  EXPECT_NO_THROW(validate_schedule(p, s));
}

TEST(Planner, AdjacentBandsShareTwoRowHalo) {
  const Program p = single_conv();
  const TileSchedule s = plan_tiles(p, budget(18624));
  auto input_bytes = [](const Tile& t) {
    int64_t sum = 0;
    for (const Transfer& x : t.transfers) {
      if (x.src == MemLevel::kL2 && x.dst == MemLevel::kL1) sum += x.bytes;
    }
    return sum;
  };
  const std::vector<Tile>& tiles = s.layers[0].tiles;
  // Band 0 reads rows 0..6, band 1 rows 5..12: rows 5 and 6 travel twice.
  EXPECT_EQ(input_bytes(tiles[0]) - 2368, 7 * 512);
  EXPECT_EQ(input_bytes(tiles[1]), 8 * 512);
  EXPECT_EQ(input_bytes(tiles[0]) - 2368 + input_bytes(tiles[1]) - 13 * 512, 2 * 512);
}

TEST(Planner, MinimalTileTooLargeNamesLayer) {
  const Program p = single_conv();
  try {
    plan_tiles(p, budget(256));  // one pixel needs 144 + 148 + 1 bytes
    FAIL() << "expected InfeasibleBudget";
  } catch (const InfeasibleBudget& e) {
    EXPECT_EQ(e.layer(), "conv");
  }
  EXPECT_THROW(plan_tiles(p, budget(4096, 8192, 8192)), InfeasibleBudget);
}

TEST(Planner, StreamsThroughL3WhenLayerExceedsL2) {
  const Program p = single_conv();
  const TileSchedule s = plan_tiles(p, budget(16384, 20000));
  EXPECT_TRUE(s.layers[0].streams_l3);
  const TransferTotals t = simulate_transfers(s);
  EXPECT_EQ(t.l2_to_l3, 32 * 32 * 16);
  EXPECT_GT(t.l3_to_l2, 32 * 32 * 16);
}

/// Linear-scan reference for the greedy tile rule.
void expect_reference_tile(const Program& p, const LayerSchedule& l, int64_t l1) {
  const Node& n = p.nodes[l.node];
  const int H = l.out_shape.h, W = l.out_shape.w, C = l.out_shape.c;
  auto fits = [&](int th, int tw, int tc, bool db) {
    return tile_footprint(p, n, th, tw, tc).total(db) <= l1;
  };
  int th = 0, tw = 0, tc = 0;
  bool db = true;
  if (fits(H, W, C, false)) {
    th = H, tw = W, tc = C;
  } else {
    db = fits(1, 1, 1, true);
    for (int v = H; v >= 1 && !th; --v) {
      if (fits(v, W, C, db)) th = v, tw = W, tc = C;
    }
    for (int v = W; v >= 1 && !th; --v) {
      if (fits(1, v, C, db)) th = 1, tw = v, tc = C;
    }
    for (int v = C; v >= 1 && !th; --v) {
      if (fits(1, 1, v, db)) th = 1, tw = 1, tc = v;
    }
  }
  EXPECT_EQ(l.tile_h, th) << l.name;
  EXPECT_EQ(l.tile_w, tw) << l.name;
  EXPECT_EQ(l.tile_c, tc) << l.name;
  EXPECT_EQ(l.double_buffered, db) << l.name;
}

TEST(Planner, GreedyMatchesLinearScanReference) {
  const QuantExecutable exe = small_exe(Version::kV8, SizeClass::kSmall, 32);
  for (int64_t l1 : {2048, 4096, 9000, 20000, 65536}) {
    TileSchedule s;
    try {
      s = plan_tiles(exe, budget(l1));
    } catch (const InfeasibleBudget&) {
      continue;
    }
    for (const LayerSchedule& l : s.layers) expect_reference_tile(exe.program, l, l1);
  }
}

TEST(Planner, ExhaustiveSmallConvOracle) {
  // Every budget from the minimal tile up to the full working set.
  Program p = single_conv();
  p.tensors = {{"x", {1, 3, 6, 5}}, {"y", {1, 4, 6, 5}}};
  p.nodes[0].conv = {3, 4, 3, 3, 1, 1, 1, 1};
  const Node& n = p.nodes[0];
  const int64_t lo = tile_footprint(p, n, 1, 1, 1).total(false);
  const int64_t hi = tile_footprint(p, n, 6, 5, 4).total(false);
  for (int64_t l1 = lo; l1 <= hi + 1; ++l1) {
    const TileSchedule s = plan_tiles(p, budget(l1));
    expect_reference_tile(p, s.layers[0], l1);
    validate_schedule(p, s);
  }
}

TEST(Planner, CoverageAndResidencyHoldForEveryNetworkAndBudget) {
  for (auto [v, sz] : {std::pair{Version::kV1_3, SizeClass::kSmall},
                       std::pair{Version::kV5, SizeClass::kBig},
                       std::pair{Version::kV10, SizeClass::kBig}}) {
    const QuantExecutable exe = small_exe(v, sz, 64);
    for (int64_t l1 : {8192, 32768, 131072}) {
      const TileSchedule s = plan_tiles(exe, budget(l1));
      EXPECT_NO_THROW(validate_schedule(exe.program, s));
      // Independent coverage check by marking.
      for (const LayerSchedule& l : s.layers) {
        std::vector<int> mark(static_cast<size_t>(l.out_shape.numel()), 0);
        for (const Tile& t : l.tiles) {
          EXPECT_LE(t.l1_bytes(), l1);
          for (int c = t.out.c0; c < t.out.c1; ++c)
            for (int y = t.out.y0; y < t.out.y1; ++y)
              for (int x = t.out.x0; x < t.out.x1; ++x)
                ++mark[(static_cast<size_t>(c) * l.out_shape.h + y) * l.out_shape.w + x];
        }
        for (int m : mark) ASSERT_EQ(m, 1) << l.name;
      }
    }
  }
}

TEST(Planner, HalvingL1NeverDecreasesTransfers) {
  for (auto [v, sz] : {std::pair{Version::kV1_3, SizeClass::kSmall},
                       std::pair{Version::kV8, SizeClass::kBig}}) {
    const QuantExecutable exe = small_exe(v, sz, 64);
    int64_t prev = -1;
    for (int64_t l1 = 256 * 1024; l1 >= 8192; l1 /= 2) {
      const int64_t total = simulate_transfers(plan_tiles(exe, budget(l1))).total();
      if (prev >= 0) EXPECT_GE(total, prev) << "l1 " << l1;
      prev = total;
    }
  }
}

TEST(Planner, EfficiencyNonIncreasingAsL1Shrinks) {
  MachineModel m;
  m.macs_per_cycle_peak = 52;
  m.bpc_l2_l1 = m.bpc_l1_l2 = 8;
  m.bpc_l3_l2 = m.bpc_l2_l3 = 8;
  for (auto [v, sz] : {std::pair{Version::kV1_3, SizeClass::kSmall},
                       std::pair{Version::kV5, SizeClass::kSmall}}) {
    const QuantExecutable exe = small_exe(v, sz, 64);
    double prev = std::numeric_limits<double>::infinity();
    for (int64_t l1 = 256 * 1024; l1 >= 8192; l1 /= 2) {
      const double eff = estimate_cycles(plan_tiles(exe, budget(l1)), m).achieved_macs_per_cycle;
      EXPECT_LE(eff, prev + 1e-9) << "l1 " << l1;
      prev = eff;
    }
  }
}

TEST(Planner, ValidatorRejectsBrokenSchedules) {
  const Program p = single_conv();
  TileSchedule s = plan_tiles(p, budget(18624));
  TileSchedule gap = s;
  gap.layers[0].tiles.pop_back();
  EXPECT_THROW(validate_schedule(p, gap), Error);
  TileSchedule overlap = s;
  overlap.layers[0].tiles.push_back(overlap.layers[0].tiles.front());
  EXPECT_THROW(validate_schedule(p, overlap), Error);
  TileSchedule starved = s;
  for (Transfer& t : starved.layers[0].tiles[1].transfers) {
    if (t.src == MemLevel::kL2 && t.dst == MemLevel::kL1) t.bytes /= 2;
  }
  EXPECT_THROW(validate_schedule(p, starved), Error);
}

// Cycle model ------------------------------------------------------------------

TileSchedule manual_schedule(int tiles, int64_t macs, int64_t bytes, bool db) {
  TileSchedule s;
  LayerSchedule l;
  l.double_buffered = db;
  for (int i = 0; i < tiles; ++i) {
    Tile t;
    t.macs = macs;
    t.transfers.push_back({bytes, MemLevel::kL2, MemLevel::kL1});
    l.tiles.push_back(t);
  }
  s.layers.push_back(l);
  return s;
}

TEST(Cycles, SingleTileFreeTransfersReachesPeak) {
  MachineModel m;
  m.macs_per_cycle_peak = 16;
  m.bpc_l2_l1 = std::numeric_limits<double>::infinity();
  const CycleEstimate e = estimate_cycles(manual_schedule(1, 16 * 1000, 4096, true), m);
  EXPECT_DOUBLE_EQ(e.achieved_macs_per_cycle, 16.0);
  EXPECT_EQ(e.stall_cycles, 0);
}

TEST(Cycles, TransferBoundTwoToOneGivesHalfPeak) {
  MachineModel m;
  m.macs_per_cycle_peak = 32;
  m.bpc_l2_l1 = 4;
  // compute = 100 cycles, transfer = 200 cycles per tile.
  const CycleEstimate e = estimate_cycles(manual_schedule(7, 3200, 800, true), m);
  EXPECT_DOUBLE_EQ(e.achieved_macs_per_cycle, 16.0);
  EXPECT_EQ(e.total_cycles, 7 * 200);
  const CycleEstimate sb = estimate_cycles(manual_schedule(7, 3200, 800, false), m);
  EXPECT_EQ(sb.total_cycles, 7 * 300);
}

TEST(Cycles, AchievedNeverExceedsPeak) {
  const QuantExecutable exe = small_exe(Version::kV8, SizeClass::kSmall, 64);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(1, 64);
  for (int i = 0; i < 20; ++i) {
    MachineModel m;
    m.macs_per_cycle_peak = d(rng);
    m.bpc_l2_l1 = d(rng);
    m.bpc_l1_l2 = d(rng);
    const CycleEstimate e = estimate_cycles(plan_tiles(exe, budget(32768)), m);
    EXPECT_LE(e.achieved_macs_per_cycle, m.macs_per_cycle_peak + 1e-9);
    EXPECT_EQ(e.total_cycles, e.compute_cycles + e.stall_cycles);
  }
}

TEST(Cycles, TransferTotalsEqualSumOfTransferLists) {
  const QuantExecutable exe = small_exe(Version::kV5, SizeClass::kSmall, 64);
  const TileSchedule s = plan_tiles(exe, budget(16384, 65536));
  TransferTotals sum;
  for (const LayerSchedule& l : s.layers) {
    for (const Tile& t : l.tiles) {
      for (const Transfer& x : t.transfers) {
        if (x.src == MemLevel::kL3) sum.l3_to_l2 += x.bytes;
        else if (x.dst == MemLevel::kL3) sum.l2_to_l3 += x.bytes;
        else if (x.dst == MemLevel::kL1) sum.l2_to_l1 += x.bytes;
        else sum.l1_to_l2 += x.bytes;
      }
    }
  }
  EXPECT_EQ(simulate_transfers(s), sum);
  EXPECT_GT(sum.l3_to_l2, 0);
}

// Tiled execution --------------------------------------------------------------

TEST(Tiled, BitIdenticalToUntiledAcrossNetworksAndBudgets) {
  for (auto [v, sz] : {std::pair{Version::kV1_3, SizeClass::kSmall},
                       std::pair{Version::kV5, SizeClass::kSmall},
                       std::pair{Version::kV8, SizeClass::kSmall},
                       std::pair{Version::kV10, SizeClass::kBig}}) {
    const QuantExecutable exe = small_exe(v, sz, 64);
    std::mt19937_64 rng(11);
    const QuantTensor in = quantize(testing::random_ftensor(rng, {1, 3, 64, 64}, 0, 1),
                                    exe.input_qparams());
    const std::vector<QuantTensor> ref = forward(exe, in);
    for (MemBudget b : {budget(131072), budget(16384, 65536), budget(6144, 32768)}) {
      const TileSchedule s = plan_tiles(exe, b);
      const std::vector<QuantTensor> got = forward_tiled(exe, s, in);
      ASSERT_EQ(got.size(), ref.size());
      for (size_t i = 0; i < ref.size(); ++i) {
        EXPECT_EQ(got[i].data, ref[i].data) << exe.graph.label() << " l1 " << b.l1_bytes;
        EXPECT_EQ(got[i].qparams, ref[i].qparams);
      }
    }
  }
}

TEST(Report, ScheduleReportHasTotals) {
  const QuantExecutable exe = small_exe(Version::kV1_3, SizeClass::kSmall, 64);
  std::ostringstream os;
  write_schedule_report(os, plan_tiles(exe, budget(32768)), MachineModel{});
  EXPECT_NE(os.str().find("mac_per_cycle"), std::string::npos);
  EXPECT_NE(os.str().find("latency_ms"), std::string::npos);
}

}  // namespace
}  // namespace tyrt
