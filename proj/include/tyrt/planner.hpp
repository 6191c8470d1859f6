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
/// \file
/// \brief Static L1/L2/L3 memory planner, cycle model and tiled executor.
///
/// Every layer's output is cut into tiles whose working set (input window
/// with halo, weights of the channel block, output) fits in L1. Tiles grow
/// greedily: full-width row bands first, then column strips of a single
/// row, then output-channel blocks of a single pixel. Double-buffered
/// footprints are tried before single-buffered ones.
///
/// Halos are re-fetched for every tile. Weights of a channel block move
/// L2 -> L1 once. When a layer's tensors do not fit in L2, its tile inputs
/// are streamed L3 -> L2 and its outputs L2 -> L3.

#ifndef TYRT_PLANNER_HPP
#define TYRT_PLANNER_HPP

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tyrt/program.hpp"

namespace tyrt {

class InfeasibleBudget : public Error {
 public:
  InfeasibleBudget(const std::string& layer, const std::string& msg)
      : Error(msg), layer_(layer) {}
  const std::string& layer() const { return layer_; }

 private:
  std::string layer_;
};

struct MemBudget {
  int64_t l1_bytes = 128 * 1024;
  int64_t l2_bytes = 1536 * 1024;
  int64_t l3_bytes = 8 * 1024 * 1024;

  /// Throws Error unless 0 < l1 <= l2 <= l3.
  void validate() const;
};

enum class MemLevel : uint8_t { kL1 = 1, kL2 = 2, kL3 = 3 };

const char* level_name(MemLevel l);

struct Transfer {
  int64_t bytes = 0;
  MemLevel src = MemLevel::kL2;
  MemLevel dst = MemLevel::kL1;
};

struct Buffer {
  std::string name;  // "in", "in1", "weights", "bias", "lut", "out"
  int64_t bytes = 0;
  MemLevel level = MemLevel::kL1;
  int copies = 1;    // 2 when double-buffered
};

struct Tile {
  Region out;
  int64_t macs = 0;
  std::vector<Buffer> resident;
  std::vector<Transfer> transfers;

  int64_t l1_bytes() const;
};

struct LayerSchedule {
  size_t node = 0;   // index into the program
  std::string name;
  OpKind op = OpKind::kConv;
  Shape out_shape;
  int tile_h = 0, tile_w = 0, tile_c = 0;
  bool double_buffered = false;
  bool streams_l3 = false;
  std::vector<Tile> tiles;

  int64_t macs() const;
};

struct TileSchedule {
  MemBudget budget;
  std::vector<LayerSchedule> layers;  // one per program node, in order
};

/// Plans every node of `p`. Throws InfeasibleBudget naming the first layer
/// whose single-pixel working set exceeds L1.
TileSchedule plan_tiles(const Program& p, const MemBudget& b);
TileSchedule plan_tiles(const QuantExecutable& exe, const MemBudget& b);

/// Working-set bytes of a th x tw x tc output tile of node `n`.
struct Footprint {
  int64_t input = 0;   // all input windows, halo and padding included
  int64_t params = 0;  // weights + bias, or the activation table
  int64_t output = 0;

  int64_t total(bool double_buffered) const {
    return double_buffered ? 2 * (input + output) + params
                           : input + output + params;
  }
};
Footprint tile_footprint(const Program& p, const Node& n, int th, int tw,
                         int tc);

/// Independent re-check: coverage of every output element exactly once,
/// per-tile L1 residency, and that each tile fetches at least the input it
/// reads. Throws Error describing the first violation.
void validate_schedule(const Program& p, const TileSchedule& s);

/// Cost knobs of the target; bandwidths are bytes per cycle (infinity
/// means free).
struct MachineModel {
  double frequency_hz = 370e6;
  double voltage_v = 0.8;
  double macs_per_cycle_peak = 64.0;
  double bpc_l3_l2 = 1.0;
  double bpc_l2_l1 = 8.0;
  double bpc_l1_l2 = 8.0;
  double bpc_l2_l3 = 1.0;
  /// Stage name -> power (mW) at the nominal operating point.
  std::map<std::string, double> stage_power_mw;
  /// DVFS: P = c_dyn * V^2 * f + V * I_leak(V), with
  /// I_leak(V) = leak_ma_ref * exp(leak_slope_per_v * (V - voltage_v)).
  double c_dyn_f = 0.0;  // farads
  double leak_ma_ref = 0.0;
  double leak_slope_per_v = 0.0;

  double bytes_per_cycle(MemLevel src, MemLevel dst) const;
  /// Throws Error on a non-positive rate.
  void validate() const;
};

struct LayerCycles {
  std::string name;
  int64_t macs = 0;
  int64_t compute = 0;
  int64_t transfer = 0;
  int64_t total = 0;
};

struct CycleEstimate {
  int64_t total_cycles = 0;
  int64_t compute_cycles = 0;
  int64_t stall_cycles = 0;  // total - compute
  int64_t macs = 0;
  double achieved_macs_per_cycle = 0.0;
  std::vector<LayerCycles> layers;
};

CycleEstimate estimate_cycles(const TileSchedule& s, const MachineModel& m);

struct TransferTotals {
  int64_t l3_to_l2 = 0;
  int64_t l2_to_l1 = 0;
  int64_t l1_to_l2 = 0;
  int64_t l2_to_l3 = 0;

  int64_t total() const { return l3_to_l2 + l2_to_l1 + l1_to_l2 + l2_to_l3; }
  bool operator==(const TransferTotals&) const = default;
};

TransferTotals simulate_transfers(const TileSchedule& s);
TransferTotals layer_transfers(const LayerSchedule& l);

/// Runs `exe` tile by tile following `s`. Bit-identical to forward().
std::vector<QuantTensor> forward_tiled(const QuantExecutable& exe,
                                       const TileSchedule& s,
                                       const QuantTensor& input);

/// Per-layer tile table, transfer totals and predicted cycles.
void write_schedule_report(std::ostream& os, const TileSchedule& s,
                           const MachineModel& m);

}  // namespace tyrt

#endif  // TYRT_PLANNER_HPP
