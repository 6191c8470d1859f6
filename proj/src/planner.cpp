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

#include "tyrt/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tyrt {

void MemBudget::validate() const {
  if (l1_bytes <= 0) throw Error("l1 budget must be positive");
  if (l1_bytes > l2_bytes || l2_bytes > l3_bytes) {
    throw Error("memory budgets must satisfy l1 <= l2 <= l3");
  }
}

const char* level_name(MemLevel l) {
  switch (l) {
    case MemLevel::kL1: return "L1";
    case MemLevel::kL2: return "L2";
    case MemLevel::kL3: return "L3";
  }
  return "?";
}

int64_t Tile::l1_bytes() const {
  int64_t total = 0;
  for (const Buffer& b : resident) {
    if (b.level == MemLevel::kL1) total += b.bytes * b.copies;
  }
  return total;
}

int64_t LayerSchedule::macs() const {
  int64_t total = 0;
  for (const Tile& t : tiles) total += t.macs;
  return total;
}

namespace {

/// Input box a tile reads from one tensor; rows/cols may extend into the
/// padding for windowed ops.
struct Window {
  int tensor = -1;
  int y0 = 0, y1 = 0, x0 = 0, x1 = 0, c0 = 0, c1 = 0;

  int64_t padded_bytes() const {
    return static_cast<int64_t>(y1 - y0) * (x1 - x0) * (c1 - c0);
  }
  int64_t inbounds_bytes(const Shape& s) const {
    const int h = std::max(0, std::min(y1, s.h) - std::max(y0, 0));
    const int w = std::max(0, std::min(x1, s.w) - std::max(x0, 0));
    const int c = std::max(0, std::min(c1, s.c) - std::max(c0, 0));
    return static_cast<int64_t>(h) * w * c;
  }
};

void kernel_of(const Node& n, int& kh, int& kw, int& sh, int& sw, int& ph,
               int& pw) {
  if (n.op == OpKind::kConv) {
    kh = n.conv.kh, kw = n.conv.kw, sh = n.conv.sh, sw = n.conv.sw;
    ph = n.conv.ph, pw = n.conv.pw;
  } else {
    kh = kw = n.kernel;
    sh = sw = n.stride;
    ph = pw = n.pad;
  }
}

std::vector<Window> input_windows(const Program& p, const Node& n,
                                  const Region& r) {
  std::vector<Window> out;
  const int in0 = n.inputs.front();
  switch (n.op) {
    case OpKind::kConv:
    case OpKind::kMaxPool: {
      int kh, kw, sh, sw, ph, pw;
      kernel_of(n, kh, kw, sh, sw, ph, pw);
      Window w{in0, r.y0 * sh - ph, (r.y1 - 1) * sh - ph + kh,
               r.x0 * sw - pw, (r.x1 - 1) * sw - pw + kw, r.c0, r.c1};
      if (n.op == OpKind::kConv) {
        w.c0 = 0;
        w.c1 = p.tensors[in0].shape.c;
      }
      out.push_back(w);
      break;
    }
    case OpKind::kUpsample:
      out.push_back({in0, r.y0 / n.factor, (r.y1 - 1) / n.factor + 1,
                     r.x0 / n.factor, (r.x1 - 1) / n.factor + 1, r.c0, r.c1});
      break;
    case OpKind::kConcat: {
      int base = 0;
      for (int t : n.inputs) {
        const int c = p.tensors[t].shape.c;
        const int lo = std::max(r.c0, base), hi = std::min(r.c1, base + c);
        if (lo < hi) out.push_back({t, r.y0, r.y1, r.x0, r.x1, lo - base, hi - base});
        base += c;
      }
      break;
    }
    case OpKind::kSlice:
      out.push_back({in0, r.y0, r.y1, r.x0, r.x1, r.c0 + n.c0, r.c1 + n.c0});
      break;
    case OpKind::kAdd:
      out.push_back({in0, r.y0, r.y1, r.x0, r.x1, r.c0, r.c1});
      out.push_back({n.inputs[1], r.y0, r.y1, r.x0, r.x1, r.c0, r.c1});
      break;
    case OpKind::kAct:
    case OpKind::kRequantize:
      out.push_back({in0, r.y0, r.y1, r.x0, r.x1, r.c0, r.c1});
      break;
  }
  return out;
}

int64_t weight_bytes(const Node& n, int tc) {
  if (n.op != OpKind::kConv) return 0;
  return static_cast<int64_t>(tc) * n.conv.in_channels * n.conv.kh * n.conv.kw;
}

int64_t tensor_bytes(const Shape& s) { return s.numel(); }

}  // namespace

Footprint tile_footprint(const Program& p, const Node& n, int th, int tw,
                         int tc) {
  Footprint f;
  const Shape& in = p.tensors[n.inputs.front()].shape;
  f.output = static_cast<int64_t>(th) * tw * tc;
  switch (n.op) {
    case OpKind::kConv:
    case OpKind::kMaxPool: {
      int kh, kw, sh, sw, ph, pw;
      kernel_of(n, kh, kw, sh, sw, ph, pw);
      const int64_t rows = static_cast<int64_t>(th - 1) * sh + kh;
      const int64_t cols = static_cast<int64_t>(tw - 1) * sw + kw;
      const int64_t ch = n.op == OpKind::kConv ? in.c : tc;
      f.input = rows * cols * ch;
      if (n.op == OpKind::kConv) f.params = weight_bytes(n, tc) + 4LL * tc;
      break;
    }
    case OpKind::kUpsample: {
      const int64_t rows = std::min<int64_t>(in.h, (th + n.factor - 1) / n.factor + 1);
      const int64_t cols = std::min<int64_t>(in.w, (tw + n.factor - 1) / n.factor + 1);
      f.input = rows * cols * tc;
      break;
    }
    case OpKind::kAdd:
      f.input = 2 * f.output;
      break;
    case OpKind::kAct:
      f.input = f.output;
      f.params = 256;
      break;
    case OpKind::kConcat:
    case OpKind::kSlice:
    case OpKind::kRequantize:
      f.input = f.output;
      break;
  }
  return f;
}

namespace {

LayerSchedule plan_node(const Program& p, size_t index, const MemBudget& b) {
  const Node& n = p.nodes[index];
  const Shape& os = p.tensors[n.output].shape;
  LayerSchedule ls;
  ls.node = index;
  ls.name = n.name;
  ls.op = n.op;
  ls.out_shape = os;

  int64_t layer_bytes = tensor_bytes(os) + weight_bytes(n, os.c) + 4LL * os.c;
  for (int t : n.inputs) layer_bytes += tensor_bytes(p.tensors[t].shape);
  if (layer_bytes > b.l3_bytes) {
    throw InfeasibleBudget(n.name, "layer " + n.name + " needs " +
                                       std::to_string(layer_bytes) +
                                       " bytes, more than L3");
  }
  ls.streams_l3 = layer_bytes > b.l2_bytes;

  auto fits = [&](int th, int tw, int tc, bool db) {
    return tile_footprint(p, n, th, tw, tc).total(db) <= b.l1_bytes;
  };
  // Largest v in [1, hi] with pred(v); pred is monotone decreasing in v.
  auto largest = [](int hi, auto pred) {
    int lo = 1;
    while (lo < hi) {
      const int mid = lo + (hi - lo + 1) / 2;
      if (pred(mid)) lo = mid; else hi = mid - 1;
    }
    return lo;
  };

  const int H = os.h, W = os.w, C = os.c;
  if (fits(H, W, C, false)) {
    // A single tile still overlaps its transfers with neighbouring layers.
    ls.tile_h = H, ls.tile_w = W, ls.tile_c = C;
    ls.double_buffered = true;
  } else {
    bool db;
    if (fits(1, 1, 1, true)) {
      db = true;
    } else if (fits(1, 1, 1, false)) {
      db = false;
    } else {
      throw InfeasibleBudget(
          n.name, "layer " + n.name + " needs " +
                      std::to_string(tile_footprint(p, n, 1, 1, 1).total(false)) +
                      " bytes of L1 for a single output pixel, budget is " +
                      std::to_string(b.l1_bytes));
    }
    ls.double_buffered = db;
    if (fits(1, W, C, db)) {
      ls.tile_h = largest(H, [&](int v) { return fits(v, W, C, db); });
      ls.tile_w = W, ls.tile_c = C;
    } else if (fits(1, 1, C, db)) {
      ls.tile_h = 1;
      ls.tile_w = largest(W, [&](int v) { return fits(1, v, C, db); });
      ls.tile_c = C;
    } else {
      ls.tile_h = 1, ls.tile_w = 1;
      ls.tile_c = largest(C, [&](int v) { return fits(1, 1, v, db); });
    }
  }
  const bool single = ls.tile_h == H && ls.tile_w == W && ls.tile_c == C;
  const int copies = ls.double_buffered && !single ? 2 : 1;

  bool first_of_layer = true;
  for (int c0 = 0; c0 < C; c0 += ls.tile_c) {
    const int c1 = std::min(C, c0 + ls.tile_c);
    bool first_of_block = true;
    for (int y0 = 0; y0 < H; y0 += ls.tile_h) {
      const int y1 = std::min(H, y0 + ls.tile_h);
      for (int x0 = 0; x0 < W; x0 += ls.tile_w) {
        const int x1 = std::min(W, x0 + ls.tile_w);
        Tile t;
        t.out = {y0, y1, x0, x1, c0, c1};
        t.macs = n.op == OpKind::kConv
                     ? t.out.volume() * n.conv.in_channels * n.conv.kh * n.conv.kw
                     : 0;
        const Footprint f = tile_footprint(p, n, y1 - y0, x1 - x0, c1 - c0);
        t.resident.push_back({"in", f.input, MemLevel::kL1, copies});
        if (n.op == OpKind::kConv) {
          t.resident.push_back({"weights", weight_bytes(n, c1 - c0), MemLevel::kL1, 1});
          t.resident.push_back({"bias", 4LL * (c1 - c0), MemLevel::kL1, 1});
        } else if (n.op == OpKind::kAct) {
          t.resident.push_back({"lut", 256, MemLevel::kL1, 1});
        }
        t.resident.push_back({"out", f.output, MemLevel::kL1, copies});

        if (n.op == OpKind::kConv && first_of_block) {
          t.transfers.push_back({weight_bytes(n, c1 - c0) + 4LL * (c1 - c0),
                                 MemLevel::kL2, MemLevel::kL1});
        }
        if (n.op == OpKind::kAct && first_of_layer) {
          t.transfers.push_back({256, MemLevel::kL2, MemLevel::kL1});
        }
        for (const Window& w : input_windows(p, n, t.out)) {
          const int64_t bytes = w.inbounds_bytes(p.tensors[w.tensor].shape);
          if (ls.streams_l3) t.transfers.push_back({bytes, MemLevel::kL3, MemLevel::kL2});
          t.transfers.push_back({bytes, MemLevel::kL2, MemLevel::kL1});
        }
        t.transfers.push_back({t.out.volume(), MemLevel::kL1, MemLevel::kL2});
        if (ls.streams_l3) {
          t.transfers.push_back({t.out.volume(), MemLevel::kL2, MemLevel::kL3});
        }
        if (t.l1_bytes() > b.l1_bytes) {
          throw Error("planner produced an over-budget tile for " + n.name);
        }
        ls.tiles.push_back(std::move(t));
        first_of_block = false;
        first_of_layer = false;
      }
    }
  }
  return ls;
}

}  // namespace

TileSchedule plan_tiles(const Program& p, const MemBudget& b) {
  b.validate();
  TileSchedule s;
  s.budget = b;
  for (size_t i = 0; i < p.nodes.size(); ++i) s.layers.push_back(plan_node(p, i, b));
  return s;
}

TileSchedule plan_tiles(const QuantExecutable& exe, const MemBudget& b) {
  return plan_tiles(exe.program, b);
}

void validate_schedule(const Program& p, const TileSchedule& s) {
  if (s.layers.size() != p.nodes.size()) {
    throw Error("schedule covers " + std::to_string(s.layers.size()) +
                " layers, program has " + std::to_string(p.nodes.size()));
  }
  for (size_t i = 0; i < s.layers.size(); ++i) {
    const LayerSchedule& ls = s.layers[i];
    const Node& n = p.nodes[ls.node];
    if (ls.node != i || ls.name != n.name) {
      throw Error("schedule layer " + std::to_string(i) + " is out of order");
    }
    const Shape& os = p.tensors[n.output].shape;
    std::vector<uint8_t> hits(static_cast<size_t>(os.c) * os.h * os.w, 0);
    for (const Tile& t : ls.tiles) {
      const Region& r = t.out;
      if (r.y0 < 0 || r.x0 < 0 || r.c0 < 0 || r.y1 > os.h || r.x1 > os.w ||
          r.c1 > os.c || r.volume() <= 0) {
        throw Error("tile of " + n.name + " leaves the output tensor");
      }
      for (int c = r.c0; c < r.c1; ++c)
        for (int y = r.y0; y < r.y1; ++y)
          for (int x = r.x0; x < r.x1; ++x) {
            uint8_t& h = hits[(static_cast<size_t>(c) * os.h + y) * os.w + x];
            if (h++) throw Error("tiles of " + n.name + " overlap");
          }
      if (t.l1_bytes() > s.budget.l1_bytes) {
        throw Error("tile of " + n.name + " exceeds the L1 budget");
      }
      // Bytes the tile has to read versus what it brings into L1.
      const Footprint f = tile_footprint(p, n, r.y1 - r.y0, r.x1 - r.x0, r.c1 - r.c0);
      int64_t needed = 0;
      for (const Window& w : input_windows(p, n, r)) {
        needed += w.inbounds_bytes(p.tensors[w.tensor].shape);
      }
      int64_t fetched = 0;
      int64_t in_resident = 0;
      for (const Transfer& x : t.transfers) {
        if (x.src == MemLevel::kL2 && x.dst == MemLevel::kL1) fetched += x.bytes;
      }
      for (const Buffer& b : t.resident) {
        if (b.name == "in") in_resident = b.bytes;
      }
      if (fetched < needed) throw Error("tile of " + n.name + " reads unfetched input");
      if (in_resident < f.input || in_resident < needed) {
        throw Error("input buffer of " + n.name + " is too small for its window");
      }
    }
    for (uint8_t h : hits) {
      if (h != 1) throw Error("tiles of " + n.name + " do not cover the output");
    }
  }
}

double MachineModel::bytes_per_cycle(MemLevel src, MemLevel dst) const {
  if (src == MemLevel::kL3 && dst == MemLevel::kL2) return bpc_l3_l2;
  if (src == MemLevel::kL2 && dst == MemLevel::kL1) return bpc_l2_l1;
  if (src == MemLevel::kL1 && dst == MemLevel::kL2) return bpc_l1_l2;
  if (src == MemLevel::kL2 && dst == MemLevel::kL3) return bpc_l2_l3;
  throw Error(std::string("no transfer path ") + level_name(src) + "->" + level_name(dst));
}

void MachineModel::validate() const {
  auto pos = [](double v, const char* what) {
    if (!(v > 0.0)) throw Error(std::string(what) + " must be positive");
  };
  pos(frequency_hz, "frequency");
  pos(voltage_v, "voltage");
  pos(macs_per_cycle_peak, "peak MAC/cycle");
  pos(bpc_l3_l2, "L3->L2 bandwidth");
  pos(bpc_l2_l1, "L2->L1 bandwidth");
  pos(bpc_l1_l2, "L1->L2 bandwidth");
  pos(bpc_l2_l3, "L2->L3 bandwidth");
  if (c_dyn_f < 0.0 || leak_ma_ref < 0.0) throw Error("power coefficients must be >= 0");
}

CycleEstimate estimate_cycles(const TileSchedule& s, const MachineModel& m) {
  m.validate();
  CycleEstimate e;
  for (const LayerSchedule& ls : s.layers) {
    LayerCycles lc;
    lc.name = ls.name;
    for (const Tile& t : ls.tiles) {
      const auto compute = static_cast<int64_t>(
          std::ceil(static_cast<double>(t.macs) / m.macs_per_cycle_peak));
      int64_t transfer = 0;
      for (const Transfer& x : t.transfers) {
        const double bpc = m.bytes_per_cycle(x.src, x.dst);
        if (std::isinf(bpc)) continue;
        transfer += static_cast<int64_t>(std::ceil(static_cast<double>(x.bytes) / bpc));
      }
      lc.macs += t.macs;
      lc.compute += compute;
      lc.transfer += transfer;
      lc.total += ls.double_buffered ? std::max(compute, transfer) : compute + transfer;
    }
    e.macs += lc.macs;
    e.compute_cycles += lc.compute;
    e.total_cycles += lc.total;
    e.layers.push_back(std::move(lc));
  }
  e.stall_cycles = e.total_cycles - e.compute_cycles;
  e.achieved_macs_per_cycle =
      e.total_cycles > 0 ? static_cast<double>(e.macs) / e.total_cycles : 0.0;
  return e;
}

TransferTotals layer_transfers(const LayerSchedule& l) {
  TransferTotals t;
  for (const Tile& tile : l.tiles) {
    for (const Transfer& x : tile.transfers) {
      if (x.src == MemLevel::kL3 && x.dst == MemLevel::kL2) t.l3_to_l2 += x.bytes;
      else if (x.src == MemLevel::kL2 && x.dst == MemLevel::kL1) t.l2_to_l1 += x.bytes;
      else if (x.src == MemLevel::kL1 && x.dst == MemLevel::kL2) t.l1_to_l2 += x.bytes;
      else if (x.src == MemLevel::kL2 && x.dst == MemLevel::kL3) t.l2_to_l3 += x.bytes;
    }
  }
  return t;
}

TransferTotals simulate_transfers(const TileSchedule& s) {
  TransferTotals t;
  for (const LayerSchedule& l : s.layers) {
    const TransferTotals x = layer_transfers(l);
    t.l3_to_l2 += x.l3_to_l2;
    t.l2_to_l1 += x.l2_to_l1;
    t.l1_to_l2 += x.l1_to_l2;
    t.l2_to_l3 += x.l2_to_l3;
  }
  return t;
}

// Tiled execution -------------------------------------------------------------

namespace {

/// Copies a (possibly out-of-bounds) window of `src` into a dense tensor,
/// filling the outside with `fill`.
QuantTensor extract_window(const QuantTensor& src, const Window& w, int8_t fill) {
  QuantTensor out({1, w.c1 - w.c0, w.y1 - w.y0, w.x1 - w.x0}, src.qparams);
  std::fill(out.data.begin(), out.data.end(), fill);
  const int ys = std::max(w.y0, 0), ye = std::min(w.y1, src.shape.h);
  const int xs = std::max(w.x0, 0), xe = std::min(w.x1, src.shape.w);
  if (ys >= ye || xs >= xe) return out;
  for (int c = w.c0; c < w.c1; ++c) {
    for (int y = ys; y < ye; ++y) {
      const int8_t* s = &src.at(0, c, y, xs);
      std::copy(s, s + (xe - xs), &out.at(0, c - w.c0, y - w.y0, xs - w.x0));
    }
  }
  return out;
}

void paste(const QuantTensor& tile, QuantTensor& out, const Region& r) {
  for (int c = r.c0; c < r.c1; ++c) {
    for (int y = r.y0; y < r.y1; ++y) {
      const int8_t* s = &tile.at(0, c - r.c0, y - r.y0, 0);
      std::copy(s, s + (r.x1 - r.x0), &out.at(0, c, y, r.x0));
    }
  }
}

void run_tile(const QuantExecutable& exe, size_t i,
              const std::vector<QuantTensor>& values, QuantTensor& out,
              const Region& r) {
  const Program& p = exe.program;
  const Node& n = p.nodes[i];
  const QuantTensor& x = values[n.inputs.front()];
  switch (n.op) {
    case OpKind::kConv: {
      const ConvDesc& full = *exe.convs[i];
      const Window w = input_windows(p, n, r).front();
      const QuantTensor win =
          extract_window(x, w, static_cast<int8_t>(x.qparams.zero_point));
      ConvDesc sub;
      sub.geom = full.geom;
      sub.geom.out_channels = r.c1 - r.c0;
      sub.geom.ph = sub.geom.pw = 0;
      const int64_t per_oc = full.geom.weight_count() / full.geom.out_channels;
      sub.weights.assign(full.weights.begin() + r.c0 * per_oc,
                         full.weights.begin() + r.c1 * per_oc);
      sub.bias.assign(full.bias.begin() + r.c0, full.bias.begin() + r.c1);
      sub.weight_qparams = full.weight_qparams;
      sub.output_qparams = full.output_qparams;
      paste(conv2d_q(win, sub), out, r);
      break;
    }
    case OpKind::kMaxPool: {
      const Window w = input_windows(p, n, r).front();
      paste(maxpool2d(extract_window(x, w, -128), n.kernel, n.stride, 0), out, r);
      break;
    }
    case OpKind::kAct:
      apply_lut_region(x, exe.luts[i], out, r);
      break;
    case OpKind::kUpsample:
      upsample_region(x, n.factor, out, r);
      break;
    case OpKind::kConcat: {
      std::vector<const QuantTensor*> parts;
      for (int t : n.inputs) parts.push_back(&values[t]);
      concat_region(parts, out, r);
      break;
    }
    case OpKind::kSlice:
      slice_region(x, n.c0, out, r);
      break;
    case OpKind::kAdd:
      add_region(x, values[n.inputs[1]], out, r);
      break;
    case OpKind::kRequantize:
      requantize_region(x, out, r);
      break;
  }
}

}  // namespace

std::vector<QuantTensor> forward_tiled(const QuantExecutable& exe,
                                       const TileSchedule& s,
                                       const QuantTensor& input) {
  const Program& p = exe.program;
  if (s.layers.size() != p.nodes.size()) {
    throw Error("schedule does not match the executable");
  }
  if (!(input.shape == p.tensors[p.input].shape)) {
    throw ShapeError("network input must be " + p.tensors[p.input].shape.str() +
                     ", got " + input.shape.str());
  }
  if (!(input.qparams == exe.input_qparams())) {
    throw QuantError("input tensor qparams differ from the model's input qparams");
  }
  std::vector<QuantTensor> values(p.tensors.size());
  values[p.input] = input;
  for (const LayerSchedule& ls : s.layers) {
    const Node& n = p.nodes[ls.node];
    QuantTensor out(p.tensors[n.output].shape, exe.tensor_qparams[n.output]);
    for (const Tile& t : ls.tiles) run_tile(exe, ls.node, values, out, t.out);
    values[n.output] = std::move(out);
  }
  std::vector<QuantTensor> outs;
  for (int t : p.outputs) outs.push_back(values[t]);
  return outs;
}

void write_schedule_report(std::ostream& os, const TileSchedule& s,
                           const MachineModel& m) {
  const CycleEstimate e = estimate_cycles(s, m);
  char line[320];
  std::snprintf(line, sizeof line, "# budget l1=%lld l2=%lld l3=%lld bytes\n",
                static_cast<long long>(s.budget.l1_bytes),
                static_cast<long long>(s.budget.l2_bytes),
                static_cast<long long>(s.budget.l3_bytes));
  os << line;
  std::snprintf(line, sizeof line,
                "%-30s %-10s %-16s %6s %-12s %2s %2s %9s %12s %10s %10s %10s %10s\n",
                "layer", "op", "output", "tiles", "tile(hxwxc)", "db", "l3",
                "l1_peak", "macs", "l2->l1", "l1->l2", "l3<->l2", "cycles");
  os << line;
  for (size_t i = 0; i < s.layers.size(); ++i) {
    const LayerSchedule& ls = s.layers[i];
    const TransferTotals t = layer_transfers(ls);
    int64_t peak = 0;
    for (const Tile& tile : ls.tiles) peak = std::max(peak, tile.l1_bytes());
    const std::string dims = std::to_string(ls.tile_h) + "x" +
                             std::to_string(ls.tile_w) + "x" +
                             std::to_string(ls.tile_c);
    std::snprintf(line, sizeof line,
                  "%-30s %-10s %-16s %6zu %-12s %2s %2s %9lld %12lld %10lld %10lld %10lld %10lld\n",
                  ls.name.c_str(), op_name(ls.op), ls.out_shape.str().c_str(),
                  ls.tiles.size(), dims.c_str(), ls.double_buffered ? "y" : "n",
                  ls.streams_l3 ? "y" : "n", static_cast<long long>(peak),
                  static_cast<long long>(ls.macs()),
                  static_cast<long long>(t.l2_to_l1), static_cast<long long>(t.l1_to_l2),
                  static_cast<long long>(t.l3_to_l2 + t.l2_to_l3),
                  static_cast<long long>(e.layers[i].total));
    os << line;
  }
  const TransferTotals t = simulate_transfers(s);
  os << "\ntransfers l3->l2 " << t.l3_to_l2 << " l2->l1 " << t.l2_to_l1
     << " l1->l2 " << t.l1_to_l2 << " l2->l3 " << t.l2_to_l3 << " bytes\n";
  std::snprintf(line, sizeof line,
                "cycles total %lld compute %lld stall %lld\nmacs %lld\n"
                "mac_per_cycle %.3f (peak %.3f)\nlatency_ms %.4f at %.1f MHz\n",
                static_cast<long long>(e.total_cycles),
                static_cast<long long>(e.compute_cycles),
                static_cast<long long>(e.stall_cycles), static_cast<long long>(e.macs),
                e.achieved_macs_per_cycle, m.macs_per_cycle_peak,
                e.total_cycles / m.frequency_hz * 1e3, m.frequency_hz / 1e6);
  os << line;
}

}  // namespace tyrt
