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

#include "tyrt/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace tyrt {

void CalibStats::observe(const FloatTensor& t) {
  if (t.data.empty()) return;
  auto [lo, hi] = std::minmax_element(t.data.begin(), t.data.end());
  if (samples == 0) {
    min = *lo;
    max = *hi;
  } else {
    min = std::min(min, *lo);
    max = std::max(max, *hi);
  }
  ++samples;
}

void CalibStats::merge(const CalibStats& other) {
  if (other.samples == 0) return;
  if (samples == 0) {
    *this = other;
    return;
  }
  min = std::min(min, other.min);
  max = std::max(max, other.max);
  samples += other.samples;
}

QParams qparams_from_range(float min, float max) {
  if (!std::isfinite(min) || !std::isfinite(max) || min > max) {
    throw QuantError("invalid calibration range");
  }
  const double lo = std::min(0.0, static_cast<double>(min));
  const double hi = std::max(0.0, static_cast<double>(max));
  QParams q;
  if (hi - lo <= 0.0) {
    q.scale = 1.0 / 255.0;
    q.zero_point = -128;
    return q;
  }
  q.scale = (hi - lo) / 255.0;
  const double zp = round_half_away(-128.0 - lo / q.scale);
  q.zero_point = static_cast<int32_t>(std::clamp(zp, -128.0, 127.0));
  return q;
}

QParams weight_qparams(const std::vector<float>& w) {
  double amax = 0.0;
  for (float v : w) amax = std::max(amax, std::fabs(static_cast<double>(v)));
  QParams q;
  q.scale = amax > 0.0 ? amax / 127.0 : 1.0 / 127.0;
  q.zero_point = 0;
  return q;
}

std::map<std::string, CalibStats> collect_stats(
    const Program& p, const WeightStore& w,
    const std::vector<FloatTensor>& images) {
  if (images.empty()) throw QuantError("calibration needs at least one image");
  if (!w.has_master()) throw MissingWeights("calibration needs float weights");
  std::vector<CalibStats> stats(p.tensors.size());
  for (const FloatTensor& img : images) {
    std::vector<FloatTensor> dump;
    forward_float(p, w, img, &dump);
    for (size_t t = 0; t < dump.size(); ++t) stats[t].observe(dump[t]);
  }
  std::map<std::string, CalibStats> out;
  for (size_t t = 0; t < p.tensors.size(); ++t) {
    out.emplace(p.tensors[t].name, stats[t]);
  }
  return out;
}

std::map<std::string, QParams> calibrate(const GraphSpec& g,
                                         const WeightStore& w,
                                         const std::vector<FloatTensor>& images) {
  const Program p = lower(g);
  w.validate(p);
  const auto stats = collect_stats(p, w, images);
  std::vector<QParams> tq(p.tensors.size());
  for (size_t t = 0; t < p.tensors.size(); ++t) {
    const CalibStats& s = stats.at(p.tensors[t].name);
    tq[t] = qparams_from_range(s.min, s.max);
  }
  // Code-preserving ops share their producer's grid.
  for (const Node& n : p.nodes) {
    if (n.op == OpKind::kMaxPool || n.op == OpKind::kUpsample ||
        n.op == OpKind::kSlice) {
      tq[n.output] = tq[n.inputs.front()];
    }
  }
  std::map<std::string, QParams> out;
  for (size_t t = 0; t < p.tensors.size(); ++t) {
    out.emplace(p.tensors[t].name, tq[t]);
  }
  return out;
}

WeightStore quantize_weights(const GraphSpec& g, const WeightStore& w,
                             const std::map<std::string, QParams>& activations) {
  const Program p = lower(g);
  if (!w.has_master()) throw MissingWeights("quantization needs float weights");
  WeightStore out;
  out.master = w.master;
  out.activations = activations;
  for (const Node& n : p.nodes) {
    if (n.op != OpKind::kConv) continue;
    auto it = w.master.find(n.name);
    if (it == w.master.end()) throw MissingWeights("no float weights for " + n.name);
    const ConvWeights& cw = it->second;
    auto in_it = activations.find(p.tensors[n.inputs.front()].name);
    if (in_it == activations.end()) {
      throw MissingWeights("no activation qparams for input of " + n.name);
    }
    QuantConv qc;
    qc.weight_qparams = weight_qparams(cw.weights);
    qc.weights.resize(cw.weights.size());
    for (size_t i = 0; i < cw.weights.size(); ++i) {
      const double code = round_half_away(cw.weights[i] / qc.weight_qparams.scale);
      qc.weights[i] = static_cast<int8_t>(std::clamp(code, -127.0, 127.0));
    }
    const double acc_scale = in_it->second.scale * qc.weight_qparams.scale;
    qc.bias.resize(cw.bias.size());
    for (size_t i = 0; i < cw.bias.size(); ++i) {
      const double code = round_half_away(cw.bias[i] / acc_scale);
      constexpr double lim = std::numeric_limits<int32_t>::max();
      qc.bias[i] = static_cast<int32_t>(std::clamp(code, -lim, lim));
    }
    out.quant.emplace(n.name, std::move(qc));
  }
  out.validate(p);
  return out;
}

WeightStore quantize_model(const GraphSpec& g, const WeightStore& w,
                           const std::vector<FloatTensor>& images) {
  return quantize_weights(g, w, calibrate(g, w, images));
}

std::vector<TensorError> quant_error(const GraphSpec& g, const WeightStore& w,
                                     const std::vector<FloatTensor>& images) {
  const Program p = lower(g);
  const QuantExecutable exe = compile(g, w);
  std::vector<double> sq(p.tensors.size(), 0.0);
  std::vector<double> amax(p.tensors.size(), 0.0);
  std::vector<int64_t> count(p.tensors.size(), 0);
  for (const FloatTensor& img : images) {
    std::vector<FloatTensor> ref;
    forward_float(p, w, img, &ref);
    std::vector<QuantTensor> got;
    forward(exe, quantize(img, exe.input_qparams()), &got);
    // Tensor ids of the lowered program are a prefix of the executable's.
    for (size_t t = 0; t < p.tensors.size(); ++t) {
      const FloatTensor deq = dequantize(got[t]);
      for (size_t i = 0; i < deq.data.size(); ++i) {
        const double e = std::fabs(static_cast<double>(deq.data[i]) - ref[t].data[i]);
        amax[t] = std::max(amax[t], e);
        sq[t] += e * e;
      }
      count[t] += static_cast<int64_t>(deq.data.size());
    }
  }
  std::vector<TensorError> out;
  for (size_t t = 0; t < p.tensors.size(); ++t) {
    TensorError e;
    e.name = p.tensors[t].name;
    e.max_abs = amax[t];
    e.rmse = count[t] ? std::sqrt(sq[t] / static_cast<double>(count[t])) : 0.0;
    e.scale = exe.tensor_qparams[t].scale;
    out.push_back(std::move(e));
  }
  return out;
}

void write_calibration_report(std::ostream& os, const GraphSpec& g,
                              const WeightStore& w,
                              const std::vector<TensorError>& errors) {
  const Program p = lower(g);
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-18s %12s %5s %12s %12s %8s\n",
                "tensor", "shape", "scale", "zp", "max_abs", "rmse", "rmse/q");
  os << "# calibration report: " << g.label() << "\n" << line;
  std::map<std::string, const TensorError*> by_name;
  for (const TensorError& e : errors) by_name[e.name] = &e;
  for (const TensorInfo& t : p.tensors) {
    auto it = w.activations.find(t.name);
    if (it == w.activations.end()) continue;
    const QParams& q = it->second;
    auto e = by_name.find(t.name);
    const double max_abs = e == by_name.end() ? 0.0 : e->second->max_abs;
    const double rmse = e == by_name.end() ? 0.0 : e->second->rmse;
    std::snprintf(line, sizeof line, "%-28s %-18s %12.6g %5d %12.6g %12.6g %8.3f\n",
                  t.name.c_str(), t.shape.str().c_str(), q.scale, q.zero_point,
                  max_abs, rmse, rmse / q.scale);
    os << line;
  }
}

}  // namespace tyrt
