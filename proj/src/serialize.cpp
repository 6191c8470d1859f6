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

#include "tyrt/serialize.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace tyrt {
namespace {

class Writer {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { put(v, 2); }
  void u32(uint32_t v) { put(v, 4); }
  void i32(int32_t v) { put(static_cast<uint32_t>(v), 4); }
  void f32(float v) { put(std::bit_cast<uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void raw(const char* s, size_t n) { buf_.insert(buf_.end(), s, s + n); }
  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  void put(uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t>& b) : buf_(b) {}

  uint8_t u8() { return static_cast<uint8_t>(get(1)); }
  uint16_t u16() { return static_cast<uint16_t>(get(2)); }
  uint32_t u32() { return static_cast<uint32_t>(get(4)); }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  /// Element count for an array of `elem` bytes each, bounded by what is left.
  size_t count(size_t elem) {
    const uint32_t n = u32();
    need(static_cast<size_t>(n) * elem);
    return n;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(size_t n) const {
    if (buf_.size() - pos_ < n) throw FormatError("model file is truncated");
  }
  uint64_t get(int bytes) {
    need(static_cast<size_t>(bytes));
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += static_cast<size_t>(bytes);
    return v;
  }
  const std::vector<uint8_t>& buf_;
  size_t pos_ = 0;
};

void write_qparams(Writer& w, const QParams& q) {
  w.f64(q.scale);
  w.i32(q.zero_point);
}

QParams read_qparams(Reader& r) {
  QParams q;
  q.scale = r.f64();
  q.zero_point = r.i32();
  try {
    q.validate();
  } catch (const QuantError& e) {
    throw FormatError(std::string("bad qparams in model file: ") + e.what());
  }
  return q;
}

template <typename E>
E checked_enum(uint8_t v, uint8_t max, const char* what) {
  if (v > max) throw FormatError(std::string("unknown ") + what + " code " + std::to_string(v));
  return static_cast<E>(v);
}

}  // namespace

std::vector<uint8_t> encode_model(const Model& m) {
  const GraphSpec& g = m.graph;
  const WeightStore& ws = m.weights;
  Writer w;
  w.raw("TYRT", 4);
  w.u16(kFormatVersion);
  uint16_t flags = 0;
  if (ws.has_master()) flags |= kHasFloat;
  if (ws.quantized()) flags |= kHasQuant;
  w.u16(flags);

  w.u8(static_cast<uint8_t>(g.version));
  w.u8(static_cast<uint8_t>(g.size));
  w.f64(g.width_multiple);
  w.f64(g.depth_multiple);
  w.i32(g.max_channels);
  w.i32(g.num_classes);
  w.i32(g.input_resolution);
  w.u8(static_cast<uint8_t>(g.activation));
  w.u32(static_cast<uint32_t>(g.layers.size()));
  for (const LayerSpec& l : g.layers) {
    w.str(l.name);
    w.u8(static_cast<uint8_t>(l.kind));
    w.u32(static_cast<uint32_t>(l.inputs.size()));
    for (const std::string& s : l.inputs) w.str(s);
    w.i32(l.out_channels);
    w.i32(l.kernel);
    w.i32(l.stride);
    w.i32(l.padding);
    w.i32(l.repeats);
    w.u8(l.shortcut ? 1 : 0);
    w.u8(l.act ? 1 : 0);
    w.i32(l.factor);
    w.i32(l.box_hidden);
    w.i32(l.cls_hidden);
  }

  if (flags & kHasFloat) {
    w.u32(static_cast<uint32_t>(ws.master.size()));
    for (const auto& [name, cw] : ws.master) {
      w.str(name);
      w.u32(static_cast<uint32_t>(cw.weights.size()));
      for (float v : cw.weights) w.f32(v);
      w.u32(static_cast<uint32_t>(cw.bias.size()));
      for (float v : cw.bias) w.f32(v);
    }
  }
  if (flags & kHasQuant) {
    w.u32(static_cast<uint32_t>(ws.activations.size()));
    for (const auto& [name, q] : ws.activations) {
      w.str(name);
      write_qparams(w, q);
    }
    w.u32(static_cast<uint32_t>(ws.quant.size()));
    for (const auto& [name, qc] : ws.quant) {
      w.str(name);
      write_qparams(w, qc.weight_qparams);
      w.u32(static_cast<uint32_t>(qc.weights.size()));
      for (int8_t v : qc.weights) w.u8(static_cast<uint8_t>(v));
      w.u32(static_cast<uint32_t>(qc.bias.size()));
      for (int32_t v : qc.bias) w.i32(v);
    }
  }
  return w.take();
}

Model decode_model(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "TYRT", 4) != 0) {
    throw FormatError("not a TYRT model file");
  }
  Reader r(bytes);
  r.u32();  // magic
  const uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw FormatError("unsupported TYRT format version " + std::to_string(version));
  }
  const uint16_t flags = r.u16();
  if (flags & ~(kHasFloat | kHasQuant)) throw FormatError("unknown TYRT flags");

  Model m;
  GraphSpec& g = m.graph;
  g.version = checked_enum<Version>(r.u8(), 3, "version");
  g.size = checked_enum<SizeClass>(r.u8(), 1, "size class");
  g.width_multiple = r.f64();
  g.depth_multiple = r.f64();
  g.max_channels = r.i32();
  g.num_classes = r.i32();
  g.input_resolution = r.i32();
  g.activation = checked_enum<ActKind>(r.u8(), 1, "activation");
  const size_t layers = r.count(1);
  for (size_t i = 0; i < layers; ++i) {
    LayerSpec l;
    l.name = r.str();
    l.kind = checked_enum<LayerKind>(r.u8(), 8, "layer kind");
    const size_t ni = r.count(4);
    for (size_t k = 0; k < ni; ++k) l.inputs.push_back(r.str());
    l.out_channels = r.i32();
    l.kernel = r.i32();
    l.stride = r.i32();
    l.padding = r.i32();
    l.repeats = r.i32();
    l.shortcut = r.u8() != 0;
    l.act = r.u8() != 0;
    l.factor = r.i32();
    l.box_hidden = r.i32();
    l.cls_hidden = r.i32();
    g.layers.push_back(std::move(l));
  }
  try {
    g.resolve();
  } catch (const ShapeError& e) {
    throw FormatError(std::string("invalid graph in model file: ") + e.what());
  }

  WeightStore& ws = m.weights;
  if (flags & kHasFloat) {
    const size_t n = r.count(8);
    for (size_t i = 0; i < n; ++i) {
      const std::string name = r.str();
      ConvWeights cw;
      cw.weights.resize(r.count(4));
      for (float& v : cw.weights) v = r.f32();
      cw.bias.resize(r.count(4));
      for (float& v : cw.bias) v = r.f32();
      ws.master.emplace(name, std::move(cw));
    }
  }
  if (flags & kHasQuant) {
    const size_t na = r.count(16);
    for (size_t i = 0; i < na; ++i) {
      const std::string name = r.str();
      ws.activations.emplace(name, read_qparams(r));
    }
    const size_t nq = r.count(16);
    for (size_t i = 0; i < nq; ++i) {
      const std::string name = r.str();
      QuantConv qc;
      qc.weight_qparams = read_qparams(r);
      qc.weights.resize(r.count(1));
      for (int8_t& v : qc.weights) v = static_cast<int8_t>(r.u8());
      qc.bias.resize(r.count(4));
      for (int32_t& v : qc.bias) v = r.i32();
      ws.quant.emplace(name, std::move(qc));
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after model payload");
  try {
    ws.validate(lower(g));
  } catch (const Error& e) {
    throw FormatError(std::string("model weights do not match graph: ") + e.what());
  }
  return m;
}

void save_model(const std::filesystem::path& path, const Model& m) {
  const std::vector<uint8_t> bytes = encode_model(m);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open model file " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

void write_manifest(std::ostream& os, const Model& m) {
  const GraphSpec& g = m.graph;
  const Program p = lower(g);
  os << "model " << g.label() << "\n";
  os << "classes " << g.num_classes << "\n";
  os << "input " << g.input_resolution << "x" << g.input_resolution << "\n";
  os << "activation " << act_name(g.activation) << "\n";
  os << "width_multiple " << g.width_multiple << "\n";
  os << "depth_multiple " << g.depth_multiple << "\n";
  os << "weights " << (m.weights.has_master() ? "float" : "")
     << (m.weights.has_master() && m.weights.quantized() ? "+" : "")
     << (m.weights.quantized() ? "int8" : "") << "\n\n";

  // Params and MACs per graph layer: primitive convs are named after the
  // layer they came from ("model.4.m0.cv1" belongs to "model.4").
  auto owner = [&](const std::string& node) -> std::string {
    std::string best;
    for (const LayerSpec& l : g.layers) {
      if ((node == l.name || node.rfind(l.name + ".", 0) == 0) &&
          l.name.size() > best.size()) {
        best = l.name;
      }
    }
    return best;
  };
  std::map<std::string, std::pair<int64_t, int64_t>> per_layer;
  for (const Node& n : p.nodes) {
    if (n.op != OpKind::kConv) continue;
    auto& e = per_layer[owner(n.name)];
    e.first += n.conv.weight_count() + n.conv.out_channels;
    e.second += n.macs(p.tensors);
  }

  char line[256];
  std::snprintf(line, sizeof line, "%-14s %-10s %-26s %10s %14s\n", "layer",
                "kind", "output", "params", "macs");
  os << line;
  for (const LayerSpec& l : g.layers) {
    std::string shapes;
    for (const Shape& s : l.out_shapes) {
      if (!shapes.empty()) shapes += ",";
      shapes += s.str();
    }
    const auto e = per_layer[l.name];
    std::snprintf(line, sizeof line, "%-14s %-10s %-26s %10lld %14lld\n",
                  l.name.c_str(), layer_kind_name(l.kind), shapes.c_str(),
                  static_cast<long long>(e.first), static_cast<long long>(e.second));
    os << line;
  }
  os << "\nparams " << p.count_params() << "\n";
  std::snprintf(line, sizeof line, "params_m %.4f\n", p.count_params() / 1e6);
  os << line;
  os << "macs " << p.count_macs() << "\n";
}

}  // namespace tyrt
