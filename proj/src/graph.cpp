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

#include "tyrt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tyrt/program.hpp"

namespace tyrt {

const char* version_name(Version v) {
  switch (v) {
    case Version::kV1_3: return "v1.3";
    case Version::kV5: return "v5";
    case Version::kV8: return "v8";
    case Version::kV10: return "v10";
  }
  return "?";
}

const char* size_name(SizeClass s) {
  return s == SizeClass::kSmall ? "small" : "big";
}

Version parse_version(const std::string& s) {
  if (s == "v1.3" || s == "v1_3" || s == "1.3") return Version::kV1_3;
  if (s == "v5" || s == "5") return Version::kV5;
  if (s == "v8" || s == "8") return Version::kV8;
  if (s == "v10" || s == "10") return Version::kV10;
  throw Error("unknown network version '" + s + "'");
}

SizeClass parse_size(const std::string& s) {
  if (s == "small") return SizeClass::kSmall;
  if (s == "big") return SizeClass::kBig;
  throw Error("unknown network size '" + s + "'");
}

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kInput: return "input";
    case LayerKind::kConv: return "conv";
    case LayerKind::kC3: return "c3";
    case LayerKind::kC2f: return "c2f";
    case LayerKind::kDetectV8: return "detect_v8";
    case LayerKind::kDetectV10: return "detect_v10";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kUpsample: return "upsample";
    case LayerKind::kConcat: return "concat";
  }
  return "?";
}

int scale_channels(int base, double width_multiple, int max_channels) {
  const double scaled = std::min(base, max_channels) * width_multiple;
  const int rounded = static_cast<int>(std::floor(scaled / 8.0 + 0.5)) * 8;
  return std::max(8, rounded);
}

int scale_depth(int base, double depth_multiple) {
  if (base <= 1) return base;
  return std::max(1, static_cast<int>(std::round(base * depth_multiple)));
}

// ---------------------------------------------------------------------------

void GraphSpec::resolve() {
  if (num_classes < 1) throw ShapeError("num_classes must be >= 1");
  if (layers.empty() || layers.front().kind != LayerKind::kInput) {
    throw ShapeError("graph must start with its input node");
  }
  std::map<std::string, size_t> index;
  int detect_count = 0;
  for (size_t i = 0; i < layers.size(); ++i) {
    LayerSpec& l = layers[i];
    if (index.count(l.name)) throw ShapeError("duplicate layer name " + l.name);
    if (i > 0 && l.kind == LayerKind::kInput) {
      throw ShapeError("graph has more than one input node");
    }
    std::vector<Shape> in;
    for (const std::string& src : l.inputs) {
      auto it = index.find(src);
      if (it == index.end()) {
        throw ShapeError("layer " + l.name + " reads '" + src +
                         "' which is not an earlier layer");
      }
      const LayerSpec& p = layers[it->second];
      if (p.kind == LayerKind::kDetectV8 || p.kind == LayerKind::kDetectV10) {
        throw ShapeError("layer " + l.name + " consumes a detect head");
      }
      in.push_back(p.out_shapes.front());
    }
    auto need_inputs = [&](size_t n) {
      if (in.size() != n) {
        throw ShapeError("layer " + l.name + " expects " + std::to_string(n) +
                         " input(s)");
      }
    };
    l.out_shapes.clear();
    switch (l.kind) {
      case LayerKind::kInput:
        need_inputs(0);
        l.out_shapes.push_back({1, l.out_channels, input_resolution,
                                input_resolution});
        break;
      case LayerKind::kConv: {
        need_inputs(1);
        ConvGeometry geom{in[0].c, l.out_channels, l.kernel, l.kernel,
                          l.stride, l.stride, l.padding, l.padding};
        const auto [h, w] = geom.output_hw(in[0].h, in[0].w);
        l.out_shapes.push_back({1, l.out_channels, h, w});
        break;
      }
      case LayerKind::kC3:
      case LayerKind::kC2f:
        need_inputs(1);
        if (l.out_channels < 2 || l.repeats < 1) {
          throw ShapeError("block " + l.name + " needs >= 2 channels and >= 1 repeat");
        }
        l.out_shapes.push_back({1, l.out_channels, in[0].h, in[0].w});
        break;
      case LayerKind::kMaxPool: {
        need_inputs(1);
        const int h = (in[0].h + 2 * l.padding - l.kernel) / l.stride + 1;
        const int w = (in[0].w + 2 * l.padding - l.kernel) / l.stride + 1;
        if (h < 1 || w < 1) throw ShapeError("max-pool " + l.name + " output empty");
        l.out_shapes.push_back({1, in[0].c, h, w});
        break;
      }
      case LayerKind::kUpsample:
        need_inputs(1);
        l.out_shapes.push_back(
            {1, in[0].c, in[0].h * l.factor, in[0].w * l.factor});
        break;
      case LayerKind::kConcat: {
        if (in.size() < 2) throw ShapeError("concat " + l.name + " needs >= 2 inputs");
        Shape s = in[0];
        s.c = 0;
        for (const Shape& x : in) {
          if (x.h != s.h || x.w != s.w) {
            throw ShapeError("concat " + l.name + " spatial mismatch " +
                             x.str() + " vs " + in[0].str());
          }
          s.c += x.c;
        }
        l.out_shapes.push_back(s);
        break;
      }
      case LayerKind::kDetectV8:
      case LayerKind::kDetectV10:
        if (in.empty()) throw ShapeError("detect head has no inputs");
        if (i + 1 != layers.size()) {
          throw ShapeError("detect head must be the last layer");
        }
        ++detect_count;
        for (const Shape& x : in) {
          l.out_shapes.push_back({1, 4 + num_classes, x.h, x.w});
        }
        break;
    }
    index[l.name] = i;
  }
  if (detect_count != 1) throw ShapeError("graph needs exactly one detect head");
  for (const Shape& s : head().out_shapes) {
    if (input_resolution % s.h != 0) {
      throw ShapeError("detect grid does not divide the input resolution");
    }
  }
}

const LayerSpec& GraphSpec::layer(const std::string& name) const {
  for (const LayerSpec& l : layers) {
    if (l.name == name) return l;
  }
  throw ShapeError("no layer named " + name);
}

const LayerSpec& GraphSpec::head() const {
  if (layers.empty()) throw ShapeError("empty graph");
  return layers.back();
}

std::vector<int> GraphSpec::head_strides() const {
  std::vector<int> strides;
  for (const Shape& s : head().out_shapes) {
    strides.push_back(input_resolution / s.h);
  }
  return strides;
}

int GraphSpec::total_stride() const {
  const auto s = head_strides();
  return *std::max_element(s.begin(), s.end());
}

std::string GraphSpec::label() const {
  std::string v = version_name(version);
  std::string s = "TY-" + v;
  if (version != Version::kV10) {
    s += size == SizeClass::kSmall ? "-Small" : "-Big";
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kTotalStride = 32;

class Builder {
 public:
  explicit Builder(GraphSpec& g) : g_(g) {}

  std::string input(int channels) {
    LayerSpec l;
    l.name = "images";
    l.kind = LayerKind::kInput;
    l.out_channels = channels;
    return add(std::move(l));
  }

  std::string conv(const std::string& name, const std::string& in, int c,
                   int k, int s, int pad = -1) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kConv;
    l.inputs = {in};
    l.out_channels = c;
    l.kernel = k;
    l.stride = s;
    l.padding = pad < 0 ? k / 2 : pad;
    return add(std::move(l));
  }

  std::string block(LayerKind kind, const std::string& name,
                    const std::string& in, int c, int repeats, bool shortcut) {
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.inputs = {in};
    l.out_channels = c;
    l.repeats = repeats;
    l.shortcut = shortcut;
    return add(std::move(l));
  }

  std::string maxpool(const std::string& name, const std::string& in, int k,
                      int s, int pad) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kMaxPool;
    l.inputs = {in};
    l.kernel = k;
    l.stride = s;
    l.padding = pad;
    return add(std::move(l));
  }

  std::string upsample(const std::string& name, const std::string& in) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kUpsample;
    l.inputs = {in};
    l.factor = 2;
    return add(std::move(l));
  }

  std::string concat(const std::string& name, std::vector<std::string> in) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::kConcat;
    l.inputs = std::move(in);
    return add(std::move(l));
  }

  std::string detect(LayerKind kind, const std::string& name,
                     std::vector<std::string> in, int box_hidden,
                     int cls_hidden) {
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.inputs = std::move(in);
    l.box_hidden = box_hidden;
    l.cls_hidden = cls_hidden;
    l.act = false;
    return add(std::move(l));
  }

  // Spatial pyramid pooling (fast): 1x1 reduce, three chained 5x5 pools,
  // concat, 1x1 expand.
  std::string sppf(const std::string& name, const std::string& in, int c) {
    const std::string a = conv(name + ".cv1", in, c / 2, 1, 1);
    const std::string m0 = maxpool(name + ".m0", a, 5, 1, 2);
    const std::string m1 = maxpool(name + ".m1", m0, 5, 1, 2);
    const std::string m2 = maxpool(name + ".m2", m1, 5, 1, 2);
    const std::string cat = concat(name + ".cat", {a, m0, m1, m2});
    return conv(name, cat, c, 1, 1);
  }

 private:
  std::string add(LayerSpec l) {
    std::string name = l.name;
    g_.layers.push_back(std::move(l));
    return name;
  }

  GraphSpec& g_;
};

struct VariantConfig {
  double width;
  double depth;
  int max_channels;
  int box_hidden;
  int cls_hidden;
};

// Width/depth multiples per variant; max_channels caps the deepest stage
// the same way the upstream scale tables do.
VariantConfig variant_config(Version v, SizeClass s) {
  switch (v) {
    case Version::kV5:
      return s == SizeClass::kSmall ? VariantConfig{0.10, 0.33, 1024, 64, 80}
                                    : VariantConfig{0.15, 0.33, 768, 64, 80};
    case Version::kV8:
      return s == SizeClass::kSmall ? VariantConfig{0.10, 0.30, 1024, 64, 80}
                                    : VariantConfig{0.18, 0.30, 448, 64, 80};
    case Version::kV10:
      return VariantConfig{0.18, 0.15, 448, 64, 80};
    case Version::kV1_3:
      return s == SizeClass::kSmall ? VariantConfig{1.0, 1.0, 1024, 48, 48}
                                    : VariantConfig{1.0, 1.0, 1024, 64, 80};
  }
  throw Error("unsupported variant");
}

void build_v1_3(Builder& b, SizeClass size, const VariantConfig& cfg) {
  // Plain 3x3 conv + 2x2 max-pool backbone; the last two convs feed the
  // stride-16 and stride-32 heads.
  const std::vector<int> widths = size == SizeClass::kSmall
                                      ? std::vector<int>{16, 32, 64, 64, 96, 64}
                                      : std::vector<int>{16, 32, 64, 128, 128, 144};
  std::string x = b.input(3);
  int idx = 0;
  auto name = [&idx]() { return "model." + std::to_string(idx++); };
  for (int i = 0; i < 4; ++i) {
    x = b.conv(name(), x, widths[i], 3, 1);
    x = b.maxpool(name(), x, 2, 2, 0);
  }
  const std::string p4 = b.conv(name(), x, widths[4], 3, 1);
  x = b.maxpool(name(), p4, 2, 2, 0);
  const std::string p5 = b.conv(name(), x, widths[5], 3, 1);
  b.detect(LayerKind::kDetectV8, name(), {p4, p5}, cfg.box_hidden,
           cfg.cls_hidden);
}

void build_csp(Builder& b, Version version, const VariantConfig& cfg) {
  const bool v5 = version == Version::kV5;
  const LayerKind blk = v5 ? LayerKind::kC3 : LayerKind::kC2f;
  int ch[5];
  const int base[5] = {64, 128, 256, 512, 1024};
  for (int i = 0; i < 5; ++i) {
    ch[i] = scale_channels(base[i], cfg.width, cfg.max_channels);
  }
  auto n = [&](int base_repeats) { return scale_depth(base_repeats, cfg.depth); };

  std::string x = b.input(3);
  x = v5 ? b.conv("model.0", x, ch[0], 6, 2, 2) : b.conv("model.0", x, ch[0], 3, 2);
  x = b.conv("model.1", x, ch[1], 3, 2);
  x = b.block(blk, "model.2", x, ch[1], n(3), true);
  x = b.conv("model.3", x, ch[2], 3, 2);
  x = b.block(blk, "model.4", x, ch[2], n(6), true);
  x = b.conv("model.5", x, ch[3], 3, 2);
  const std::string p4 = b.block(blk, "model.6", x, ch[3], n(v5 ? 9 : 6), true);
  x = b.conv("model.7", p4, ch[4], 3, 2);
  x = b.block(blk, "model.8", x, ch[4], n(3), true);
  const std::string p5 = b.sppf("model.9", x, ch[4]);

  const LayerKind head =
      version == Version::kV10 ? LayerKind::kDetectV10 : LayerKind::kDetectV8;
  if (v5) {
    const std::string lat = b.conv("model.10", p5, ch[3], 1, 1);
    x = b.upsample("model.11", lat);
    x = b.concat("model.12", {x, p4});
    const std::string o4 = b.block(blk, "model.13", x, ch[3], n(3), false);
    x = b.conv("model.14", o4, ch[3], 3, 2);
    x = b.concat("model.15", {x, lat});
    const std::string o5 = b.block(blk, "model.16", x, ch[4], n(3), false);
    b.detect(head, "model.17", {o4, o5}, cfg.box_hidden, cfg.cls_hidden);
  } else {
    x = b.upsample("model.10", p5);
    x = b.concat("model.11", {x, p4});
    const std::string o4 = b.block(blk, "model.12", x, ch[3], n(3), false);
    x = b.conv("model.13", o4, ch[3], 3, 2);
    x = b.concat("model.14", {x, p5});
    const std::string o5 = b.block(blk, "model.15", x, ch[4], n(3), false);
    b.detect(head, "model.16", {o4, o5}, cfg.box_hidden, cfg.cls_hidden);
  }
}

}  // namespace

GraphSpec build_graph(Version version, SizeClass size, int num_classes,
                      int input_resolution, ActKind activation) {
  if (num_classes < 1) throw ShapeError("num_classes must be >= 1");
  if (input_resolution <= 0 || input_resolution % kTotalStride != 0) {
    throw ShapeError("input resolution " + std::to_string(input_resolution) +
                     " is not a multiple of the network stride " +
                     std::to_string(kTotalStride));
  }
  if (version == Version::kV10 && size != SizeClass::kBig) {
    throw Error("v10 is built in a single configuration; use size 'big'");
  }
  const VariantConfig cfg = variant_config(version, size);
  GraphSpec g;
  g.version = version;
  g.size = size;
  g.width_multiple = cfg.width;
  g.depth_multiple = cfg.depth;
  g.max_channels = cfg.max_channels;
  g.num_classes = num_classes;
  g.input_resolution = input_resolution;
  g.activation = activation;
  Builder b(g);
  if (version == Version::kV1_3) {
    build_v1_3(b, size, cfg);
  } else {
    build_csp(b, version, cfg);
  }
  g.resolve();
  return g;
}

int64_t count_params(const GraphSpec& g) { return lower(g).count_params(); }

int64_t count_macs(const GraphSpec& g) { return lower(g).count_macs(); }

}  // namespace tyrt
