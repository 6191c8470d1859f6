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

#include "tyrt/program.hpp"

#include <cmath>
#include <map>
#include <random>

namespace tyrt {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::kConv: return "conv";
    case OpKind::kAct: return "act";
    case OpKind::kMaxPool: return "maxpool";
    case OpKind::kUpsample: return "upsample";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kAdd: return "add";
    case OpKind::kRequantize: return "requantize";
  }
  return "?";
}

int64_t Node::macs(const std::vector<TensorInfo>& tensors) const {
  if (op != OpKind::kConv) return 0;
  const Shape& o = tensors[output].shape;
  return conv.weight_count() * o.h * o.w;
}

int Program::find_tensor(const std::string& name) const {
  for (size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int64_t Program::count_params() const {
  int64_t total = 0;
  for (const Node& n : nodes) {
    if (n.op == OpKind::kConv) total += n.conv.weight_count() + n.conv.out_channels;
  }
  return total;
}

int64_t Program::count_macs() const {
  int64_t total = 0;
  for (const Node& n : nodes) total += n.macs(tensors);
  return total;
}

// Lowering ------------------------------------------------------------------

namespace {

class Lowerer {
 public:
  explicit Lowerer(const GraphSpec& g) : g_(g) {}

  Program run() {
    for (const LayerSpec& l : g_.layers) lower_layer(l);
    return std::move(p_);
  }

 private:
  int add_tensor(const std::string& name, Shape s) {
    p_.tensors.push_back({name, s});
    return static_cast<int>(p_.tensors.size()) - 1;
  }

  const Shape& shape(int t) const { return p_.tensors[t].shape; }

  int conv(const std::string& name, int in, int cout, int k, int s, int pad,
           bool act, HeadRole role = HeadRole::kNone) {
    Node n;
    n.op = OpKind::kConv;
    n.role = role;
    n.name = name;
    n.inputs = {in};
    n.conv = ConvGeometry{shape(in).c, cout, k, k, s, s, pad, pad};
    const auto [h, w] = n.conv.output_hw(shape(in).h, shape(in).w);
    const Shape os{1, cout, h, w};
    n.output = add_tensor(act ? name + ".pre" : name, os);
    p_.nodes.push_back(n);
    if (!act) return n.output;
    Node a;
    a.op = OpKind::kAct;
    a.name = name + ".act";
    a.act = g_.activation;
    a.inputs = {n.output};
    a.output = add_tensor(name, os);
    p_.nodes.push_back(a);
    return a.output;
  }

  int simple(OpKind op, const std::string& name, std::vector<int> in, Shape s) {
    Node n;
    n.op = op;
    n.name = name;
    n.inputs = std::move(in);
    n.output = add_tensor(name, s);
    p_.nodes.push_back(n);
    return n.output;
  }

  int slice(const std::string& name, int in, int c0, int c1) {
    Shape s = shape(in);
    s.c = c1 - c0;
    const int out = simple(OpKind::kSlice, name, {in}, s);
    p_.nodes.back().c0 = c0;
    p_.nodes.back().c1 = c1;
    return out;
  }

  int add(const std::string& name, int a, int b) {
    return simple(OpKind::kAdd, name, {a, b}, shape(a));
  }

  int concat(const std::string& name, const std::vector<int>& in) {
    Shape s = shape(in.front());
    s.c = 0;
    for (int t : in) s.c += shape(t).c;
    return simple(OpKind::kConcat, name, in, s);
  }

  int c3(const LayerSpec& l, int in) {
    const int c = l.out_channels / 2;
    int a = conv(l.name + ".cv1", in, c, 1, 1, 0, true);
    const int b = conv(l.name + ".cv2", in, c, 1, 1, 0, true);
    for (int i = 0; i < l.repeats; ++i) {
      const std::string m = l.name + ".m" + std::to_string(i);
      int t = conv(m + ".cv1", a, c, 1, 1, 0, true);
      t = conv(m + ".cv2", t, c, 3, 1, 1, true);
      a = l.shortcut ? add(m + ".add", a, t) : t;
    }
    const int cat = concat(l.name + ".cat", {a, b});
    return conv(l.name, cat, l.out_channels, 1, 1, 0, true);
  }

  int c2f(const LayerSpec& l, int in) {
    const int c = l.out_channels / 2;
    const int y = conv(l.name + ".cv1", in, 2 * c, 1, 1, 0, true);
    std::vector<int> parts = {slice(l.name + ".split0", y, 0, c),
                              slice(l.name + ".split1", y, c, 2 * c)};
    int last = parts.back();
    for (int i = 0; i < l.repeats; ++i) {
      const std::string m = l.name + ".m" + std::to_string(i);
      int t = conv(m + ".cv1", last, c, 3, 1, 1, true);
      t = conv(m + ".cv2", t, c, 3, 1, 1, true);
      if (l.shortcut) t = add(m + ".add", last, t);
      parts.push_back(t);
      last = t;
    }
    const int cat = concat(l.name + ".cat", parts);
    return conv(l.name, cat, l.out_channels, 1, 1, 0, true);
  }

  void detect(const LayerSpec& l, const std::vector<int>& in) {
    const bool v10 = l.kind == LayerKind::kDetectV10;
    for (size_t i = 0; i < in.size(); ++i) {
      const std::string s = std::to_string(i);
      const std::string box = l.name + ".box" + s;
      int b = conv(box + ".0", in[i], l.box_hidden, 3, 1, 1, true);
      b = conv(box + ".1", b, l.box_hidden, 3, 1, 1, true);
      b = conv(box + ".2", b, 4, 1, 1, 0, false, HeadRole::kBoxPred);

      const std::string cls = l.name + ".cls" + s;
      int c = conv(cls + ".0", in[i], l.cls_hidden, 3, 1, 1, true);
      if (v10) {
        // One-to-one head: extra pointwise mixing between the 3x3 stages.
        c = conv(cls + ".1", c, l.cls_hidden, 1, 1, 0, true);
        c = conv(cls + ".2", c, l.cls_hidden, 3, 1, 1, true);
        c = conv(cls + ".3", c, l.cls_hidden, 1, 1, 0, true);
        c = conv(cls + ".4", c, g_.num_classes, 1, 1, 0, false,
                 HeadRole::kClsPred);
      } else {
        c = conv(cls + ".1", c, l.cls_hidden, 3, 1, 1, true);
        c = conv(cls + ".2", c, g_.num_classes, 1, 1, 0, false,
                 HeadRole::kClsPred);
      }
      p_.outputs.push_back(concat(l.name + ".out" + s, {b, c}));
    }
  }

  void lower_layer(const LayerSpec& l) {
    std::vector<int> in;
    for (const std::string& name : l.inputs) in.push_back(layer_out_.at(name));
    int out = -1;
    switch (l.kind) {
      case LayerKind::kInput:
        out = add_tensor(l.name, l.out_shapes.front());
        p_.input = out;
        break;
      case LayerKind::kConv:
        out = conv(l.name, in[0], l.out_channels, l.kernel, l.stride, l.padding,
                   l.act);
        break;
      case LayerKind::kC3:
        out = c3(l, in[0]);
        break;
      case LayerKind::kC2f:
        out = c2f(l, in[0]);
        break;
      case LayerKind::kMaxPool:
        out = simple(OpKind::kMaxPool, l.name, in, l.out_shapes.front());
        p_.nodes.back().kernel = l.kernel;
        p_.nodes.back().stride = l.stride;
        p_.nodes.back().pad = l.padding;
        break;
      case LayerKind::kUpsample:
        out = simple(OpKind::kUpsample, l.name, in, l.out_shapes.front());
        p_.nodes.back().factor = l.factor;
        break;
      case LayerKind::kConcat:
        out = concat(l.name, in);
        break;
      case LayerKind::kDetectV8:
      case LayerKind::kDetectV10:
        detect(l, in);
        return;
    }
    layer_out_[l.name] = out;
  }

  const GraphSpec& g_;
  Program p_;
  std::map<std::string, int> layer_out_;
};

}  // namespace

Program lower(const GraphSpec& g) { return Lowerer(g).run(); }

// Weights -------------------------------------------------------------------

void WeightStore::validate(const Program& p) const {
  size_t convs = 0;
  for (const Node& n : p.nodes) {
    if (n.op != OpKind::kConv) continue;
    ++convs;
    const auto wc = static_cast<size_t>(n.conv.weight_count());
    const auto bc = static_cast<size_t>(n.conv.out_channels);
    if (has_master()) {
      auto it = master.find(n.name);
      if (it == master.end()) throw MissingWeights("no float weights for " + n.name);
      if (it->second.weights.size() != wc || it->second.bias.size() != bc) {
        throw MissingWeights("float weights for " + n.name + " have the wrong size");
      }
    }
    if (quantized()) {
      auto it = quant.find(n.name);
      if (it == quant.end()) throw MissingWeights("no int8 weights for " + n.name);
      if (it->second.weights.size() != wc || it->second.bias.size() != bc) {
        throw MissingWeights("int8 weights for " + n.name + " have the wrong size");
      }
      it->second.weight_qparams.validate();
    }
  }
  if ((has_master() && master.size() != convs) ||
      (quantized() && quant.size() != convs)) {
    throw MissingWeights("weight store holds entries for unknown layers");
  }
  if (!has_master() && !quantized()) throw MissingWeights("weight store is empty");
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

WeightStore random_weights(const GraphSpec& g, uint64_t seed) {
  const Program p = lower(g);
  std::mt19937_64 rng(seed);
  WeightStore store;
  for (const Node& n : p.nodes) {
    if (n.op != OpKind::kConv) continue;
    const ConvGeometry& c = n.conv;
    const double fan_in = static_cast<double>(c.in_channels) * c.kh * c.kw;
    const double bound = std::sqrt(6.0 / fan_in);
    ConvWeights w;
    w.weights.resize(static_cast<size_t>(c.weight_count()));
    for (float& v : w.weights) {
      v = static_cast<float>((2.0 * uniform01(rng) - 1.0) * bound);
    }
    w.bias.resize(static_cast<size_t>(c.out_channels));
    const int grid = g.input_resolution / p.tensors[n.output].shape.h;
    for (float& v : w.bias) {
      const double jitter = (2.0 * uniform01(rng) - 1.0) * 0.05;
      switch (n.role) {
        case HeadRole::kBoxPred:
          v = static_cast<float>(2.0 + jitter);
          break;
        case HeadRole::kClsPred: {
          const double cells = std::pow(static_cast<double>(g.input_resolution) / grid, 2);
          v = static_cast<float>(std::log(5.0 / g.num_classes / cells) + jitter);
          break;
        }
        case HeadRole::kNone:
          v = static_cast<float>(jitter);
          break;
      }
    }
    store.master.emplace(n.name, std::move(w));
  }
  return store;
}

// Float execution -----------------------------------------------------------

std::vector<FloatTensor> forward_float(const Program& p, const WeightStore& w,
                                       const FloatTensor& input,
                                       std::vector<FloatTensor>* dump) {
  if (!(input.shape == p.tensors[p.input].shape)) {
    throw ShapeError("network input must be " + p.tensors[p.input].shape.str() +
                     ", got " + input.shape.str());
  }
  std::vector<FloatTensor> values(p.tensors.size());
  values[p.input] = input;
  for (const Node& n : p.nodes) {
    const FloatTensor& x = values[n.inputs.front()];
    FloatTensor y;
    switch (n.op) {
      case OpKind::kConv: {
        auto it = w.master.find(n.name);
        if (it == w.master.end()) throw MissingWeights("no float weights for " + n.name);
        y = conv2d_f(x, n.conv, it->second.weights, it->second.bias);
        break;
      }
      case OpKind::kAct:
        y = act_f(x, n.act);
        break;
      case OpKind::kMaxPool:
        y = maxpool2d_f(x, n.kernel, n.stride, n.pad);
        break;
      case OpKind::kUpsample:
        y = upsample_nearest_f(x, n.factor);
        break;
      case OpKind::kConcat: {
        std::vector<const FloatTensor*> parts;
        for (int t : n.inputs) parts.push_back(&values[t]);
        y = concat_channels_f(parts);
        break;
      }
      case OpKind::kSlice:
        y = slice_channels_f(x, n.c0, n.c1);
        break;
      case OpKind::kAdd:
        y = add_f(x, values[n.inputs[1]]);
        break;
      case OpKind::kRequantize:
        y = x;
        break;
    }
    values[n.output] = std::move(y);
  }
  std::vector<FloatTensor> outs;
  for (int t : p.outputs) outs.push_back(values[t]);
  if (dump) *dump = std::move(values);
  return outs;
}

// Int8 execution ------------------------------------------------------------

QuantExecutable compile(const GraphSpec& g, const WeightStore& w) {
  QuantExecutable exe;
  exe.graph = g;
  Program p = lower(g);
  if (!w.quantized()) throw MissingWeights("model has not been quantized");
  w.validate(p);

  auto qparams_of = [&](const std::string& name) {
    auto it = w.activations.find(name);
    if (it == w.activations.end()) {
      throw MissingWeights("no activation qparams for tensor " + name);
    }
    it->second.validate();
    return it->second;
  };

  std::vector<QParams> tq(p.tensors.size());
  for (size_t t = 0; t < p.tensors.size(); ++t) tq[t] = qparams_of(p.tensors[t].name);

  // Code-preserving ops carry their input's qparams through.
  for (const Node& n : p.nodes) {
    if (n.op == OpKind::kMaxPool || n.op == OpKind::kUpsample ||
        n.op == OpKind::kSlice) {
      tq[n.output] = tq[n.inputs.front()];
    }
  }

  Program out;
  out.tensors = p.tensors;
  out.input = p.input;
  out.outputs = p.outputs;
  for (const Node& n : p.nodes) {
    if (n.op == OpKind::kConcat) {
      Node cat = n;
      for (int& in : cat.inputs) {
        if (tq[in] == tq[n.output]) continue;
        Node rq;
        rq.op = OpKind::kRequantize;
        rq.name = out.tensors[in].name + ".rq." + n.name;
        rq.inputs = {in};
        out.tensors.push_back({rq.name, out.tensors[in].shape});
        tq.push_back(tq[n.output]);
        rq.output = static_cast<int>(out.tensors.size()) - 1;
        in = rq.output;
        out.nodes.push_back(rq);
      }
      out.nodes.push_back(cat);
    } else {
      out.nodes.push_back(n);
    }
  }

  exe.program = std::move(out);
  exe.tensor_qparams = std::move(tq);
  exe.convs.resize(exe.program.nodes.size());
  exe.luts.resize(exe.program.nodes.size());
  for (size_t i = 0; i < exe.program.nodes.size(); ++i) {
    const Node& n = exe.program.nodes[i];
    if (n.op == OpKind::kConv) {
      const QuantConv& qc = w.quant.at(n.name);
      ConvDesc d;
      d.geom = n.conv;
      d.weights = qc.weights;
      d.bias = qc.bias;
      d.weight_qparams = qc.weight_qparams;
      d.output_qparams = exe.tensor_qparams[n.output];
      d.validate();
      exe.convs[i] = std::move(d);
    } else if (n.op == OpKind::kAct) {
      exe.luts[i] = make_act_lut(n.act, exe.tensor_qparams[n.inputs.front()],
                                 exe.tensor_qparams[n.output]);
    }
  }
  return exe;
}

QuantTensor run_node(const QuantExecutable& exe, size_t i,
                     const std::vector<QuantTensor>& values) {
  const Node& n = exe.program.nodes[i];
  const QuantTensor& x = values[n.inputs.front()];
  const QParams& out_q = exe.tensor_qparams[n.output];
  switch (n.op) {
    case OpKind::kConv:
      return conv2d_q(x, *exe.convs[i]);
    case OpKind::kAct:
      return apply_lut(x, exe.luts[i], out_q);
    case OpKind::kMaxPool:
      return maxpool2d(x, n.kernel, n.stride, n.pad);
    case OpKind::kUpsample:
      return upsample_nearest(x, n.factor);
    case OpKind::kConcat: {
      std::vector<const QuantTensor*> parts;
      for (int t : n.inputs) parts.push_back(&values[t]);
      return concat_channels(parts);
    }
    case OpKind::kSlice:
      return slice_channels(x, n.c0, n.c1);
    case OpKind::kAdd:
      return add_q(x, values[n.inputs[1]], out_q);
    case OpKind::kRequantize:
      return requantize(x, out_q);
  }
  throw Error("unknown op");
}

std::vector<QuantTensor> forward(const QuantExecutable& exe,
                                 const QuantTensor& input,
                                 std::vector<QuantTensor>* dump) {
  const Program& p = exe.program;
  if (!(input.shape == p.tensors[p.input].shape)) {
    throw ShapeError("network input must be " + p.tensors[p.input].shape.str() +
                     ", got " + input.shape.str());
  }
  if (!(input.qparams == exe.input_qparams())) {
    throw QuantError("input tensor qparams differ from the model's input qparams");
  }
  std::vector<QuantTensor> values(p.tensors.size());
  values[p.input] = input;
  for (size_t i = 0; i < p.nodes.size(); ++i) {
    values[p.nodes[i].output] = run_node(exe, i, values);
  }
  std::vector<QuantTensor> outs;
  for (int t : p.outputs) outs.push_back(values[t]);
  if (dump) *dump = std::move(values);
  return outs;
}

}  // namespace tyrt
