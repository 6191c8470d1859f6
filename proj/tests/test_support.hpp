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

// Shared fixtures for the unit tests.

#ifndef TYRT_TEST_SUPPORT_HPP
#define TYRT_TEST_SUPPORT_HPP

#include <random>

#include "tyrt/graph.hpp"
#include "tyrt/program.hpp"
#include "tyrt/tensor.hpp"

namespace tyrt::testing {

inline QParams random_qparams(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale(0.005, 0.1);
  std::uniform_int_distribution<int> zp(-40, 40);
  return {scale(rng), zp(rng)};
}

inline QuantTensor random_qtensor(std::mt19937_64& rng, Shape s, QParams q) {
  QuantTensor t(s, q);
  std::uniform_int_distribution<int> code(-128, 127);
  for (int8_t& v : t.data) v = static_cast<int8_t>(code(rng));
  return t;
}

inline FloatTensor random_ftensor(std::mt19937_64& rng, Shape s, float lo, float hi) {
  FloatTensor t(s);
  std::uniform_real_distribution<float> d(lo, hi);
  for (float& v : t.data) v = d(rng);
  return t;
}

/// input -> conv3x3 -> conv3x3 -> v8-style detect head at one scale.
inline GraphSpec toy_graph(int channels = 8, int classes = 2, int resolution = 16,
                           int hidden = 8) {
  GraphSpec g;
  g.version = Version::kV8;
  g.num_classes = classes;
  g.input_resolution = resolution;
  LayerSpec in;
  in.name = "in";
  in.kind = LayerKind::kInput;
  in.out_channels = 3;
  LayerSpec c1;
  c1.name = "c1";
  c1.kind = LayerKind::kConv;
  c1.inputs = {"in"};
  c1.out_channels = channels;
  c1.kernel = 3;
  c1.padding = 1;
  LayerSpec c2 = c1;
  c2.name = "c2";
  c2.inputs = {"c1"};
  LayerSpec head;
  head.name = "head";
  head.kind = LayerKind::kDetectV8;
  head.inputs = {"c2"};
  head.box_hidden = hidden;
  head.cls_hidden = hidden;
  g.layers = {in, c1, c2, head};
  g.resolve();
  return g;
}

/// Float master weights drawn uniformly from [lo, hi] for every conv.
inline WeightStore uniform_weights(const GraphSpec& g, uint64_t seed, float lo, float hi) {
  WeightStore w = random_weights(g, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  for (auto& [name, cw] : w.master) {
    for (float& v : cw.weights) v = d(rng);
    for (float& v : cw.bias) v = d(rng);
  }
  return w;
}

}  // namespace tyrt::testing

#endif  // TYRT_TEST_SUPPORT_HPP
