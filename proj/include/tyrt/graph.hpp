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
/// \brief Layer-graph descriptions of the tiny YOLO detector variants.
///
/// A GraphSpec is the block-level description (conv, C3, C2f, detect, ...).
/// `lower()` expands it into a Program of primitive ops that the float and
/// int8 executors, the quantizer and the tiling planner all share.

#ifndef TYRT_GRAPH_HPP
#define TYRT_GRAPH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tyrt/kernels.hpp"
#include "tyrt/tensor.hpp"

namespace tyrt {

enum class Version : uint8_t { kV1_3 = 0, kV5 = 1, kV8 = 2, kV10 = 3 };
enum class SizeClass : uint8_t { kSmall = 0, kBig = 1 };

const char* version_name(Version v);
const char* size_name(SizeClass s);
Version parse_version(const std::string& s);
SizeClass parse_size(const std::string& s);

enum class LayerKind : uint8_t {
  kInput = 0,
  kConv = 1,
  kC3 = 2,
  kC2f = 3,
  kDetectV8 = 4,
  kDetectV10 = 5,
  kMaxPool = 6,
  kUpsample = 7,
  kConcat = 8,
};

const char* layer_kind_name(LayerKind k);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  std::vector<std::string> inputs;

  int out_channels = 0;  // conv / c3 / c2f; channel count for the input node
  int kernel = 1;        // conv / maxpool
  int stride = 1;        // conv / maxpool
  int padding = 0;       // conv / maxpool
  int repeats = 1;       // bottlenecks inside c3 / c2f
  bool shortcut = false; // residual add inside the bottlenecks
  bool act = true;       // conv followed by the graph activation
  int factor = 2;        // upsample
  int box_hidden = 0;    // detect
  int cls_hidden = 0;    // detect

  /// Resolved by GraphSpec::resolve(); one entry per output (detect: one per
  /// scale).
  std::vector<Shape> out_shapes;
};

struct GraphSpec {
  Version version = Version::kV8;
  SizeClass size = SizeClass::kSmall;
  double width_multiple = 1.0;
  double depth_multiple = 1.0;
  int max_channels = 1024;
  int num_classes = 20;
  int input_resolution = 256;
  ActKind activation = ActKind::kSiLU;
  std::vector<LayerSpec> layers;

  /// Checks acyclicity (inputs must name earlier layers), a single input
  /// node, a detect head, and propagates shapes. Throws ShapeError.
  void resolve();

  const LayerSpec& layer(const std::string& name) const;
  const LayerSpec& head() const;
  /// Stride of each detect output relative to the input.
  std::vector<int> head_strides() const;
  bool nms_free() const { return version == Version::kV10; }
  int total_stride() const;
  std::string label() const;
};

/// Builds and resolves a variant. Throws ShapeError for a resolution that is
/// not a multiple of the total stride or for num_classes < 1.
GraphSpec build_graph(Version version, SizeClass size, int num_classes,
                      int input_resolution,
                      ActKind activation = ActKind::kSiLU);

/// Channel count after applying a width multiple: nearest multiple of 8,
/// never below 8.
int scale_channels(int base, double width_multiple, int max_channels);
/// Bottleneck repeats after applying a depth multiple (at least one).
int scale_depth(int base, double depth_multiple);

int64_t count_params(const GraphSpec& g);
int64_t count_macs(const GraphSpec& g);

}  // namespace tyrt

#endif  // TYRT_GRAPH_HPP
