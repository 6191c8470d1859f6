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
/// \brief Primitive-op programs, weight storage and the two executors.

#ifndef TYRT_PROGRAM_HPP
#define TYRT_PROGRAM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tyrt/graph.hpp"
#include "tyrt/kernels.hpp"

namespace tyrt {

enum class OpKind : uint8_t {
  kConv,
  kAct,
  kMaxPool,
  kUpsample,
  kConcat,
  kSlice,
  kAdd,
  kRequantize,
};

const char* op_name(OpKind k);

struct TensorInfo {
  std::string name;
  Shape shape;
};

enum class HeadRole : uint8_t { kNone, kBoxPred, kClsPred };

struct Node {
  OpKind op = OpKind::kConv;
  HeadRole role = HeadRole::kNone;
  std::string name;
  std::vector<int> inputs;  // tensor ids
  int output = -1;          // tensor id

  ConvGeometry conv;        // kConv
  ActKind act = ActKind::kSiLU;
  int kernel = 1, stride = 1, pad = 0;  // kMaxPool
  int factor = 1;           // kUpsample
  int c0 = 0, c1 = 0;       // kSlice

  int64_t macs(const std::vector<TensorInfo>& tensors) const;
};

/// Nodes are stored in a valid execution order.
struct Program {
  std::vector<TensorInfo> tensors;
  std::vector<Node> nodes;
  int input = -1;
  std::vector<int> outputs;  // one per detection scale

  int find_tensor(const std::string& name) const;  // -1 when absent
  int64_t count_params() const;
  int64_t count_macs() const;
};

Program lower(const GraphSpec& g);

struct ConvWeights {
  std::vector<float> weights;  // OIHW
  std::vector<float> bias;
};

struct QuantConv {
  std::vector<int8_t> weights;
  std::vector<int32_t> bias;
  QParams weight_qparams;
};

/// Float master copy plus (after calibration) the int8 weights and the
/// activation qparams of every program tensor.
struct WeightStore {
  std::map<std::string, ConvWeights> master;
  std::map<std::string, QuantConv> quant;
  std::map<std::string, QParams> activations;

  bool has_master() const { return !master.empty(); }
  bool quantized() const { return !quant.empty(); }
  /// Every conv node has exactly one entry of each present kind, with the
  /// right array lengths. Throws Error on violation.
  void validate(const Program& p) const;
};

class MissingWeights : public Error {
 public:
  using Error::Error;
};

/// Deterministic uniform init scaled by fan-in; detect-head prediction
/// biases follow the usual YOLO prior so random networks stay quiet.
WeightStore random_weights(const GraphSpec& g, uint64_t seed);

/// Runs the float program. When `dump` is set, every tensor is kept there,
/// indexed by tensor id.
std::vector<FloatTensor> forward_float(const Program& p, const WeightStore& w,
                                       const FloatTensor& input,
                                       std::vector<FloatTensor>* dump = nullptr);

/// A program specialised for int8 execution: requantize nodes inserted in
/// front of concats whose inputs disagree on qparams, conv descriptors and
/// activation tables materialised.
struct QuantExecutable {
  GraphSpec graph;
  Program program;
  std::vector<QParams> tensor_qparams;        // by tensor id
  std::vector<std::optional<ConvDesc>> convs; // by node index
  std::vector<ActLut> luts;                   // by node index (kAct only)

  const QParams& input_qparams() const {
    return tensor_qparams[program.input];
  }
};

QuantExecutable compile(const GraphSpec& g, const WeightStore& w);

std::vector<QuantTensor> forward(const QuantExecutable& exe,
                                 const QuantTensor& input,
                                 std::vector<QuantTensor>* dump = nullptr);

/// Executes one node untiled; shared by forward() and the tiled executor.
QuantTensor run_node(const QuantExecutable& exe, size_t node_index,
                     const std::vector<QuantTensor>& values);

}  // namespace tyrt

#endif  // TYRT_PROGRAM_HPP
