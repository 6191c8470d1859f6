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
/// \brief Post-training min/max calibration.

#ifndef TYRT_QUANTIZER_HPP
#define TYRT_QUANTIZER_HPP

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tyrt/program.hpp"

namespace tyrt {

/// Running range of one tensor. Merging is associative and commutative.
struct CalibStats {
  float min = 0.0f;
  float max = 0.0f;
  int64_t samples = 0;

  void observe(const FloatTensor& t);
  void merge(const CalibStats& other);
};

/// Affine fit of [min, max] onto the 256 int8 codes. The range is widened
/// to contain 0 so zero padding stays exact; an empty range falls back to
/// scale 1/255.
QParams qparams_from_range(float min, float max);

/// Symmetric per-tensor weight quantization (zero point 0, codes in
/// [-127, 127]).
QParams weight_qparams(const std::vector<float>& w);

/// Per-tensor stats over a calibration set, indexed by tensor name.
std::map<std::string, CalibStats> collect_stats(
    const Program& p, const WeightStore& w,
    const std::vector<FloatTensor>& images);

/// Runs calibration and returns activation qparams for every program
/// tensor. Throws QuantError on an empty image set or missing master
/// weights.
std::map<std::string, QParams> calibrate(const GraphSpec& g,
                                         const WeightStore& w,
                                         const std::vector<FloatTensor>& images);

/// Quantizes the master weights against `activations` and returns a store
/// holding both copies.
WeightStore quantize_weights(const GraphSpec& g, const WeightStore& w,
                             const std::map<std::string, QParams>& activations);

/// calibrate + quantize_weights.
WeightStore quantize_model(const GraphSpec& g, const WeightStore& w,
                           const std::vector<FloatTensor>& images);

struct TensorError {
  std::string name;
  double max_abs = 0.0;
  double rmse = 0.0;
  double scale = 0.0;  // quantization step of the int8 tensor
};

/// Float forward vs dequantized int8 forward, per program tensor (in
/// execution order), accumulated over all images.
std::vector<TensorError> quant_error(const GraphSpec& g, const WeightStore& w,
                                     const std::vector<FloatTensor>& images);

void write_calibration_report(std::ostream& os, const GraphSpec& g,
                              const WeightStore& w,
                              const std::vector<TensorError>& errors);

}  // namespace tyrt

#endif  // TYRT_QUANTIZER_HPP
