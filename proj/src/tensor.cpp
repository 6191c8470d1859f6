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

#include "tyrt/tensor.hpp"

#include <cmath>
#include <sstream>

namespace tyrt {

void QParams::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw QuantError("quantization scale must be positive and finite, got " +
                     std::to_string(scale));
  }
  if (zero_point < -128 || zero_point > 127) {
    throw QuantError("zero point outside int8 range: " +
                     std::to_string(zero_point));
  }
}

std::string Shape::str() const {
  std::ostringstream os;
  os << n << "x" << c << "x" << h << "x" << w;
  return os.str();
}

void QuantTensor::validate() const {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0) {
    throw ShapeError("negative extent in shape " + shape.str());
  }
  if (static_cast<int64_t>(data.size()) != shape.numel()) {
    throw ShapeError("tensor holds " + std::to_string(data.size()) +
                     " values but shape " + shape.str() + " needs " +
                     std::to_string(shape.numel()));
  }
  qparams.validate();
}

double round_half_away(double v) { return std::round(v); }

int8_t saturate_int8(double v) {
  if (v <= -128.0) return -128;
  if (v >= 127.0) return 127;
  return static_cast<int8_t>(v);
}

int8_t quantize_value(double v, const QParams& q) {
  return saturate_int8(round_half_away(v / q.scale) + q.zero_point);
}

double dequantize_value(int8_t code, const QParams& q) {
  return (static_cast<int32_t>(code) - q.zero_point) * q.scale;
}

QuantTensor quantize(const FloatTensor& x, const QParams& q) {
  q.validate();
  QuantTensor out(x.shape, q);
  for (size_t i = 0; i < x.data.size(); ++i) {
    const double v = x.data[i];
    if (!std::isfinite(v)) {
      throw QuantError("non-finite input at element " + std::to_string(i));
    }
    out.data[i] = quantize_value(v, q);
  }
  return out;
}

FloatTensor dequantize(const QuantTensor& t) {
  FloatTensor out(t.shape);
  for (size_t i = 0; i < t.data.size(); ++i) {
    out.data[i] = static_cast<float>(dequantize_value(t.data[i], t.qparams));
  }
  return out;
}

}  // namespace tyrt
