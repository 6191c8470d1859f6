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
/// \brief Affine-quantized int8 tensors and their float counterparts.

#ifndef TYRT_TENSOR_HPP
#define TYRT_TENSOR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tyrt {

/// Base class for every error the runtime reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes or channel counts that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid quantization parameters or non-representable input.
class QuantError : public Error {
 public:
  using Error::Error;
};

/// Affine map real = (code - zero_point) * scale, per tensor.
struct QParams {
  double scale = 1.0;
  int32_t zero_point = 0;

  void validate() const;
  bool operator==(const QParams&) const = default;
};

/// NCHW extents.
struct Shape {
  int n = 1;
  int c = 0;
  int h = 0;
  int w = 0;

  int64_t numel() const {
    return static_cast<int64_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

template <typename T>
struct BasicTensor {
  Shape shape;
  std::vector<T> data;

  BasicTensor() = default;
  explicit BasicTensor(Shape s, T fill = T{})
      : shape(s), data(static_cast<size_t>(s.numel()), fill) {}

  size_t index(int n, int c, int y, int x) const {
    return ((static_cast<size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x;
  }
  T& at(int n, int c, int y, int x) { return data[index(n, c, y, x)]; }
  const T& at(int n, int c, int y, int x) const {
    return data[index(n, c, y, x)];
  }
};

using FloatTensor = BasicTensor<float>;

struct QuantTensor : BasicTensor<int8_t> {
  QParams qparams;

  QuantTensor() = default;
  QuantTensor(Shape s, QParams q)
      : BasicTensor<int8_t>(s, static_cast<int8_t>(q.zero_point)), qparams(q) {}

  /// Throws ShapeError when data length disagrees with shape.
  void validate() const;
};

/// Round half away from zero, the single rounding mode used everywhere.
double round_half_away(double v);

int8_t saturate_int8(double v);

/// Quantize one real value; assumes q is valid and v finite.
int8_t quantize_value(double v, const QParams& q);
double dequantize_value(int8_t code, const QParams& q);

/// Elementwise quantization; throws QuantError naming the first non-finite
/// element.
QuantTensor quantize(const FloatTensor& x, const QParams& q);
FloatTensor dequantize(const QuantTensor& t);

}  // namespace tyrt

#endif  // TYRT_TENSOR_HPP
