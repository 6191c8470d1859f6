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
/// \brief Integer kernels (and the float path used for calibration).
///
/// The OpenMP kernels parallelize over output channels or rows. Each has a
/// serial `_ref` twin in kernels_ref.cpp that tests compare against
/// bit-for-bit; the benchmark target times the two side by side.

#ifndef TYRT_KERNELS_HPP
#define TYRT_KERNELS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tyrt/tensor.hpp"

namespace tyrt {

/// Half-open output box [y0,y1) x [x0,x1) x channels [c0,c1).
struct Region {
  int y0 = 0, y1 = 0;
  int x0 = 0, x1 = 0;
  int c0 = 0, c1 = 0;

  int64_t volume() const {
    return static_cast<int64_t>(y1 - y0) * (x1 - x0) * (c1 - c0);
  }
  bool operator==(const Region&) const = default;
  static Region full(const Shape& s) { return {0, s.h, 0, s.w, 0, s.c}; }
};

struct ConvGeometry {
  int in_channels = 0;
  int out_channels = 0;
  int kh = 1, kw = 1;
  int sh = 1, sw = 1;
  int ph = 0, pw = 0;

  /// Output extents for an input of h x w; throws ShapeError when < 1.
  std::pair<int, int> output_hw(int h, int w) const;
  int64_t weight_count() const {
    return static_cast<int64_t>(out_channels) * in_channels * kh * kw;
  }
};

struct ConvDesc {
  ConvGeometry geom;
  std::vector<int8_t> weights;  // OIHW
  std::vector<int32_t> bias;
  QParams weight_qparams;
  QParams output_qparams;

  void validate() const;
};

// Convolution ---------------------------------------------------------------

QuantTensor conv2d_q(const QuantTensor& input, const ConvDesc& desc);
QuantTensor conv2d_q_ref(const QuantTensor& input, const ConvDesc& desc);

/// Float convolution used by calibration; weights OIHW.
FloatTensor conv2d_f(const FloatTensor& input, const ConvGeometry& geom,
                     std::span<const float> weights,
                     std::span<const float> bias);

/// Requantize an int32 accumulator: clamp(round(acc * multiplier) + zp).
inline int8_t requantize_acc(int32_t acc, double multiplier, int32_t zp) {
  return saturate_int8(round_half_away(acc * multiplier) + zp);
}

// Activations ---------------------------------------------------------------

enum class ActKind : uint8_t { kSiLU = 0, kLeakyReLU = 1 };

double activation(ActKind kind, double x);
const char* act_name(ActKind kind);

using ActLut = std::array<int8_t, 256>;

/// Table indexed by (code + 128).
ActLut make_act_lut(ActKind kind, const QParams& in, const QParams& out);

QuantTensor apply_lut(const QuantTensor& t, const ActLut& lut,
                      const QParams& out_q);
QuantTensor act_q(const QuantTensor& t, ActKind kind, const QParams& out_q);
FloatTensor act_f(const FloatTensor& t, ActKind kind);

// Data movement -------------------------------------------------------------

QuantTensor maxpool2d(const QuantTensor& t, int kernel, int stride,
                      int pad = 0);
QuantTensor maxpool2d_ref(const QuantTensor& t, int kernel, int stride,
                          int pad = 0);
FloatTensor maxpool2d_f(const FloatTensor& t, int kernel, int stride,
                        int pad = 0);

QuantTensor upsample_nearest(const QuantTensor& t, int factor);
FloatTensor upsample_nearest_f(const FloatTensor& t, int factor);

/// Throws QuantError on a qparams mismatch; callers requantize first.
QuantTensor concat_channels(const QuantTensor& a, const QuantTensor& b);
QuantTensor concat_channels(const std::vector<const QuantTensor*>& parts);
FloatTensor concat_channels_f(const std::vector<const FloatTensor*>& parts);

QuantTensor slice_channels(const QuantTensor& t, int c0, int c1);
FloatTensor slice_channels_f(const FloatTensor& t, int c0, int c1);

/// Elementwise sum of two real values, requantized to out_q.
QuantTensor add_q(const QuantTensor& a, const QuantTensor& b,
                  const QParams& out_q);
FloatTensor add_f(const FloatTensor& a, const FloatTensor& b);

QuantTensor requantize(const QuantTensor& t, const QParams& out_q);

// Region kernels: write `r` of `out` from full-size inputs. Used by tiled
// execution for the element-wise and data-movement ops.

void apply_lut_region(const QuantTensor& in, const ActLut& lut,
                      QuantTensor& out, const Region& r);
void upsample_region(const QuantTensor& in, int factor, QuantTensor& out,
                     const Region& r);
void concat_region(const std::vector<const QuantTensor*>& parts,
                   QuantTensor& out, const Region& r);
void slice_region(const QuantTensor& in, int c0, QuantTensor& out,
                  const Region& r);
void add_region(const QuantTensor& a, const QuantTensor& b, QuantTensor& out,
                const Region& r);
void requantize_region(const QuantTensor& in, QuantTensor& out,
                       const Region& r);

}  // namespace tyrt

#endif  // TYRT_KERNELS_HPP
