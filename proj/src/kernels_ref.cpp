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

// Serial reference kernels. Straight loop nests in the textbook order, no
// OpenMP; the parallel kernels must match these bit for bit.

#include <algorithm>

#include "tyrt/kernels.hpp"

namespace tyrt {

QuantTensor conv2d_q_ref(const QuantTensor& input, const ConvDesc& desc) {
  desc.validate();
  input.validate();
  const ConvGeometry& g = desc.geom;
  const Shape& is = input.shape;
  if (is.c != g.in_channels) {
    throw ShapeError("convolution expects " + std::to_string(g.in_channels) +
                     " input channels, got " + std::to_string(is.c));
  }
  const auto [ho, wo] = g.output_hw(is.h, is.w);
  QuantTensor out({is.n, g.out_channels, ho, wo}, desc.output_qparams);
  const double multiplier = input.qparams.scale * desc.weight_qparams.scale /
                            desc.output_qparams.scale;
  const int32_t zp_x = input.qparams.zero_point;
  const int32_t zp_w = desc.weight_qparams.zero_point;

  for (int n = 0; n < is.n; ++n) {
    for (int oc = 0; oc < g.out_channels; ++oc) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          int32_t acc = desc.bias[oc];
          for (int ic = 0; ic < g.in_channels; ++ic) {
            for (int ky = 0; ky < g.kh; ++ky) {
              const int iy = oy * g.sh - g.ph + ky;
              if (iy < 0 || iy >= is.h) continue;
              for (int kx = 0; kx < g.kw; ++kx) {
                const int ix = ox * g.sw - g.pw + kx;
                if (ix < 0 || ix >= is.w) continue;
                const int32_t x = input.at(n, ic, iy, ix) - zp_x;
                const int32_t w =
                    desc.weights[((static_cast<size_t>(oc) * g.in_channels + ic) *
                                      g.kh + ky) * g.kw + kx] - zp_w;
                acc += x * w;
              }
            }
          }
          out.at(n, oc, oy, ox) = requantize_acc(
              acc, multiplier, desc.output_qparams.zero_point);
        }
      }
    }
  }
  return out;
}

QuantTensor maxpool2d_ref(const QuantTensor& t, int kernel, int stride,
                          int pad) {
  if (kernel <= 0 || stride <= 0 || pad < 0 || pad * 2 > kernel ||
      t.shape.h + 2 * pad < kernel || t.shape.w + 2 * pad < kernel) {
    throw ShapeError("invalid max-pool parameters");
  }
  const Shape& s = t.shape;
  const int ho = (s.h + 2 * pad - kernel) / stride + 1;
  const int wo = (s.w + 2 * pad - kernel) / stride + 1;
  QuantTensor out({s.n, s.c, ho, wo}, t.qparams);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          int m = -129;
          for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
              const int y = oy * stride - pad + ky;
              const int x = ox * stride - pad + kx;
              if (y < 0 || y >= s.h || x < 0 || x >= s.w) continue;
              m = std::max<int>(m, t.at(n, c, y, x));
            }
          }
          out.at(n, c, oy, ox) = static_cast<int8_t>(m);
        }
      }
    }
  }
  return out;
}

}  // namespace tyrt
