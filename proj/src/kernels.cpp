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

#include "tyrt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tyrt {

namespace {

// First output index whose input tap (o*stride - pad + k) is >= 0, and one
// past the last whose tap is < extent.
inline int first_valid(int pad, int k, int stride) {
  const int need = pad - k;
  return need > 0 ? (need + stride - 1) / stride : 0;
}

inline int end_valid(int extent, int pad, int k, int stride, int out) {
  const int last = extent - 1 + pad - k;
  if (last < 0) return 0;
  return std::min(out, last / stride + 1);
}

void check_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (!(a == b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.str() +
                     " vs " + b.str());
  }
}

}  // namespace

std::pair<int, int> ConvGeometry::output_hw(int h, int w) const {
  const int ho = (h + 2 * ph - kh) / sh + 1;
  const int wo = (w + 2 * pw - kw) / sw + 1;
  if (h + 2 * ph - kh < 0 || w + 2 * pw - kw < 0 || ho < 1 || wo < 1) {
    throw ShapeError("convolution output would be empty for input " +
                     std::to_string(h) + "x" + std::to_string(w));
  }
  return {ho, wo};
}

void ConvDesc::validate() const {
  if (geom.in_channels <= 0 || geom.out_channels <= 0 || geom.kh <= 0 ||
      geom.kw <= 0 || geom.sh <= 0 || geom.sw <= 0 || geom.ph < 0 ||
      geom.pw < 0) {
    throw ShapeError("invalid convolution geometry");
  }
  if (static_cast<int64_t>(weights.size()) != geom.weight_count()) {
    throw ShapeError("convolution expects " +
                     std::to_string(geom.weight_count()) + " weights, got " +
                     std::to_string(weights.size()));
  }
  if (static_cast<int>(bias.size()) != geom.out_channels) {
    throw ShapeError("convolution expects one bias per output channel");
  }
  weight_qparams.validate();
  output_qparams.validate();
}

QuantTensor conv2d_q(const QuantTensor& input, const ConvDesc& desc) {
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
  const int32_t zp_y = desc.output_qparams.zero_point;

  std::vector<int16_t> centered(input.data.size());
  for (size_t i = 0; i < centered.size(); ++i) {
    centered[i] = static_cast<int16_t>(input.data[i] - zp_x);
  }

  const size_t plane = static_cast<size_t>(is.h) * is.w;
  const size_t out_plane = static_cast<size_t>(ho) * wo;

  for (int n = 0; n < is.n; ++n) {
    const int16_t* xin = centered.data() + static_cast<size_t>(n) * is.c * plane;
#pragma omp parallel
    {
      std::vector<int32_t> acc(out_plane);
#pragma omp for schedule(static)
      for (int oc = 0; oc < g.out_channels; ++oc) {
        std::fill(acc.begin(), acc.end(), desc.bias[oc]);
        const int8_t* wbase = desc.weights.data() +
                              static_cast<size_t>(oc) * g.in_channels * g.kh * g.kw;
        for (int ic = 0; ic < g.in_channels; ++ic) {
          const int16_t* xplane = xin + static_cast<size_t>(ic) * plane;
          for (int ky = 0; ky < g.kh; ++ky) {
            for (int kx = 0; kx < g.kw; ++kx) {
              const int32_t wv =
                  static_cast<int32_t>(wbase[(ic * g.kh + ky) * g.kw + kx]) - zp_w;
              if (wv == 0) continue;
              const int ox_lo = first_valid(g.pw, kx, g.sw);
              const int ox_hi = end_valid(is.w, g.pw, kx, g.sw, wo);
              for (int oy = 0; oy < ho; ++oy) {
                const int iy = oy * g.sh - g.ph + ky;
                if (iy < 0 || iy >= is.h) continue;
                const int16_t* row = xplane + static_cast<size_t>(iy) * is.w;
                int32_t* arow = acc.data() + static_cast<size_t>(oy) * wo;
                if (g.sw == 1) {
                  const int shift = kx - g.pw;
                  for (int ox = ox_lo; ox < ox_hi; ++ox) {
                    arow[ox] += wv * row[ox + shift];
                  }
                } else {
                  for (int ox = ox_lo; ox < ox_hi; ++ox) {
                    arow[ox] += wv * row[ox * g.sw - g.pw + kx];
                  }
                }
              }
            }
          }
        }
        int8_t* dst = out.data.data() +
                      (static_cast<size_t>(n) * g.out_channels + oc) * out_plane;
        for (size_t i = 0; i < out_plane; ++i) {
          dst[i] = requantize_acc(acc[i], multiplier, zp_y);
        }
      }
    }
  }
  return out;
}

FloatTensor conv2d_f(const FloatTensor& input, const ConvGeometry& g,
                     std::span<const float> weights,
                     std::span<const float> bias) {
  const Shape& is = input.shape;
  if (is.c != g.in_channels) {
    throw ShapeError("convolution expects " + std::to_string(g.in_channels) +
                     " input channels, got " + std::to_string(is.c));
  }
  if (static_cast<int64_t>(weights.size()) != g.weight_count() ||
      static_cast<int>(bias.size()) != g.out_channels) {
    throw ShapeError("float convolution weight/bias size mismatch");
  }
  const auto [ho, wo] = g.output_hw(is.h, is.w);
  FloatTensor out({is.n, g.out_channels, ho, wo});
  const size_t plane = static_cast<size_t>(is.h) * is.w;
  const size_t out_plane = static_cast<size_t>(ho) * wo;

  for (int n = 0; n < is.n; ++n) {
    const float* xin = input.data.data() + static_cast<size_t>(n) * is.c * plane;
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < g.out_channels; ++oc) {
      float* acc = out.data.data() +
                   (static_cast<size_t>(n) * g.out_channels + oc) * out_plane;
      std::fill(acc, acc + out_plane, bias[oc]);
      const float* wbase =
          weights.data() + static_cast<size_t>(oc) * g.in_channels * g.kh * g.kw;
      for (int ic = 0; ic < g.in_channels; ++ic) {
        const float* xplane = xin + static_cast<size_t>(ic) * plane;
        for (int ky = 0; ky < g.kh; ++ky) {
          for (int kx = 0; kx < g.kw; ++kx) {
            const float wv = wbase[(ic * g.kh + ky) * g.kw + kx];
            const int ox_lo = first_valid(g.pw, kx, g.sw);
            const int ox_hi = end_valid(is.w, g.pw, kx, g.sw, wo);
            for (int oy = 0; oy < ho; ++oy) {
              const int iy = oy * g.sh - g.ph + ky;
              if (iy < 0 || iy >= is.h) continue;
              const float* row = xplane + static_cast<size_t>(iy) * is.w;
              float* arow = acc + static_cast<size_t>(oy) * wo;
              for (int ox = ox_lo; ox < ox_hi; ++ox) {
                arow[ox] += wv * row[ox * g.sw - g.pw + kx];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

// Activations ---------------------------------------------------------------

double activation(ActKind kind, double x) {
  switch (kind) {
    case ActKind::kSiLU:
      return x / (1.0 + std::exp(-x));
    case ActKind::kLeakyReLU:
      return x >= 0.0 ? x : 0.1 * x;
  }
  return x;
}

const char* act_name(ActKind kind) {
  return kind == ActKind::kSiLU ? "silu" : "leaky_relu";
}

ActLut make_act_lut(ActKind kind, const QParams& in, const QParams& out) {
  in.validate();
  out.validate();
  ActLut lut{};
  for (int code = -128; code <= 127; ++code) {
    const double x = dequantize_value(static_cast<int8_t>(code), in);
    lut[code + 128] = quantize_value(activation(kind, x), out);
  }
  return lut;
}

void apply_lut_region(const QuantTensor& in, const ActLut& lut,
                      QuantTensor& out, const Region& r) {
  for (int n = 0; n < in.shape.n; ++n) {
#pragma omp parallel for schedule(static)
    for (int c = r.c0; c < r.c1; ++c) {
      for (int y = r.y0; y < r.y1; ++y) {
        const int8_t* src = &in.at(n, c, y, 0);
        int8_t* dst = &out.at(n, c, y, 0);
        for (int x = r.x0; x < r.x1; ++x) dst[x] = lut[src[x] + 128];
      }
    }
  }
}

QuantTensor apply_lut(const QuantTensor& t, const ActLut& lut,
                      const QParams& out_q) {
  QuantTensor out(t.shape, out_q);
  apply_lut_region(t, lut, out, Region::full(t.shape));
  return out;
}

QuantTensor act_q(const QuantTensor& t, ActKind kind, const QParams& out_q) {
  return apply_lut(t, make_act_lut(kind, t.qparams, out_q), out_q);
}

FloatTensor act_f(const FloatTensor& t, ActKind kind) {
  FloatTensor out(t.shape);
  for (size_t i = 0; i < t.data.size(); ++i) {
    out.data[i] = static_cast<float>(activation(kind, t.data[i]));
  }
  return out;
}

// Pooling -------------------------------------------------------------------

namespace {

template <typename T>
BasicTensor<T> maxpool_impl(const BasicTensor<T>& t, int kernel, int stride,
                            int pad) {
  if (kernel <= 0 || stride <= 0 || pad < 0 || pad * 2 > kernel) {
    throw ShapeError("invalid max-pool parameters");
  }
  const Shape& s = t.shape;
  const int ho = (s.h + 2 * pad - kernel) / stride + 1;
  const int wo = (s.w + 2 * pad - kernel) / stride + 1;
  if (s.h + 2 * pad < kernel || s.w + 2 * pad < kernel) {
    throw ShapeError("max-pool window larger than input " + s.str());
  }
  BasicTensor<T> out({s.n, s.c, ho, wo});
  const int nc = s.n * s.c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < nc; ++p) {
    const int n = p / s.c;
    const int c = p % s.c;
    for (int oy = 0; oy < ho; ++oy) {
      const int y_lo = std::max(0, oy * stride - pad);
      const int y_hi = std::min(s.h, oy * stride - pad + kernel);
      for (int ox = 0; ox < wo; ++ox) {
        const int x_lo = std::max(0, ox * stride - pad);
        const int x_hi = std::min(s.w, ox * stride - pad + kernel);
        T m = std::numeric_limits<T>::lowest();
        for (int y = y_lo; y < y_hi; ++y) {
          for (int x = x_lo; x < x_hi; ++x) m = std::max(m, t.at(n, c, y, x));
        }
        out.at(n, c, oy, ox) = m;
      }
    }
  }
  return out;
}

}  // namespace

QuantTensor maxpool2d(const QuantTensor& t, int kernel, int stride, int pad) {
  QuantTensor out;
  static_cast<BasicTensor<int8_t>&>(out) = maxpool_impl(
      static_cast<const BasicTensor<int8_t>&>(t), kernel, stride, pad);
  out.qparams = t.qparams;
  return out;
}

FloatTensor maxpool2d_f(const FloatTensor& t, int kernel, int stride, int pad) {
  return maxpool_impl(t, kernel, stride, pad);
}

// Upsample ------------------------------------------------------------------

void upsample_region(const QuantTensor& in, int factor, QuantTensor& out,
                     const Region& r) {
  for (int n = 0; n < in.shape.n; ++n) {
    for (int c = r.c0; c < r.c1; ++c) {
      for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
          out.at(n, c, y, x) = in.at(n, c, y / factor, x / factor);
        }
      }
    }
  }
}

QuantTensor upsample_nearest(const QuantTensor& t, int factor) {
  if (factor <= 0) throw ShapeError("upsample factor must be positive");
  QuantTensor out({t.shape.n, t.shape.c, t.shape.h * factor, t.shape.w * factor},
                  t.qparams);
  upsample_region(t, factor, out, Region::full(out.shape));
  return out;
}

FloatTensor upsample_nearest_f(const FloatTensor& t, int factor) {
  if (factor <= 0) throw ShapeError("upsample factor must be positive");
  FloatTensor out({t.shape.n, t.shape.c, t.shape.h * factor, t.shape.w * factor});
  for (int n = 0; n < t.shape.n; ++n)
    for (int c = 0; c < t.shape.c; ++c)
      for (int y = 0; y < out.shape.h; ++y)
        for (int x = 0; x < out.shape.w; ++x)
          out.at(n, c, y, x) = t.at(n, c, y / factor, x / factor);
  return out;
}

// Concat / slice ------------------------------------------------------------

namespace {

template <typename T>
Shape concat_shape(const std::vector<const T*>& parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Shape s = parts.front()->shape;
  s.c = 0;
  for (const T* p : parts) {
    if (p->shape.n != s.n || p->shape.h != s.h || p->shape.w != s.w) {
      throw ShapeError("concat needs equal N, H, W: " + p->shape.str() +
                       " vs " + parts.front()->shape.str());
    }
    s.c += p->shape.c;
  }
  return s;
}

}  // namespace

void concat_region(const std::vector<const QuantTensor*>& parts,
                   QuantTensor& out, const Region& r) {
  int base = 0;
  for (const QuantTensor* p : parts) {
    const int lo = std::max(r.c0, base);
    const int hi = std::min(r.c1, base + p->shape.c);
    for (int n = 0; n < out.shape.n; ++n) {
      for (int c = lo; c < hi; ++c) {
        for (int y = r.y0; y < r.y1; ++y) {
          const int8_t* src = &p->at(n, c - base, y, 0);
          int8_t* dst = &out.at(n, c, y, 0);
          std::copy(src + r.x0, src + r.x1, dst + r.x0);
        }
      }
    }
    base += p->shape.c;
  }
}

QuantTensor concat_channels(const std::vector<const QuantTensor*>& parts) {
  const Shape s = concat_shape(parts);
  const QParams q = parts.front()->qparams;
  for (const QuantTensor* p : parts) {
    if (!(p->qparams == q)) {
      throw QuantError("concat inputs carry different qparams; requantize first");
    }
  }
  QuantTensor out(s, q);
  concat_region(parts, out, Region::full(s));
  return out;
}

QuantTensor concat_channels(const QuantTensor& a, const QuantTensor& b) {
  return concat_channels(std::vector<const QuantTensor*>{&a, &b});
}

FloatTensor concat_channels_f(const std::vector<const FloatTensor*>& parts) {
  const Shape s = concat_shape(parts);
  FloatTensor out(s);
  int base = 0;
  for (const FloatTensor* p : parts) {
    for (int n = 0; n < s.n; ++n) {
      const size_t count = static_cast<size_t>(p->shape.c) * s.h * s.w;
      std::copy_n(&p->at(n, 0, 0, 0), count, &out.at(n, base, 0, 0));
    }
    base += p->shape.c;
  }
  return out;
}

void slice_region(const QuantTensor& in, int c0, QuantTensor& out,
                  const Region& r) {
  for (int n = 0; n < out.shape.n; ++n) {
    for (int c = r.c0; c < r.c1; ++c) {
      for (int y = r.y0; y < r.y1; ++y) {
        const int8_t* src = &in.at(n, c + c0, y, 0);
        int8_t* dst = &out.at(n, c, y, 0);
        std::copy(src + r.x0, src + r.x1, dst + r.x0);
      }
    }
  }
}

QuantTensor slice_channels(const QuantTensor& t, int c0, int c1) {
  if (c0 < 0 || c1 > t.shape.c || c0 >= c1) {
    throw ShapeError("channel slice out of range");
  }
  QuantTensor out({t.shape.n, c1 - c0, t.shape.h, t.shape.w}, t.qparams);
  slice_region(t, c0, out, Region::full(out.shape));
  return out;
}

FloatTensor slice_channels_f(const FloatTensor& t, int c0, int c1) {
  if (c0 < 0 || c1 > t.shape.c || c0 >= c1) {
    throw ShapeError("channel slice out of range");
  }
  FloatTensor out({t.shape.n, c1 - c0, t.shape.h, t.shape.w});
  const size_t count = static_cast<size_t>(c1 - c0) * t.shape.h * t.shape.w;
  for (int n = 0; n < t.shape.n; ++n) {
    std::copy_n(&t.at(n, c0, 0, 0), count, &out.at(n, 0, 0, 0));
  }
  return out;
}

// Add / requantize ----------------------------------------------------------

void add_region(const QuantTensor& a, const QuantTensor& b, QuantTensor& out,
                const Region& r) {
  for (int n = 0; n < out.shape.n; ++n) {
    for (int c = r.c0; c < r.c1; ++c) {
      for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
          const double v = dequantize_value(a.at(n, c, y, x), a.qparams) +
                           dequantize_value(b.at(n, c, y, x), b.qparams);
          out.at(n, c, y, x) = quantize_value(v, out.qparams);
        }
      }
    }
  }
}

QuantTensor add_q(const QuantTensor& a, const QuantTensor& b,
                  const QParams& out_q) {
  check_same_shape(a.shape, b.shape, "add");
  out_q.validate();
  QuantTensor out(a.shape, out_q);
  add_region(a, b, out, Region::full(a.shape));
  return out;
}

FloatTensor add_f(const FloatTensor& a, const FloatTensor& b) {
  check_same_shape(a.shape, b.shape, "add");
  FloatTensor out(a.shape);
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  return out;
}

void requantize_region(const QuantTensor& in, QuantTensor& out,
                       const Region& r) {
  for (int n = 0; n < out.shape.n; ++n) {
    for (int c = r.c0; c < r.c1; ++c) {
      for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
          out.at(n, c, y, x) = quantize_value(
              dequantize_value(in.at(n, c, y, x), in.qparams), out.qparams);
        }
      }
    }
  }
}

QuantTensor requantize(const QuantTensor& t, const QParams& out_q) {
  out_q.validate();
  QuantTensor out(t.shape, out_q);
  requantize_region(t, out, Region::full(t.shape));
  return out;
}

}  // namespace tyrt
