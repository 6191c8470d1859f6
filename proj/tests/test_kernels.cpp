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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"
#include "tyrt/kernels.hpp"
#include "tyrt/tensor.hpp"

namespace tyrt {
namespace {

using testing::random_ftensor;
using testing::random_qparams;
using testing::random_qtensor;

// Quantize / dequantize ------------------------------------------------------

TEST(Quantize, Examples) {
  FloatTensor x(Shape{1, 1, 1, 1}, 1.0f);
  EXPECT_EQ(quantize(x, {0.5, 0}).data[0], 2);
  x.data[0] = 0.0f;
  EXPECT_EQ(quantize(x, {0.37, 5}).data[0], 5);
  x.data[0] = 1000.0f;
  EXPECT_EQ(quantize(x, {0.5, 0}).data[0], 127);
  x.data[0] = -1000.0f;
  EXPECT_EQ(quantize(x, {0.5, 0}).data[0], -128);
}

TEST(Quantize, RoundsHalfAwayFromZero) {
  EXPECT_EQ(round_half_away(2.5), 3.0);
  EXPECT_EQ(round_half_away(-2.5), -3.0);
  EXPECT_EQ(round_half_away(0.49), 0.0);
  EXPECT_EQ(quantize_value(0.25, {0.1, 0}), 3);
  EXPECT_EQ(quantize_value(-0.25, {0.1, 0}), -3);
}

TEST(Quantize, RejectsNonFiniteWithIndex) {
  FloatTensor x(Shape{1, 1, 1, 4}, 0.0f);
  x.data[2] = std::numeric_limits<float>::quiet_NaN();
  try {
    quantize(x, {0.1, 0});
    FAIL() << "expected QuantError";
  } catch (const QuantError& e) {
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos) << e.what();
  }
}

TEST(Quantize, RejectsBadQParams) {
  FloatTensor x(Shape{1, 1, 1, 1}, 0.0f);
  EXPECT_THROW(quantize(x, {0.0, 0}), QuantError);
  EXPECT_THROW(quantize(x, {0.1, 200}), QuantError);
}

TEST(Dequantize, Examples) {
  QuantTensor t(Shape{1, 1, 1, 1}, {0.5, 0});
  t.data[0] = 2;
  EXPECT_FLOAT_EQ(dequantize(t).data[0], 1.0f);
  t.qparams = {0.1, 5};
  t.data[0] = 5;
  EXPECT_FLOAT_EQ(dequantize(t).data[0], 0.0f);
}

TEST(Quantize, RoundTripWithinHalfStep) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const QParams q = random_qparams(rng);
    const double lo = (-128 - q.zero_point) * q.scale;
    const double hi = (127 - q.zero_point) * q.scale;
    std::uniform_real_distribution<double> d(lo, hi);
    for (int i = 0; i < 50; ++i) {
      const double x = d(rng);
      const double back = dequantize_value(quantize_value(x, q), q);
      EXPECT_LE(std::abs(back - x), q.scale / 2 + 1e-12);
    }
  }
}

// Convolution ----------------------------------------------------------------

ConvDesc random_conv(std::mt19937_64& rng, int cin, int cout, int k, int s, int p) {
  ConvDesc d;
  d.geom = {cin, cout, k, k, s, s, p, p};
  std::uniform_int_distribution<int> w(-127, 127);
  std::uniform_int_distribution<int> b(-2000, 2000);
  d.weights.resize(static_cast<size_t>(d.geom.weight_count()));
  for (int8_t& v : d.weights) v = static_cast<int8_t>(w(rng));
  d.bias.resize(static_cast<size_t>(cout));
  for (int32_t& v : d.bias) v = b(rng);
  d.weight_qparams = {std::uniform_real_distribution<double>(0.002, 0.02)(rng), 0};
  d.output_qparams = random_qparams(rng);
  return d;
}

/// Naive double-precision convolution on dequantized operands.
std::vector<double> conv_oracle(const QuantTensor& in, const ConvDesc& d, int& oh, int& ow) {
  const ConvGeometry& g = d.geom;
  oh = (in.shape.h + 2 * g.ph - g.kh) / g.sh + 1;
  ow = (in.shape.w + 2 * g.pw - g.kw) / g.sw + 1;
  std::vector<double> out(static_cast<size_t>(g.out_channels) * oh * ow);
  const double sx = in.qparams.scale, sw = d.weight_qparams.scale;
  for (int o = 0; o < g.out_channels; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = d.bias[o] * sx * sw;
        for (int i = 0; i < g.in_channels; ++i) {
          for (int ky = 0; ky < g.kh; ++ky) {
            for (int kx = 0; kx < g.kw; ++kx) {
              const int iy = y * g.sh - g.ph + ky, ix = x * g.sw - g.pw + kx;
              if (iy < 0 || ix < 0 || iy >= in.shape.h || ix >= in.shape.w) continue;
              const double xv = (in.at(0, i, iy, ix) - in.qparams.zero_point) * sx;
              const double wv =
                  d.weights[((static_cast<size_t>(o) * g.in_channels + i) * g.kh + ky) * g.kw + kx] * sw;
              acc += xv * wv;
            }
          }
        }
        out[(static_cast<size_t>(o) * oh + y) * ow + x] = acc;
      }
    }
  }
  return out;
}

TEST(Conv2d, ScalarExample) {
  QuantTensor in(Shape{1, 1, 1, 1}, {1.0, 0});
  in.data[0] = 3;
  ConvDesc d;
  d.geom = {1, 1, 1, 1, 1, 1, 0, 0};
  d.weights = {2};
  d.bias = {0};
  d.weight_qparams = {1.0, 0};
  d.output_qparams = {1.0, 0};
  EXPECT_EQ(conv2d_q(in, d).data[0], 6);
}

TEST(Conv2d, IdentityKernel) {
  std::mt19937_64 rng(3);
  QuantTensor in = random_qtensor(rng, {1, 1, 5, 7}, {1.0, 0});
  ConvDesc d;
  d.geom = {1, 1, 1, 1, 1, 1, 0, 0};
  d.weights = {1};
  d.bias = {0};
  d.weight_qparams = {1.0, 0};
  d.output_qparams = {1.0, 0};
  EXPECT_EQ(conv2d_q(in, d).data, in.data);
}

TEST(Conv2d, RandomCasesMatchFloatOracleWithinOneStep) {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> ch(1, 6), hw(1, 9), kk(0, 2), ss(1, 2);
  int cases = 0;
  while (cases < 150) {
    const int k = 1 + 2 * kk(rng);
    const int s = ss(rng);
    const int p = k / 2;
    const Shape shape{1, ch(rng), hw(rng), hw(rng)};
    if ((shape.h + 2 * p - k) < 0 || (shape.w + 2 * p - k) < 0) continue;
    const QuantTensor in = random_qtensor(rng, shape, random_qparams(rng));
    const ConvDesc d = random_conv(rng, shape.c, ch(rng), k, s, p);
    const QuantTensor got = conv2d_q(in, d);
    int oh, ow;
    const std::vector<double> want = conv_oracle(in, d, oh, ow);
    ASSERT_EQ(got.shape, (Shape{1, d.geom.out_channels, oh, ow}));
    const QParams& q = d.output_qparams;
    for (size_t i = 0; i < want.size(); ++i) {
      const double ideal = std::clamp(want[i] / q.scale + q.zero_point, -128.0, 127.0);
      ASSERT_LE(std::abs(got.data[i] - ideal), 1.0) << "case " << cases << " elem " << i;
    }
    EXPECT_EQ(conv2d_q_ref(in, d).data, got.data) << "parallel and serial kernels differ";
    ++cases;
  }
}

TEST(Conv2d, FloatReferenceMatchesNaiveOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const QuantTensor in = random_qtensor(rng, {1, 4, 8, 8}, random_qparams(rng));
    const ConvDesc d = random_conv(rng, 4, 3, 3, 1, 1);
    std::vector<float> w(d.weights.size()), b(d.bias.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = static_cast<float>(d.weights[i] * d.weight_qparams.scale);
    for (size_t i = 0; i < b.size(); ++i) {
      b[i] = static_cast<float>(d.bias[i] * d.weight_qparams.scale * in.qparams.scale);
    }
    const FloatTensor f = conv2d_f(dequantize(in), d.geom, w, b);
    int oh, ow;
    const std::vector<double> want = conv_oracle(in, d, oh, ow);
    for (size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(f.data[i], want[i], 1e-3);
  }
}

TEST(Conv2d, DeterministicAcrossRuns) {
  std::mt19937_64 rng(8);
  const QuantTensor in = random_qtensor(rng, {1, 8, 16, 16}, random_qparams(rng));
  const ConvDesc d = random_conv(rng, 8, 16, 3, 1, 1);
  const QuantTensor a = conv2d_q(in, d);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(conv2d_q(in, d).data, a.data);
}

TEST(Conv2d, RejectsShapeMismatch) {
  std::mt19937_64 rng(9);
  const QuantTensor in = random_qtensor(rng, {1, 3, 4, 4}, {0.1, 0});
  EXPECT_THROW(conv2d_q(in, random_conv(rng, 4, 2, 3, 1, 1)), ShapeError);
  EXPECT_THROW(conv2d_q(in, random_conv(rng, 3, 2, 7, 1, 0)), ShapeError);
}

// Activation -----------------------------------------------------------------

TEST(Activation, LutExhaustiveOverAllCodes) {
  std::mt19937_64 rng(21);
  for (ActKind kind : {ActKind::kSiLU, ActKind::kLeakyReLU}) {
    for (int trial = 0; trial < 20; ++trial) {
      const QParams in = random_qparams(rng), out = random_qparams(rng);
      const ActLut lut = make_act_lut(kind, in, out);
      for (int code = -128; code <= 127; ++code) {
        const double x = (code - in.zero_point) * in.scale;
        const int8_t want = quantize_value(activation(kind, x), out);
        ASSERT_EQ(lut[static_cast<size_t>(code + 128)], want)
            << act_name(kind) << " code " << code;
      }
    }
  }
}

TEST(Activation, Examples) {
  const QParams q{0.01, 0};
  QuantTensor t(Shape{1, 1, 1, 2}, q);
  t.data = {0, -100};  // real 0 and -1
  const QuantTensor silu = act_q(t, ActKind::kSiLU, q);
  EXPECT_NEAR(dequantize_value(silu.data[0], q), 0.0, q.scale / 2);
  const QuantTensor leaky = act_q(t, ActKind::kLeakyReLU, q);
  EXPECT_NEAR(dequantize_value(leaky.data[1], q), -0.1, q.scale / 2);
}

TEST(Activation, RandomCasesMatchFloatOracleWithinOneStep) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const ActKind kind = trial % 2 ? ActKind::kSiLU : ActKind::kLeakyReLU;
    const QuantTensor in = random_qtensor(rng, {1, 3, 4, 5}, random_qparams(rng));
    const QParams oq = random_qparams(rng);
    const QuantTensor got = act_q(in, kind, oq);
    const FloatTensor want = act_f(dequantize(in), kind);
    for (size_t i = 0; i < want.data.size(); ++i) {
      const double ideal = std::clamp(want.data[i] / oq.scale + oq.zero_point, -128.0, 127.0);
      ASSERT_LE(std::abs(got.data[i] - ideal), 1.0);
    }
  }
}

// Max-pool, upsample, concat, slice, add -------------------------------------

TEST(MaxPool, Example) {
  QuantTensor t(Shape{1, 1, 2, 2}, {1.0, 0});
  t.data = {1, 2, 3, 4};
  const QuantTensor out = maxpool2d(t, 2, 2);
  ASSERT_EQ(out.shape, (Shape{1, 1, 1, 1}));
  EXPECT_EQ(out.data[0], 4);
}

TEST(MaxPool, RandomCasesMatchFloatOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> hw(2, 10), kk(1, 3), ss(1, 2);
  for (int trial = 0; trial < 150; ++trial) {
    const int k = kk(rng), s = ss(rng), p = (trial % 3 == 0) ? k / 2 : 0;
    const QuantTensor in = random_qtensor(rng, {1, 3, hw(rng) + k, hw(rng) + k}, random_qparams(rng));
    const QuantTensor got = maxpool2d(in, k, s, p);
    const FloatTensor want = maxpool2d_f(dequantize(in), k, s, p);
    ASSERT_EQ(got.shape, want.shape);
    const FloatTensor back = dequantize(got);
    for (size_t i = 0; i < back.data.size(); ++i) {
      ASSERT_LE(std::abs(back.data[i] - want.data[i]), in.qparams.scale * 1e-6);
    }
    EXPECT_EQ(maxpool2d_ref(in, k, s, p).data, got.data);
  }
}

TEST(MaxPool, CommutesWithQuantization) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const QParams q = random_qparams(rng);
    const FloatTensor x = random_ftensor(rng, {1, 2, 8, 8}, -3.0f, 3.0f);
    const QuantTensor a = maxpool2d(quantize(x, q), 2, 2);
    const QuantTensor b = quantize(maxpool2d_f(x, 2, 2), q);
    ASSERT_EQ(a.data, b.data);
  }
}

TEST(Upsample, Example) {
  QuantTensor t(Shape{1, 1, 1, 1}, {1.0, 0});
  t.data[0] = 7;
  const QuantTensor out = upsample_nearest(t, 2);
  ASSERT_EQ(out.shape, (Shape{1, 1, 2, 2}));
  for (int8_t v : out.data) EXPECT_EQ(v, 7);
}

TEST(Upsample, IndexArithmetic) {
  std::mt19937_64 rng(33);
  const QuantTensor t = random_qtensor(rng, {1, 3, 4, 5}, {0.1, 0});
  for (int f : {2, 3}) {
    const QuantTensor out = upsample_nearest(t, f);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 4 * f; ++y)
        for (int x = 0; x < 5 * f; ++x) ASSERT_EQ(out.at(0, c, y, x), t.at(0, c, y / f, x / f));
  }
}

TEST(Concat, ChannelLayoutByIndexArithmetic) {
  std::mt19937_64 rng(34);
  const QParams q{0.05, 3};
  const QuantTensor a = random_qtensor(rng, {1, 3, 4, 6}, q);
  const QuantTensor b = random_qtensor(rng, {1, 5, 4, 6}, q);
  const QuantTensor out = concat_channels(a, b);
  ASSERT_EQ(out.shape, (Shape{1, 8, 4, 6}));
  for (int c = 0; c < 8; ++c)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 6; ++x) {
        const int8_t want = c < 3 ? a.at(0, c, y, x) : b.at(0, c - 3, y, x);
        ASSERT_EQ(out.at(0, c, y, x), want);
        // Flat offset: channel block first, then row-major spatial.
        ASSERT_EQ(out.data[static_cast<size_t>(c) * 24 + y * 6 + x], want);
      }
}

TEST(Concat, RejectsQParamMismatch) {
  std::mt19937_64 rng(35);
  const QuantTensor a = random_qtensor(rng, {1, 1, 2, 2}, {0.1, 0});
  const QuantTensor b = random_qtensor(rng, {1, 1, 2, 2}, {0.2, 0});
  EXPECT_THROW(concat_channels(a, b), QuantError);
}

TEST(Slice, SelectsChannelRange) {
  std::mt19937_64 rng(36);
  const QuantTensor t = random_qtensor(rng, {1, 6, 3, 3}, {0.1, 0});
  const QuantTensor s = slice_channels(t, 2, 5);
  ASSERT_EQ(s.shape.c, 3);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(s.at(0, c, 1, 2), t.at(0, c + 2, 1, 2));
}

TEST(Add, RandomCasesMatchFloatOracleWithinOneStep) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const QuantTensor a = random_qtensor(rng, {1, 2, 3, 4}, random_qparams(rng));
    const QuantTensor b = random_qtensor(rng, {1, 2, 3, 4}, random_qparams(rng));
    const QParams oq = random_qparams(rng);
    const QuantTensor got = add_q(a, b, oq);
    const FloatTensor want = add_f(dequantize(a), dequantize(b));
    for (size_t i = 0; i < want.data.size(); ++i) {
      const double ideal = std::clamp(want.data[i] / oq.scale + oq.zero_point, -128.0, 127.0);
      ASSERT_LE(std::abs(got.data[i] - ideal), 1.0);
    }
  }
}

TEST(Requantize, MatchesFloatWithinOneStep) {
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 100; ++trial) {
    const QuantTensor a = random_qtensor(rng, {1, 2, 3, 3}, random_qparams(rng));
    const QParams oq = random_qparams(rng);
    const QuantTensor got = requantize(a, oq);
    const FloatTensor f = dequantize(a);
    for (size_t i = 0; i < f.data.size(); ++i) {
      const double ideal = std::clamp(f.data[i] / oq.scale + oq.zero_point, -128.0, 127.0);
      ASSERT_LE(std::abs(got.data[i] - ideal), 1.0);
    }
  }
}

}  // namespace
}  // namespace tyrt
