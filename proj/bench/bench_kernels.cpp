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

// OpenMP kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include <random>

#include "tyrt/imaging.hpp"
#include "tyrt/kernels.hpp"

namespace {

using namespace tyrt;

QuantTensor random_input(int c, int h, int w) {
  QuantTensor t({1, c, h, w}, {0.02, 3});
  std::mt19937 rng(1);
  for (int8_t& v : t.data) v = static_cast<int8_t>(static_cast<int>(rng() % 256) - 128);
  return t;
}

ConvDesc random_conv(int cin, int cout, int k) {
  ConvDesc d;
  d.geom = {cin, cout, k, k, 1, 1, k / 2, k / 2};
  std::mt19937 rng(2);
  d.weights.resize(static_cast<size_t>(d.geom.weight_count()));
  for (int8_t& v : d.weights) v = static_cast<int8_t>(static_cast<int>(rng() % 255) - 127);
  d.bias.assign(static_cast<size_t>(cout), 100);
  d.weight_qparams = {0.004, 0};
  d.output_qparams = {0.05, -5};
  return d;
}

// Args: channels, spatial size.
template <QuantTensor (*Conv)(const QuantTensor&, const ConvDesc&)>
void BM_Conv3x3(benchmark::State& st) {
  const int c = static_cast<int>(st.range(0)), hw = static_cast<int>(st.range(1));
  const QuantTensor in = random_input(c, hw, hw);
  const ConvDesc d = random_conv(c, c, 3);
  for (auto _ : st) benchmark::DoNotOptimize(Conv(in, d));
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(c) * c * 9 * hw * hw);
}
BENCHMARK(BM_Conv3x3<conv2d_q>)->Name("conv3x3/omp")->Args({16, 64})->Args({64, 32})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3x3<conv2d_q_ref>)->Name("conv3x3/ref")->Args({16, 64})->Args({64, 32})->Unit(benchmark::kMillisecond);

template <QuantTensor (*Pool)(const QuantTensor&, int, int, int)>
void BM_MaxPool(benchmark::State& st) {
  const QuantTensor in = random_input(32, 128, 128);
  for (auto _ : st) benchmark::DoNotOptimize(Pool(in, 2, 2, 0));
  st.SetBytesProcessed(st.iterations() * static_cast<int64_t>(in.data.size()));
}
BENCHMARK(BM_MaxPool<maxpool2d>)->Name("maxpool2x2/omp")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MaxPool<maxpool2d_ref>)->Name("maxpool2x2/ref")->Unit(benchmark::kMicrosecond);

template <RgbImage (*Demosaic)(const BayerFrame&)>
void BM_Demosaic(benchmark::State& st) {
  const BayerFrame f = mosaic(synthetic_scene(320, 240, 4, 20), BayerPattern::kRGGB);
  for (auto _ : st) benchmark::DoNotOptimize(Demosaic(f));
  st.SetItemsProcessed(st.iterations() * 320 * 240);
}
BENCHMARK(BM_Demosaic<demosaic_bilinear>)->Name("demosaic/omp")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Demosaic<demosaic_bilinear_ref>)->Name("demosaic/ref")->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
