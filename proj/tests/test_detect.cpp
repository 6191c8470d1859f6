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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tyrt/detect.hpp"

namespace tyrt {
namespace {

namespace fs = std::filesystem;

HeadMeta meta(int classes, int res, std::vector<int> strides, bool nms_free = false) {
  HeadMeta m;
  m.num_classes = classes;
  m.input_resolution = res;
  m.strides = std::move(strides);
  m.nms_free = nms_free;
  return m;
}

QuantTensor flat_head(int classes, int grid, int8_t logit_code) {
  QuantTensor t(Shape{1, 4 + classes, grid, grid}, {0.1, 0});
  for (int c = 4; c < 4 + classes; ++c)
    for (int y = 0; y < grid; ++y)
      for (int x = 0; x < grid; ++x) t.at(0, c, y, x) = logit_code;
  return t;
}

TEST(Decode, StronglyNegativeLogitsGiveNothing) {
  EXPECT_TRUE(decode({flat_head(3, 4, -100)}, meta(3, 32, {8})).empty());
}

TEST(Decode, SingleHotCellHandComputed) {
  QuantTensor t = flat_head(3, 4, -100);
  t.at(0, 4 + 1, 1, 2) = 50;  // class 1 logit 5.0 at row 1, col 2
  for (int ch = 0; ch < 4; ++ch) t.at(0, ch, 1, 2) = 10;  // distances 1.0 cell
  const std::vector<Detection> d = decode({t}, meta(3, 32, {8}));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].class_id, 1);
  EXPECT_NEAR(d[0].score, 1.0 / (1.0 + std::exp(-5.0)), 1e-12);
  // Centre (2.5*8, 1.5*8) = (20, 12), one stride each way.
  EXPECT_EQ(d[0].box, (Box{12, 4, 28, 20}));
  EXPECT_EQ(decode({t}, meta(3, 32, {8})), d);
}

TEST(Decode, BoxesClippedAndValid) {
  QuantTensor t = flat_head(2, 4, 60);
  for (int ch = 0; ch < 4; ++ch)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) t.at(0, ch, y, x) = static_cast<int8_t>(ch % 2 ? 127 : -50);
  for (const Detection& d : decode({t}, meta(2, 32, {8}))) {
    EXPECT_LE(d.box.x1, d.box.x2);
    EXPECT_LE(d.box.y1, d.box.y2);
    EXPECT_GE(d.box.x1, 0);
    EXPECT_LE(d.box.y2, 32);
    EXPECT_GE(d.score, 0);
    EXPECT_LE(d.score, 1);
  }
}

TEST(Decode, RejectsLayoutMismatch) {
  EXPECT_THROW(decode({flat_head(3, 4, 0)}, meta(2, 32, {8})), ShapeError);
  EXPECT_THROW(decode({flat_head(3, 4, 0)}, meta(3, 32, {16})), ShapeError);
  EXPECT_THROW(decode({}, meta(3, 32, {8})), ShapeError);
}

TEST(Iou, Examples) {
  const Box a{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {2, 2, 3, 3}), 0.0);
  EXPECT_NEAR(iou(a, {0.5, 0, 1.5, 1}), 1.0 / 3.0, 1e-12);
}

Box random_box(std::mt19937_64& rng, double extent = 20) {
  std::uniform_real_distribution<double> p(0, extent), s(1, extent / 2);
  const double x = p(rng), y = p(rng);
  return {x, y, x + s(rng), y + s(rng)};
}

TEST(Iou, SymmetricAndBounded) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Box a = random_box(rng), b = random_box(rng);
    EXPECT_DOUBLE_EQ(iou(a, b), iou(b, a));
    EXPECT_GE(iou(a, b), 0.0);
    EXPECT_LE(iou(a, b), 1.0);
    EXPECT_NEAR(iou(a, a), 1.0, 1e-12);
  }
}

TEST(Nms, Examples) {
  const Box b{0, 0, 10, 10};
  const std::vector<Detection> same{{0, 0.8, b}, {0, 0.9, b}};
  const std::vector<Detection> kept = nms(same, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_DOUBLE_EQ(kept[0].score, 0.9);
  EXPECT_EQ(nms({{0, 0.9, b}, {1, 0.8, b}}, 0.5).size(), 2u);
}

/// O(n^2) reference: priority by counting predecessors, then keep a box iff
/// no higher-priority kept box of its class overlaps it at or above `thr`.
std::vector<Detection> brute_force_nms(const std::vector<Detection>& d, double thr) {
  const size_t n = d.size();
  auto before = [&](size_t i, size_t j) {  // i has priority over j
    if (d[i].score != d[j].score) return d[i].score > d[j].score;
    if (d[i].class_id != d[j].class_id) return d[i].class_id < d[j].class_id;
    return i < j;
  };
  std::vector<size_t> rank(n, 0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (j != i && before(j, i)) ++rank[i];
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[rank[i]] = i;
  std::vector<bool> keep(n, false);
  std::vector<Detection> out;
  for (size_t r = 0; r < n; ++r) {
    const size_t i = order[r];
    bool ok = true;
    for (size_t j = 0; j < n; ++j) {
      if (keep[j] && d[j].class_id == d[i].class_id && iou(d[j].box, d[i].box) >= thr) ok = false;
    }
    keep[i] = ok;
    if (ok) out.push_back(d[i]);
  }
  return out;
}

std::vector<Detection> random_dets(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 50), cls(0, 2), tenth(1, 10);
  std::uniform_real_distribution<double> score(0, 1);
  std::vector<Detection> d(static_cast<size_t>(count(rng)));
  const bool ties = rng() % 2;
  for (Detection& x : d) {
    x.class_id = cls(rng);
    x.score = ties ? tenth(rng) / 10.0 : score(rng);
    x.box = random_box(rng);
  }
  return d;
}

TEST(Nms, MatchesBruteForceOnThousandInstances) {
  std::mt19937_64 rng(2026);
  for (int inst = 0; inst < 1000; ++inst) {
    const std::vector<Detection> d = random_dets(rng);
    const double thr = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
    ASSERT_EQ(nms(d, thr), brute_force_nms(d, thr)) << "instance " << inst;
  }
}

TEST(Nms, SubsetSeparatedAndIdempotent) {
  std::mt19937_64 rng(7);
  for (int inst = 0; inst < 300; ++inst) {
    const std::vector<Detection> d = random_dets(rng);
    const std::vector<Detection> k = nms(d, 0.45);
    for (const Detection& x : k) EXPECT_NE(std::find(d.begin(), d.end(), x), d.end());
    for (size_t i = 0; i < k.size(); ++i)
      for (size_t j = i + 1; j < k.size(); ++j)
        if (k[i].class_id == k[j].class_id) EXPECT_LT(iou(k[i].box, k[j].box), 0.45);
    EXPECT_EQ(nms(k, 0.45), k);
  }
}

TEST(Postprocess, NmsFreePathKeepsOnePerCellAndSkipsNms) {
  // Every cell of a 4x4 grid fires with the same box: NMS would keep one.
  QuantTensor t = flat_head(2, 4, 40);
  for (int ch = 0; ch < 4; ++ch)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) t.at(0, ch, y, x) = 127;
  PostprocessConfig cfg;
  const auto v10 = postprocess({t}, meta(2, 32, {8}, true), cfg);
  EXPECT_EQ(v10.size(), 16u);
  const auto v8 = postprocess({t}, meta(2, 32, {8}, false), cfg);
  EXPECT_LT(v8.size(), v10.size());
  cfg.max_det = 5;
  EXPECT_EQ(postprocess({t}, meta(2, 32, {8}, true), cfg).size(), 5u);
}

TEST(Rescale, MapsToFrameCoordinates) {
  const std::vector<Detection> d{{0, 0.5, {64, 128, 128, 256}}};
  const auto r = rescale(d, 256, 320, 240);
  EXPECT_EQ(r[0].box, (Box{80, 120, 160, 240}));
}

// Evaluation -------------------------------------------------------------------

TEST(Map, HandComputedFixture) {
  GroundTruthSet gts;
  gts[0] = {{0, {0, 0, 10, 10}}};
  PredictionSet preds;
  // IoU 60/100 = 0.6 for the first, the second is disjoint.
  preds[0] = {{0, 0.9, {0, 0, 10, 6}}, {0, 0.5, {50, 50, 60, 60}}};
  const MapResult r = eval_map(preds, gts);
  // AP is 1 at thresholds .50 .55 .60 and 0 at the other seven.
  ASSERT_EQ(r.per_threshold.size(), 10u);
  EXPECT_NEAR(r.per_threshold.front(), 1.0, 1e-12);
  EXPECT_NEAR(r.per_threshold.back(), 0.0, 1e-12);
  EXPECT_NEAR(r.map, 0.3, 1e-6);
  EXPECT_NEAR(r.map50, 1.0, 1e-6);
}

TEST(Map, FpRankedFirstHalvesPrecision) {
  GroundTruthSet gts;
  gts[0] = {{0, {0, 0, 10, 10}}};
  PredictionSet preds;
  preds[0] = {{0, 0.9, {50, 50, 60, 60}}, {0, 0.5, {0, 0, 10, 10}}};
  // Interpolated precision is 1/2 at every recall point.
  EXPECT_NEAR(eval_map(preds, gts).map, 0.5, 1e-6);
}

TEST(Map, PerfectAndEmptyPredictions) {
  std::mt19937_64 rng(3);
  GroundTruthSet gts;
  PredictionSet perfect;
  for (int img = 0; img < 5; ++img) {
    for (int k = 0; k < 4; ++k) {
      const GroundTruth g{k % 3, random_box(rng, 200)};
      gts[img].push_back(g);
      perfect[img].push_back({g.class_id, 1.0, g.box});
    }
  }
  EXPECT_NEAR(eval_map(perfect, gts).map, 1.0, 1e-12);
  EXPECT_NEAR(eval_map(PredictionSet{}, gts).map, 0.0, 1e-12);
  EXPECT_THROW(eval_map(perfect, GroundTruthSet{}), Error);
}

TEST(Map, InvariantToPredictionOrder) {
  std::mt19937_64 rng(4);
  GroundTruthSet gts;
  PredictionSet preds;
  std::uniform_real_distribution<double> jitter(-3, 3), score(0, 1);
  for (int img = 0; img < 4; ++img) {
    for (int k = 0; k < 6; ++k) {
      const GroundTruth g{k % 2, random_box(rng, 100)};
      gts[img].push_back(g);
      Box b = g.box;
      b.x1 += jitter(rng), b.x2 += jitter(rng);
      preds[img].push_back({g.class_id, score(rng), b});
      preds[img].push_back({g.class_id, score(rng), random_box(rng, 100)});
    }
  }
  const double base = eval_map(preds, gts).map;
  for (int trial = 0; trial < 20; ++trial) {
    for (auto& [img, v] : preds) std::shuffle(v.begin(), v.end(), rng);
    EXPECT_DOUBLE_EQ(eval_map(preds, gts).map, base);
  }
}

TEST(Files, PredictionsAndGroundTruthRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "tyrt_detect_test";
  fs::remove_all(dir);
  fs::create_directories(dir / "preds");
  const std::vector<Detection> d{{3, 0.75, {1.5, 2.25, 10, 20}}, {0, 0.5, {0, 0, 4, 4}}};
  {
    std::ofstream f(dir / "preds" / "a.txt");
    write_predictions(f, 7, d);
    std::ofstream g(dir / "gt.txt");
    g << "# image class x1 y1 x2 y2\n";
    write_ground_truth(g, 7, {{3, {1.5, 2.25, 10, 20}}});
  }
  const PredictionSet p = read_prediction_dir(dir / "preds");
  ASSERT_EQ(p.at(7).size(), 2u);
  EXPECT_EQ(p.at(7)[0].class_id, 3);
  EXPECT_NEAR(p.at(7)[0].box.y1, 2.25, 1e-3);
  const GroundTruthSet g = read_ground_truth(dir / "gt.txt");
  EXPECT_EQ(g.at(7).size(), 1u);
  {
    std::ofstream bad(dir / "bad.txt");
    bad << "1 2 3\n";
  }
  EXPECT_THROW(read_ground_truth(dir / "bad.txt"), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace tyrt
