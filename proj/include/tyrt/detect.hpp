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
/// \brief Head decoding, NMS and COCO-style mAP.
///
/// Head contract: one tensor per scale, shape (1, 4 + classes, H, W).
/// Channels 0..3 are left/top/right/bottom distances from the cell centre
/// in units of the scale's stride; the rest are class logits.

#ifndef TYRT_DETECT_HPP
#define TYRT_DETECT_HPP

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <vector>

#include "tyrt/graph.hpp"
#include "tyrt/tensor.hpp"

namespace tyrt {

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double area() const { return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1); }
  bool operator==(const Box&) const = default;
};

struct Detection {
  int class_id = 0;
  double score = 0.0;
  Box box;

  bool operator==(const Detection&) const = default;
};

struct HeadMeta {
  int num_classes = 0;
  int input_resolution = 0;
  std::vector<int> strides;  // per head tensor
  bool nms_free = false;
};

HeadMeta head_meta(const GraphSpec& g);

/// Dequantizes, keeps at most the best class per cell when its sigmoid
/// score reaches `conf`, and maps ltrb distances to clipped xyxy pixels.
/// Throws ShapeError when the tensors do not follow the head contract.
std::vector<Detection> decode(const std::vector<QuantTensor>& heads,
                              const HeadMeta& meta, double conf = 0.25);

double iou(const Box& a, const Box& b);

/// Class-wise greedy NMS. Order: score descending, then class id, then
/// input position.
std::vector<Detection> nms(const std::vector<Detection>& dets,
                           double iou_threshold = 0.45);

/// Highest-scoring `k` detections in the same order as nms().
std::vector<Detection> topk(const std::vector<Detection>& dets, size_t k);

struct PostprocessConfig {
  double conf = 0.25;
  double iou = 0.45;
  size_t max_det = 300;
};

/// decode, then NMS (or top-k for NMS-free heads).
std::vector<Detection> postprocess(const std::vector<QuantTensor>& heads,
                                   const HeadMeta& meta,
                                   const PostprocessConfig& cfg = {});

/// Maps boxes from network-input pixels to an image of width x height.
std::vector<Detection> rescale(const std::vector<Detection>& dets,
                               int input_resolution, int width, int height);

// Evaluation -----------------------------------------------------------------

struct GroundTruth {
  int class_id = 0;
  Box box;
};

using PredictionSet = std::map<int, std::vector<Detection>>;   // by image id
using GroundTruthSet = std::map<int, std::vector<GroundTruth>>;

std::vector<double> coco_iou_thresholds();

/// 101-point interpolated AP of one ranked list; `tp` flags in rank order.
double average_precision(const std::vector<bool>& tp, size_t num_gt);

struct MapResult {
  double map = 0.0;    // mean over classes and thresholds
  double map50 = 0.0;  // first threshold only
  std::map<int, double> per_class;  // averaged over thresholds
  std::vector<double> per_threshold;
};

/// Only classes that have ground truth are averaged. Throws Error when
/// `gts` has no image.
MapResult eval_map(const PredictionSet& preds, const GroundTruthSet& gts,
                   const std::vector<double>& thresholds = coco_iou_thresholds());

// Text records ---------------------------------------------------------------
// prediction:   image_id class_id score x1 y1 x2 y2
// ground truth: image_id class_id x1 y1 x2 y2
// '#' starts a comment; blank lines are ignored.

void write_predictions(std::ostream& os, int image_id,
                       const std::vector<Detection>& dets);
PredictionSet read_predictions(const std::filesystem::path& path);
/// Every *.txt file in `dir` (or `dir` itself if it is a file).
PredictionSet read_prediction_dir(const std::filesystem::path& dir);
void write_ground_truth(std::ostream& os, int image_id,
                        const std::vector<GroundTruth>& gts);
GroundTruthSet read_ground_truth(const std::filesystem::path& path);

}  // namespace tyrt

#endif  // TYRT_DETECT_HPP
