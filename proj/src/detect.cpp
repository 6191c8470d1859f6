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

#include "tyrt/detect.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace tyrt {

HeadMeta head_meta(const GraphSpec& g) {
  HeadMeta m;
  m.num_classes = g.num_classes;
  m.input_resolution = g.input_resolution;
  m.strides = g.head_strides();
  m.nms_free = g.nms_free();
  return m;
}

std::vector<Detection> decode(const std::vector<QuantTensor>& heads,
                              const HeadMeta& meta, double conf) {
  if (heads.size() != meta.strides.size()) {
    throw ShapeError("expected " + std::to_string(meta.strides.size()) +
                     " head tensors, got " + std::to_string(heads.size()));
  }
  std::vector<Detection> out;
  const double R = meta.input_resolution;
  for (size_t s = 0; s < heads.size(); ++s) {
    const QuantTensor& t = heads[s];
    const int stride = meta.strides[s];
    if (t.shape.n != 1 || t.shape.c != 4 + meta.num_classes ||
        t.shape.h * stride != meta.input_resolution ||
        t.shape.w * stride != meta.input_resolution) {
      throw ShapeError("head " + std::to_string(s) + " has shape " + t.shape.str() +
                       ", expected (1," + std::to_string(4 + meta.num_classes) + "," +
                       std::to_string(meta.input_resolution / stride) + "," +
                       std::to_string(meta.input_resolution / stride) + ")");
    }
    for (int y = 0; y < t.shape.h; ++y) {
      for (int x = 0; x < t.shape.w; ++x) {
        // Codes are monotone in the logit, so the arg-max can run on codes.
        int best = 0;
        int8_t best_code = t.at(0, 4, y, x);
        for (int c = 1; c < meta.num_classes; ++c) {
          const int8_t v = t.at(0, 4 + c, y, x);
          if (v > best_code) best_code = v, best = c;
        }
        const double logit = dequantize_value(best_code, t.qparams);
        const double score = 1.0 / (1.0 + std::exp(-logit));
        if (score < conf) continue;
        const double cx = (x + 0.5) * stride, cy = (y + 0.5) * stride;
        auto dist = [&](int ch) {
          return std::max(0.0, dequantize_value(t.at(0, ch, y, x), t.qparams)) * stride;
        };
        Detection d;
        d.class_id = best;
        d.score = score;
        d.box.x1 = std::clamp(cx - dist(0), 0.0, R);
        d.box.y1 = std::clamp(cy - dist(1), 0.0, R);
        d.box.x2 = std::clamp(cx + dist(2), 0.0, R);
        d.box.y2 = std::clamp(cy + dist(3), 0.0, R);
        out.push_back(d);
      }
    }
  }
  return out;
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::min(1.0, inter / uni) : 0.0;
}

namespace {

std::vector<size_t> ranked(const std::vector<Detection>& dets) {
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return dets[a].class_id < dets[b].class_id;
  });
  return order;
}

}  // namespace

std::vector<Detection> nms(const std::vector<Detection>& dets,
                           double iou_threshold) {
  std::map<int, std::vector<const Detection*>> kept_by_class;
  std::vector<Detection> out;
  for (size_t i : ranked(dets)) {
    const Detection& d = dets[i];
    auto& kept = kept_by_class[d.class_id];
    bool keep = true;
    for (const Detection* k : kept) {
      if (iou(k->box, d.box) >= iou_threshold) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    out.push_back(d);
    kept.push_back(&d);
  }
  return out;
}

std::vector<Detection> topk(const std::vector<Detection>& dets, size_t k) {
  std::vector<Detection> out;
  for (size_t i : ranked(dets)) {
    if (out.size() >= k) break;
    out.push_back(dets[i]);
  }
  return out;
}

std::vector<Detection> postprocess(const std::vector<QuantTensor>& heads,
                                   const HeadMeta& meta,
                                   const PostprocessConfig& cfg) {
  const std::vector<Detection> raw = decode(heads, meta, cfg.conf);
  if (meta.nms_free) return topk(raw, cfg.max_det);
  std::vector<Detection> kept = nms(raw, cfg.iou);
  if (kept.size() > cfg.max_det) kept.resize(cfg.max_det);
  return kept;
}

std::vector<Detection> rescale(const std::vector<Detection>& dets,
                               int input_resolution, int width, int height) {
  const double sx = static_cast<double>(width) / input_resolution;
  const double sy = static_cast<double>(height) / input_resolution;
  std::vector<Detection> out = dets;
  for (Detection& d : out) {
    d.box.x1 *= sx, d.box.x2 *= sx;
    d.box.y1 *= sy, d.box.y2 *= sy;
  }
  return out;
}

// Evaluation -------------------------------------------------------------------

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

double average_precision(const std::vector<bool>& tp, size_t num_gt) {
  if (num_gt == 0 || tp.empty()) return 0.0;
  std::vector<double> recall(tp.size()), precision(tp.size());
  size_t hits = 0;
  for (size_t i = 0; i < tp.size(); ++i) {
    hits += tp[i] ? 1 : 0;
    recall[i] = static_cast<double>(hits) / static_cast<double>(num_gt);
    precision[i] = static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  for (size_t i = precision.size() - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) sum += precision[static_cast<size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

MapResult eval_map(const PredictionSet& preds, const GroundTruthSet& gts,
                   const std::vector<double>& thresholds) {
  if (gts.empty()) throw Error("evaluation needs at least one image");
  std::set<int> classes;
  std::map<int, size_t> gt_count;
  for (const auto& [img, list] : gts) {
    for (const GroundTruth& g : list) {
      classes.insert(g.class_id);
      ++gt_count[g.class_id];
    }
  }
  MapResult res;
  res.per_threshold.assign(thresholds.size(), 0.0);
  if (classes.empty()) return res;

  for (int cls : classes) {
    // Ranked predictions of this class over all images.
    struct Ranked {
      int image;
      const Detection* det;
    };
    std::vector<Ranked> list;
    for (const auto& [img, dets] : preds) {
      for (const Detection& d : dets) {
        if (d.class_id == cls) list.push_back({img, &d});
      }
    }
    std::stable_sort(list.begin(), list.end(), [](const Ranked& a, const Ranked& b) {
      return a.det->score > b.det->score;
    });
    double class_sum = 0.0;
    for (size_t ti = 0; ti < thresholds.size(); ++ti) {
      std::map<int, std::vector<bool>> used;
      std::vector<bool> tp;
      tp.reserve(list.size());
      for (const Ranked& r : list) {
        auto git = gts.find(r.image);
        int best = -1;
        double best_iou = thresholds[ti];
        if (git != gts.end()) {
          auto& u = used[r.image];
          u.resize(git->second.size(), false);
          for (size_t g = 0; g < git->second.size(); ++g) {
            const GroundTruth& gt = git->second[g];
            if (gt.class_id != cls || u[g]) continue;
            const double v = iou(gt.box, r.det->box);
            if (v >= best_iou) {
              best_iou = v;
              best = static_cast<int>(g);
            }
          }
          if (best >= 0) u[static_cast<size_t>(best)] = true;
        }
        tp.push_back(best >= 0);
      }
      const double ap = average_precision(tp, gt_count[cls]);
      res.per_threshold[ti] += ap / static_cast<double>(classes.size());
      class_sum += ap;
    }
    res.per_class[cls] = thresholds.empty() ? 0.0 : class_sum / thresholds.size();
  }
  double total = 0.0;
  for (double v : res.per_threshold) total += v;
  res.map = thresholds.empty() ? 0.0 : total / thresholds.size();
  res.map50 = thresholds.empty() ? 0.0 : res.per_threshold.front();
  return res;
}

// Text records -----------------------------------------------------------------

namespace {

template <typename F>
void for_each_record(const std::filesystem::path& path, F&& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    if (!fn(ss)) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": malformed record");
    }
  }
}

bool valid_box(const Box& b) { return b.x1 <= b.x2 && b.y1 <= b.y2; }

}  // namespace

void write_predictions(std::ostream& os, int image_id,
                       const std::vector<Detection>& dets) {
  char line[160];
  for (const Detection& d : dets) {
    std::snprintf(line, sizeof line, "%d %d %.6f %.3f %.3f %.3f %.3f\n", image_id,
                  d.class_id, d.score, d.box.x1, d.box.y1, d.box.x2, d.box.y2);
    os << line;
  }
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  PredictionSet out;
  for_each_record(path, [&](std::istringstream& ss) {
    int img;
    Detection d;
    if (!(ss >> img >> d.class_id >> d.score >> d.box.x1 >> d.box.y1 >> d.box.x2 >> d.box.y2)) {
      return false;
    }
    if (!valid_box(d.box) || d.score < 0.0 || d.score > 1.0) return false;
    out[img].push_back(d);
    return true;
  });
  return out;
}

PredictionSet read_prediction_dir(const std::filesystem::path& dir) {
  if (std::filesystem::is_regular_file(dir)) return read_predictions(dir);
  if (!std::filesystem::is_directory(dir)) {
    throw Error("prediction path " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  PredictionSet out;
  for (const auto& f : files) {
    for (auto& [img, dets] : read_predictions(f)) {
      auto& dst = out[img];
      dst.insert(dst.end(), dets.begin(), dets.end());
    }
  }
  return out;
}

void write_ground_truth(std::ostream& os, int image_id,
                        const std::vector<GroundTruth>& gts) {
  char line[160];
  for (const GroundTruth& g : gts) {
    std::snprintf(line, sizeof line, "%d %d %.3f %.3f %.3f %.3f\n", image_id,
                  g.class_id, g.box.x1, g.box.y1, g.box.x2, g.box.y2);
    os << line;
  }
}

GroundTruthSet read_ground_truth(const std::filesystem::path& path) {
  GroundTruthSet out;
  for_each_record(path, [&](std::istringstream& ss) {
    int img;
    GroundTruth g;
    if (!(ss >> img >> g.class_id >> g.box.x1 >> g.box.y1 >> g.box.x2 >> g.box.y2)) {
      return false;
    }
    if (!valid_box(g.box)) return false;
    out[img].push_back(g);
    return true;
  });
  return out;
}

}  // namespace tyrt
