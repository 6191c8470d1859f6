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
/// \brief Camera front end: Bayer frames, demosaicing, network input and a
/// double-buffered frame source running on a virtual clock.

#ifndef TYRT_IMAGING_HPP
#define TYRT_IMAGING_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tyrt/tensor.hpp"

namespace tyrt {

enum class BayerPattern : uint8_t { kRGGB, kBGGR, kGRBG, kGBRG };

const char* pattern_name(BayerPattern p);
BayerPattern parse_pattern(const std::string& s);

/// 0 = red, 1 = green, 2 = blue.
int bayer_color(BayerPattern p, int x, int y);

struct BayerFrame {
  int width = 0;
  int height = 0;
  BayerPattern pattern = BayerPattern::kRGGB;
  std::vector<uint8_t> data;

  BayerFrame() = default;
  BayerFrame(int w, int h, BayerPattern p)
      : width(w), height(h), pattern(p),
        data(static_cast<size_t>(w) * static_cast<size_t>(h), 0) {}

  /// Throws ShapeError on odd or empty dimensions or a wrong data length.
  void validate() const;
  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
};

/// Interleaved RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h), data(3 * static_cast<size_t>(w) * static_cast<size_t>(h), 0) {}

  void validate() const;
  uint8_t at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  uint8_t& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
};

/// Each missing colour is the rounded mean of the same-colour samples in the
/// 3x3 neighbourhood that lie inside the frame.
RgbImage demosaic_bilinear(const BayerFrame& f);
RgbImage demosaic_bilinear_ref(const BayerFrame& f);

/// Samples an RGB image through the colour filter array.
BayerFrame mosaic(const RgbImage& img, BayerPattern p);

enum class ResizeMode : uint8_t { kNearest, kBilinear };

/// Resize to resolution x resolution, scale codes to [0, 1] and quantize;
/// NCHW with channels in RGB order.
QuantTensor to_net_input(const RgbImage& img, int resolution, const QParams& q,
                         ResizeMode mode = ResizeMode::kNearest);
FloatTensor to_float_input(const RgbImage& img, int resolution,
                           ResizeMode mode = ResizeMode::kNearest);

// PNM I/O --------------------------------------------------------------------

BayerFrame read_pgm(const std::filesystem::path& path, BayerPattern p);
void write_pgm(const std::filesystem::path& path, const BayerFrame& f);
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

// Synthetic content ----------------------------------------------------------

struct SceneObject {
  int class_id = 0;
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // pixels, inclusive-exclusive
};

/// Smooth background plus a few solid rectangles; deterministic in `seed`.
RgbImage synthetic_scene(int width, int height, uint64_t seed, int num_classes,
                         std::vector<SceneObject>* objects = nullptr);

std::array<uint8_t, 3> class_color(int class_id);
/// Two-pixel outline, clipped to the image.
void draw_box(RgbImage& img, double x1, double y1, double x2, double y2,
              const std::array<uint8_t, 3>& color);

// Frame sources --------------------------------------------------------------

class FrameProvider {
 public:
  virtual ~FrameProvider() = default;
  /// Fills `out` with the next frame; false at end of stream.
  virtual bool produce(BayerFrame& out) = 0;
};

class SyntheticFrames : public FrameProvider {
 public:
  SyntheticFrames(int width, int height, BayerPattern pattern, uint64_t seed,
                  int count, int num_classes = 20);
  bool produce(BayerFrame& out) override;

 private:
  int width_, height_;
  BayerPattern pattern_;
  uint64_t seed_;
  int count_, classes_;
  int index_ = 0;
};

/// Every *.pgm file of a directory, in name order.
class DirectoryFrames : public FrameProvider {
 public:
  DirectoryFrames(const std::filesystem::path& dir, BayerPattern pattern);
  bool produce(BayerFrame& out) override;
  size_t size() const { return files_.size(); }

 private:
  std::vector<std::filesystem::path> files_;
  BayerPattern pattern_;
  size_t index_ = 0;
};

/// Two frame buffers and a modelled camera. Frame k+1 starts capturing as
/// soon as the camera is done with frame k and the consumer has handed back
/// the buffer it will overwrite, so capture overlaps processing.
class DoubleBufferedSource {
 public:
  DoubleBufferedSource(std::unique_ptr<FrameProvider> provider,
                       double capture_ms);

  /// The next frame, or nullptr at end of stream. The reference stays valid
  /// until the call after next.
  const BayerFrame* next();
  /// Virtual time the consumer spent on the frame returned last.
  void processed(double ms);

  double now_ms() const { return now_; }
  /// Virtual times at which frames were handed to the consumer.
  const std::vector<double>& delivery_times() const { return delivered_; }
  /// Distance between the last two deliveries; 0 before the second frame.
  double last_period_ms() const;

 private:
  bool start_capture(double at);

  std::unique_ptr<FrameProvider> provider_;
  double capture_ms_;
  std::array<BayerFrame, 2> buffers_;
  int64_t captured_ = 0;   // frames put into buffers
  int64_t handed_ = 0;     // frames returned to the consumer
  double now_ = 0.0;
  double camera_free_ = 0.0;
  double pending_ready_ = 0.0;
  bool pending_ = false;
  std::vector<double> delivered_;
};

}  // namespace tyrt

#endif  // TYRT_IMAGING_HPP
