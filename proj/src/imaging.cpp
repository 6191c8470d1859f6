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

#include "tyrt/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace tyrt {

const char* pattern_name(BayerPattern p) {
  switch (p) {
    case BayerPattern::kRGGB: return "RGGB";
    case BayerPattern::kBGGR: return "BGGR";
    case BayerPattern::kGRBG: return "GRBG";
    case BayerPattern::kGBRG: return "GBRG";
  }
  return "?";
}

BayerPattern parse_pattern(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), ::toupper);
  if (u == "RGGB") return BayerPattern::kRGGB;
  if (u == "BGGR") return BayerPattern::kBGGR;
  if (u == "GRBG") return BayerPattern::kGRBG;
  if (u == "GBRG") return BayerPattern::kGBRG;
  throw Error("unknown Bayer pattern '" + s + "'");
}

int bayer_color(BayerPattern p, int x, int y) {
  // Colour of the top-left 2x2 cell, row-major.
  static constexpr int kCell[4][4] = {
      {0, 1, 1, 2},  // RGGB
      {2, 1, 1, 0},  // BGGR
      {1, 0, 2, 1},  // GRBG
      {1, 2, 0, 1},  // GBRG
  };
  return kCell[static_cast<int>(p)][((y & 1) << 1) | (x & 1)];
}

void BayerFrame::validate() const {
  if (width <= 0 || height <= 0 || (width & 1) || (height & 1)) {
    throw ShapeError("Bayer frame must have even positive dimensions, got " +
                     std::to_string(width) + "x" + std::to_string(height));
  }
  if (data.size() != static_cast<size_t>(width) * height) {
    throw ShapeError("Bayer frame data length does not match its size");
  }
}

void RgbImage::validate() const {
  if (width <= 0 || height <= 0) throw ShapeError("RGB image must be non-empty");
  if (data.size() != 3 * static_cast<size_t>(width) * height) {
    throw ShapeError("RGB image data length does not match its size");
  }
}

namespace {

inline uint8_t mean_u8(int sum, int n) {
  return static_cast<uint8_t>((sum + n / 2) / n);
}

/// Generic path: any pixel, bounds-checked.
inline void demosaic_pixel(const BayerFrame& f, int x, int y, uint8_t* rgb) {
  int sum[3] = {0, 0, 0}, cnt[3] = {0, 0, 0};
  const int own = bayer_color(f.pattern, x, y);
  for (int dy = -1; dy <= 1; ++dy) {
    const int yy = y + dy;
    if (yy < 0 || yy >= f.height) continue;
    for (int dx = -1; dx <= 1; ++dx) {
      const int xx = x + dx;
      if (xx < 0 || xx >= f.width) continue;
      const int c = bayer_color(f.pattern, xx, yy);
      sum[c] += f.at(xx, yy);
      ++cnt[c];
    }
  }
  for (int c = 0; c < 3; ++c) {
    rgb[c] = c == own ? f.at(x, y) : mean_u8(sum[c], cnt[c]);
  }
}

}  // namespace

RgbImage demosaic_bilinear(const BayerFrame& f) {
  f.validate();
  RgbImage out(f.width, f.height);
  const int W = f.width, H = f.height;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < H; ++y) {
    uint8_t* row = &out.data[static_cast<size_t>(y) * W * 3];
    if (y == 0 || y == H - 1) {
      for (int x = 0; x < W; ++x) demosaic_pixel(f, x, y, row + 3 * x);
      continue;
    }
    const uint8_t* up = &f.data[static_cast<size_t>(y - 1) * W];
    const uint8_t* mid = up + W;
    const uint8_t* dn = mid + W;
    demosaic_pixel(f, 0, y, row);
    for (int x = 1; x < W - 1; ++x) {
      uint8_t* px = row + 3 * x;
      const int own = bayer_color(f.pattern, x, y);
      const int cross = (up[x] + dn[x] + mid[x - 1] + mid[x + 1] + 2) >> 2;
      const int diag = (up[x - 1] + up[x + 1] + dn[x - 1] + dn[x + 1] + 2) >> 2;
      const int horiz = (mid[x - 1] + mid[x + 1] + 1) >> 1;
      const int vert = (up[x] + dn[x] + 1) >> 1;
      if (own == 1) {
        // Green site: the row neighbours carry one colour, the column the other.
        const int row_c = bayer_color(f.pattern, x + 1, y);
        px[1] = mid[x];
        px[row_c] = static_cast<uint8_t>(horiz);
        px[2 - row_c] = static_cast<uint8_t>(vert);
      } else {
        px[own] = mid[x];
        px[1] = static_cast<uint8_t>(cross);
        px[2 - own] = static_cast<uint8_t>(diag);
      }
    }
    demosaic_pixel(f, W - 1, y, row + 3 * (W - 1));
  }
  return out;
}

BayerFrame mosaic(const RgbImage& img, BayerPattern p) {
  img.validate();
  BayerFrame f(img.width, img.height, p);
  f.validate();
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) f.at(x, y) = img.at(x, y, bayer_color(p, x, y));
  }
  return f;
}

namespace {

std::vector<float> resized_unit(const RgbImage& img, int R, ResizeMode mode) {
  img.validate();
  if (R <= 0) throw ShapeError("network resolution must be positive");
  std::vector<float> out(static_cast<size_t>(3) * R * R);
  const size_t plane = static_cast<size_t>(R) * R;
  for (int y = 0; y < R; ++y) {
    for (int x = 0; x < R; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v;
        if (mode == ResizeMode::kNearest) {
          const int sx = static_cast<int>(static_cast<int64_t>(x) * img.width / R);
          const int sy = static_cast<int>(static_cast<int64_t>(y) * img.height / R);
          v = img.at(sx, sy, c);
        } else {
          const double fx = std::clamp((x + 0.5) * img.width / R - 0.5, 0.0, img.width - 1.0);
          const double fy = std::clamp((y + 0.5) * img.height / R - 0.5, 0.0, img.height - 1.0);
          const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
          const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
          const double ax = fx - x0, ay = fy - y0;
          v = (1 - ay) * ((1 - ax) * img.at(x0, y0, c) + ax * img.at(x1, y0, c)) +
              ay * ((1 - ax) * img.at(x0, y1, c) + ax * img.at(x1, y1, c));
        }
        out[c * plane + static_cast<size_t>(y) * R + x] = static_cast<float>(v / 255.0);
      }
    }
  }
  return out;
}

}  // namespace

FloatTensor to_float_input(const RgbImage& img, int resolution, ResizeMode mode) {
  FloatTensor t({1, 3, resolution, resolution});
  t.data = resized_unit(img, resolution, mode);
  return t;
}

QuantTensor to_net_input(const RgbImage& img, int resolution, const QParams& q,
                         ResizeMode mode) {
  q.validate();
  return quantize(to_float_input(img, resolution, mode), q);
}

// PNM ------------------------------------------------------------------------

namespace {

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
};

PnmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  PnmHeader h;
  auto token = [&]() {
    std::string t;
    int ch;
    while ((ch = in.get()) != EOF) {
      if (ch == '#') {
        while ((ch = in.get()) != EOF && ch != '\n') {}
        continue;
      }
      if (std::isspace(ch)) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(static_cast<char>(ch));
    }
    return t;
  };
  h.magic = token();
  try {
    h.width = std::stoi(token());
    h.height = std::stoi(token());
    h.maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error("malformed PNM header in " + path.string());
  }
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 255) {
    throw Error("unsupported PNM geometry or depth in " + path.string());
  }
  return h;
}

void read_payload(std::istream& in, std::vector<uint8_t>& data,
                  const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (static_cast<size_t>(in.gcount()) != data.size()) {
    throw Error("truncated PNM payload in " + path.string());
  }
}

}  // namespace

BayerFrame read_pgm(const std::filesystem::path& path, BayerPattern p) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const PnmHeader h = read_header(in, path);
  if (h.magic != "P5") throw Error(path.string() + " is not a binary PGM (P5)");
  BayerFrame f(h.width, h.height, p);
  read_payload(in, f.data, path);
  f.validate();
  return f;
}

void write_pgm(const std::filesystem::path& path, const BayerFrame& f) {
  f.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P5\n" << f.width << " " << f.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size()));
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const PnmHeader h = read_header(in, path);
  if (h.magic != "P6") throw Error(path.string() + " is not a binary PPM (P6)");
  RgbImage img(h.width, h.height);
  read_payload(in, img.data, path);
  return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  img.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
}

// Synthetic content -----------------------------------------------------------

RgbImage synthetic_scene(int width, int height, uint64_t seed, int num_classes,
                         std::vector<SceneObject>* objects) {
  if (width <= 0 || height <= 0) throw ShapeError("scene must be non-empty");
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
  };
  RgbImage img(width, height);
  const int base[3] = {uni(40, 120), uni(40, 120), uni(40, 120)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int gx = 60 * x / width, gy = 60 * y / height;
      img.at(x, y, 0) = static_cast<uint8_t>(base[0] + gx);
      img.at(x, y, 1) = static_cast<uint8_t>(base[1] + gy);
      img.at(x, y, 2) = static_cast<uint8_t>(base[2] + (gx + gy) / 2);
    }
  }
  if (objects) objects->clear();
  const int count = uni(1, 4);
  for (int i = 0; i < count; ++i) {
    SceneObject o;
    o.class_id = uni(0, std::max(0, num_classes - 1));
    const int bw = uni(std::max(2, width / 8), std::max(2, width / 3));
    const int bh = uni(std::max(2, height / 8), std::max(2, height / 3));
    o.x1 = uni(0, width - bw);
    o.y1 = uni(0, height - bh);
    o.x2 = o.x1 + bw;
    o.y2 = o.y1 + bh;
    const auto col = class_color(o.class_id);
    for (int y = o.y1; y < o.y2; ++y)
      for (int x = o.x1; x < o.x2; ++x)
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = col[c];
    if (objects) objects->push_back(o);
  }
  return img;
}

std::array<uint8_t, 3> class_color(int class_id) {
  static constexpr std::array<std::array<uint8_t, 3>, 10> kPalette{{
      {230, 25, 75}, {60, 180, 75}, {255, 225, 25}, {0, 130, 200},
      {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
      {210, 245, 60}, {250, 190, 190},
  }};
  const auto& c = kPalette[static_cast<size_t>(std::abs(class_id)) % kPalette.size()];
  // Later cycles of the palette are darkened so classes stay distinct.
  const int shade = static_cast<int>(std::abs(class_id) / kPalette.size()) % 4;
  return {static_cast<uint8_t>(c[0] >> shade), static_cast<uint8_t>(c[1] >> shade),
          static_cast<uint8_t>(c[2] >> shade)};
}

void draw_box(RgbImage& img, double x1, double y1, double x2, double y2,
              const std::array<uint8_t, 3>& color) {
  const int ix1 = std::clamp(static_cast<int>(std::floor(x1)), 0, img.width - 1);
  const int iy1 = std::clamp(static_cast<int>(std::floor(y1)), 0, img.height - 1);
  const int ix2 = std::clamp(static_cast<int>(std::ceil(x2)) - 1, 0, img.width - 1);
  const int iy2 = std::clamp(static_cast<int>(std::ceil(y2)) - 1, 0, img.height - 1);
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
  };
  for (int t = 0; t < 2; ++t) {
    for (int x = ix1; x <= ix2; ++x) {
      put(x, iy1 + t);
      put(x, iy2 - t);
    }
    for (int y = iy1; y <= iy2; ++y) {
      put(ix1 + t, y);
      put(ix2 - t, y);
    }
  }
}

// Frame sources ---------------------------------------------------------------

SyntheticFrames::SyntheticFrames(int width, int height, BayerPattern pattern,
                                 uint64_t seed, int count, int num_classes)
    : width_(width), height_(height), pattern_(pattern), seed_(seed),
      count_(count), classes_(num_classes) {
  if ((width & 1) || (height & 1) || width <= 0 || height <= 0) {
    throw ShapeError("synthetic frames need even positive dimensions");
  }
}

bool SyntheticFrames::produce(BayerFrame& out) {
  if (index_ >= count_) return false;
  const uint64_t s = seed_ * 0x9E3779B97F4A7C15ull + static_cast<uint64_t>(index_);
  out = mosaic(synthetic_scene(width_, height_, s, classes_), pattern_);
  ++index_;
  return true;
}

DirectoryFrames::DirectoryFrames(const std::filesystem::path& dir,
                                 BayerPattern pattern)
    : pattern_(pattern) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("frame directory " + dir.string() + " does not exist");
  }
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") files_.push_back(e.path());
  }
  std::sort(files_.begin(), files_.end());
}

bool DirectoryFrames::produce(BayerFrame& out) {
  if (index_ >= files_.size()) return false;
  out = read_pgm(files_[index_++], pattern_);
  return true;
}

DoubleBufferedSource::DoubleBufferedSource(std::unique_ptr<FrameProvider> provider,
                                           double capture_ms)
    : provider_(std::move(provider)), capture_ms_(capture_ms) {
  if (!provider_) throw Error("frame source needs a provider");
  if (!(capture_ms >= 0.0)) throw Error("capture time must be >= 0");
}

bool DoubleBufferedSource::start_capture(double at) {
  BayerFrame& buf = buffers_[static_cast<size_t>(captured_ % 2)];
  if (!provider_->produce(buf)) {
    pending_ = false;
    return false;
  }
  const double start = std::max(at, camera_free_);
  pending_ready_ = start + capture_ms_;
  camera_free_ = pending_ready_;
  pending_ = true;
  ++captured_;
  return true;
}

const BayerFrame* DoubleBufferedSource::next() {
  if (handed_ == 0 && captured_ == 0) start_capture(now_);
  if (!pending_) return nullptr;
  // Wait for the frame in flight, hand it over, and start the next capture
  // into the buffer the consumer just released.
  now_ = std::max(now_, pending_ready_);
  const BayerFrame* frame = &buffers_[static_cast<size_t>(handed_ % 2)];
  ++handed_;
  delivered_.push_back(now_);
  start_capture(now_);
  return frame;
}

void DoubleBufferedSource::processed(double ms) {
  if (!(ms >= 0.0)) throw Error("processing time must be >= 0");
  now_ += ms;
}

double DoubleBufferedSource::last_period_ms() const {
  if (delivered_.size() < 2) return 0.0;
  return delivered_.back() - delivered_[delivered_.size() - 2];
}

}  // namespace tyrt
