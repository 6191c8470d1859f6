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

// Serial demosaic kept as the reference for the parallel one.

#include "tyrt/imaging.hpp"

namespace tyrt {

RgbImage demosaic_bilinear_ref(const BayerFrame& f) {
  f.validate();
  RgbImage out(f.width, f.height);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      int sum[3] = {0, 0, 0}, cnt[3] = {0, 0, 0};
      for (int yy = y - 1; yy <= y + 1; ++yy) {
        for (int xx = x - 1; xx <= x + 1; ++xx) {
          if (yy < 0 || yy >= f.height || xx < 0 || xx >= f.width) continue;
          const int c = bayer_color(f.pattern, xx, yy);
          sum[c] += f.at(xx, yy);
          ++cnt[c];
        }
      }
      const int own = bayer_color(f.pattern, x, y);
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = c == own
                              ? f.at(x, y)
                              : static_cast<uint8_t>((sum[c] + cnt[c] / 2) / cnt[c]);
      }
    }
  }
  return out;
}

}  // namespace tyrt
