// Copyright 2026 The SafeAug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef SAFEAUG_TESTS_FIXTURES_HPP
#define SAFEAUG_TESTS_FIXTURES_HPP

#include <algorithm>
#include <optional>

#include "safeaug/depth.hpp"
#include "safeaug/image.hpp"
#include "safeaug/synthetic.hpp"
#include "safeaug/types.hpp"

namespace safeaug::fixture {

inline constexpr Rgb kPlateColor{230, 20, 20};
inline constexpr Rgb kWallColor{20, 90, 200};

/// Fronto-parallel plate of `width` x `height` meters centred on the optical axis at
/// depth `z`, in front of a flat wall at `wall_z`. Colors are flat so the plate's image
/// extent can be read off directly.
struct PlateScene {
  RgbImage image;
  DepthMap depth;
  BoundingBox box;  // pixels whose centre falls on the plate
};

inline PlateScene plate_scene(const CameraIntrinsics& k, double z, double width = 1.0, double height = 1.0,
                              double wall_z = 50.0) {
  PlateScene s{RgbImage(k.width, k.height, kWallColor), DepthMap(k.width, k.height), {}};
  int u0 = k.width;
  int v0 = k.height;
  int u1 = -1;
  int v1 = -1;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const double x = (u - k.cx) / k.fx * z;
      const double y = (v - k.cy) / k.fy * z;
      if (std::abs(x) <= 0.5 * width && std::abs(y) <= 0.5 * height) {
        s.image(u, v) = kPlateColor;
        s.depth.set(u, v, static_cast<float>(z));
        u0 = std::min(u0, u);
        v0 = std::min(v0, v);
        u1 = std::max(u1, u);
        v1 = std::max(v1, v);
      } else {
        s.depth.set(u, v, static_cast<float>(wall_z));
      }
    }
  }
  s.box = {double(u0), double(v0), double(u1 + 1), double(v1 + 1), 0.9, 2};
  return s;
}

/// Horizontal extent (max - min + 1) of `color` along row v, or 0 if absent.
inline int color_extent(const RgbImage& image, int v, const Rgb& color) {
  int lo = image.width();
  int hi = -1;
  for (int u = 0; u < image.width(); ++u) {
    if (image(u, v) == color) {
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
  }
  return hi < lo ? 0 : hi - lo + 1;
}

inline CameraIntrinsics kitti_intrinsics() { return synthetic::kitti_like_intrinsics(1242, 375); }

}  // namespace safeaug::fixture

#endif  // SAFEAUG_TESTS_FIXTURES_HPP
