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

#ifndef SAFEAUG_TYPES_HPP
#define SAFEAUG_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "safeaug/error.hpp"

namespace safeaug {

/// Pinhole camera parameters in pixels. Pixel centers sit on integer coordinates.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::kInvalidConfig, "focal lengths must be positive");
    if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
      throw Error(ErrorCode::kInvalidConfig, "principal point outside the image");
    }
  }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Ego-vehicle forward speed (m/s) and acceleration (m/s^2).
struct Kinematics {
  double speed = 0.0;
  double accel = 0.0;

  friend bool operator==(const Kinematics&, const Kinematics&) = default;
};

/// Axis-aligned 2D detection in pixel coordinates.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double confidence = 0.0;
  int class_id = 0;

  [[nodiscard]] double width() const noexcept { return x_max - x_min; }
  [[nodiscard]] double height() const noexcept { return y_max - y_min; }
  [[nodiscard]] double area() const noexcept { return width() * height(); }
  [[nodiscard]] double center_x() const noexcept { return 0.5 * (x_min + x_max); }
  [[nodiscard]] double center_y() const noexcept { return 0.5 * (y_min + y_max); }

  [[nodiscard]] bool valid() const noexcept {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max) &&
           x_min < x_max && y_min < y_max && confidence >= 0.0 && confidence <= 1.0;
  }

  /// Pixel (u, v) belongs to the box when its center lies in [min, max).
  [[nodiscard]] bool contains_pixel(int u, int v) const noexcept {
    return u >= x_min && u < x_max && v >= y_min && v < y_max;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union; 0 for disjoint boxes.
inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

/// Smallest count covering a fraction of n items, robust to representation error in fraction * n.
inline std::size_t ceil_count(double fraction, std::size_t n) {
  const double exact = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

}  // namespace safeaug

#endif  // SAFEAUG_TYPES_HPP
