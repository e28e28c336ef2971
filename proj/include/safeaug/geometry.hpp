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

#ifndef SAFEAUG_GEOMETRY_HPP
#define SAFEAUG_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "safeaug/depth.hpp"
#include "safeaug/error.hpp"
#include "safeaug/image.hpp"
#include "safeaug/types.hpp"

namespace safeaug {

/// Camera frame: +x right, +y down, +z forward. Meters.
using Vec3 = std::array<double, 3>;

struct Pixel {
  int u = 0;
  int v = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Colored points with the pixel each one was unprojected from. All three arrays share length.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Rgb> colors;
  std::vector<Pixel> source_pixels;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] bool empty() const noexcept { return points.empty(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

struct RenderResult {
  RgbImage image;
  Mask covered;      // received at least one point
  Mask hole_filled;  // taken from the fallback image (subset of !covered)

  friend bool operator==(const RenderResult&, const RenderResult&) = default;
};

struct RenderOptions {
  /// Replace each hole pixel by the per-channel median of its covered 3x3 neighbours.
  bool hole_median = false;
};

inline void check_dimensions(const CameraIntrinsics& k, int width, int height, const char* what) {
  if (width != k.width || height != k.height) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " is " + std::to_string(width) + "x" +
                                                   std::to_string(height) + ", camera expects " +
                                                   std::to_string(k.width) + "x" + std::to_string(k.height));
  }
}

/// One point per valid depth pixel: ((u - cx) / fx * Z, (v - cy) / fy * Z, Z), colored from `image`.
inline PointCloud unproject(const DepthMap& depth, const RgbImage& image, const CameraIntrinsics& k) {
  check_dimensions(k, depth.width(), depth.height(), "depth map");
  check_dimensions(k, image.width(), image.height(), "image");

  PointCloud cloud;
  const auto n_valid = static_cast<std::size_t>(std::count(depth.valid.data().begin(), depth.valid.data().end(), 1));
  cloud.points.reserve(n_valid);
  cloud.colors.reserve(n_valid);
  cloud.source_pixels.reserve(n_valid);
  for (int v = 0; v < depth.height(); ++v) {
    const double ry = (v - k.cy) / k.fy;
    for (int u = 0; u < depth.width(); ++u) {
      if (!depth.is_valid(u, v)) continue;
      const double z = depth.depth(u, v);
      cloud.points.push_back({(u - k.cx) / k.fx * z, ry * z, z});
      cloud.colors.push_back(image(u, v));
      cloud.source_pixels.push_back({u, v});
    }
  }
  return cloud;
}

inline Projection project(const Vec3& point, const CameraIntrinsics& k) {
  const double z = point[2];
  if (!(z > 0.0)) throw Error(ErrorCode::kNonPositiveDepth, "z = " + std::to_string(z));
  return {k.fx * point[0] / z + k.cx, k.fy * point[1] / z + k.cy, z};
}

namespace detail {

inline double median_of(std::vector<double> values) {
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace detail

/// Median depth of the points whose source pixel lies inside `box`.
inline std::optional<double> median_depth_in_box(const PointCloud& cloud, const BoundingBox& box) {
  std::vector<double> zs;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& px = cloud.source_pixels[i];
    if (box.contains_pixel(px.u, px.v)) zs.push_back(cloud.points[i][2]);
  }
  if (zs.empty()) return std::nullopt;
  return detail::median_of(std::move(zs));
}

/// Same statistic straight from a depth map, without building a cloud.
inline std::optional<double> median_depth_in_box(const DepthMap& depth, const BoundingBox& box) {
  std::vector<double> zs;
  const int u0 = std::max(0, static_cast<int>(std::ceil(box.x_min)));
  const int v0 = std::max(0, static_cast<int>(std::ceil(box.y_min)));
  for (int v = v0; v < depth.height() && v < box.y_max; ++v) {
    for (int u = u0; u < depth.width() && u < box.x_max; ++u) {
      if (depth.is_valid(u, v)) zs.push_back(depth.depth(u, v));
    }
  }
  if (zs.empty()) return std::nullopt;
  return detail::median_of(std::move(zs));
}

/// Indices of in-box points whose depth is within +-depth_band of the in-box median.
/// The gate drops background seen through windows or around the silhouette.
inline std::vector<std::size_t> segment_vehicle_points(const PointCloud& cloud, const BoundingBox& box,
                                                       double depth_band) {
  if (!(depth_band > 0.0)) throw Error(ErrorCode::kInvalidConfig, "depth_band must be positive");
  std::vector<std::size_t> in_box;
  std::vector<double> zs;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& px = cloud.source_pixels[i];
    if (box.contains_pixel(px.u, px.v)) {
      in_box.push_back(i);
      zs.push_back(cloud.points[i][2]);
    }
  }
  if (in_box.empty()) throw Error(ErrorCode::kEmptySegment, "no valid depth inside the front-vehicle box");
  const double median = detail::median_of(zs);
  std::vector<std::size_t> selected;
  for (std::size_t j = 0; j < in_box.size(); ++j) {
    if (std::abs(zs[j] - median) <= depth_band) selected.push_back(in_box[j]);
  }
  return selected;
}

inline constexpr double kDefaultMinZ = 0.5;

/// Moves the selected points by `shift`; everything else is copied untouched.
/// Throws DegenerateShift when a moved point would end at z <= min_z.
inline PointCloud translate_points(const PointCloud& cloud, std::span<const std::size_t> indices, const Vec3& shift,
                                   double min_z = kDefaultMinZ) {
  for (auto i : indices) {
    if (i >= cloud.size()) throw Error(ErrorCode::kInvalidConfig, "point index out of range");
    if (!(cloud.points[i][2] + shift[2] > min_z)) {
      throw Error(ErrorCode::kDegenerateShift, "point " + std::to_string(i) + " would reach z = " +
                                                   std::to_string(cloud.points[i][2] + shift[2]));
    }
  }
  PointCloud out = cloud;
  for (auto i : indices) {
    for (int a = 0; a < 3; ++a) out.points[i][a] = cloud.points[i][a] + shift[a];
  }
  return out;
}

/// Nearest-pixel splatting with a z-buffer. Equal depths keep the lower point index.
/// Pixels that receive no point are copied from `fallback`.
inline RenderResult render(const PointCloud& cloud, const CameraIntrinsics& k, const RgbImage& fallback,
                           const RenderOptions& options = {}) {
  check_dimensions(k, fallback.width(), fallback.height(), "fallback image");
  const int w = k.width;
  const int h = k.height;
  Grid<double> zbuf(w, h, std::numeric_limits<double>::infinity());
  Grid<std::int64_t> winner(w, h, -1);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    if (!(p[2] > 0.0)) continue;
    const auto proj = project(p, k);
    const double uf = std::floor(proj.u + 0.5);
    const double vf = std::floor(proj.v + 0.5);
    if (uf < 0.0 || vf < 0.0 || uf >= w || vf >= h) continue;
    const int u = static_cast<int>(uf);
    const int v = static_cast<int>(vf);
    if (proj.z < zbuf(u, v)) {
      zbuf(u, v) = proj.z;
      winner(u, v) = static_cast<std::int64_t>(i);
    }
  }

  RenderResult out{RgbImage(w, h), Mask(w, h, 0), Mask(w, h, 0)};
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const auto idx = winner(u, v);
      if (idx >= 0) {
        out.image(u, v) = cloud.colors[static_cast<std::size_t>(idx)];
        out.covered(u, v) = 1;
      } else {
        out.image(u, v) = fallback(u, v);
        out.hole_filled(u, v) = 1;
      }
    }
  }

  if (options.hole_median) {
    const RgbImage splatted = out.image;
    std::array<std::vector<std::uint8_t>, 3> channel;
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (out.hole_filled(u, v) == 0) continue;
        for (auto& c : channel) c.clear();
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            if (!out.covered.contains(u + du, v + dv) || out.covered(u + du, v + dv) == 0) continue;
            for (int c = 0; c < 3; ++c) channel[c].push_back(splatted(u + du, v + dv)[c]);
          }
        }
        if (channel[0].empty()) continue;
        for (int c = 0; c < 3; ++c) {
          auto& vals = channel[c];
          std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2), vals.end());
          out.image(u, v)[c] = vals[vals.size() / 2];
        }
      }
    }
  }
  return out;
}

/// Debug dump: one `x y z r g b` line per point.
inline void write_cloud_ascii(std::ostream& out, const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    const auto& c = cloud.colors[i];
    out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << int{c[0]} << ' ' << int{c[1]} << ' ' << int{c[2]} << '\n';
  }
}

/// Bounding box of the projections of the selected points, in pixel units.
inline std::optional<BoundingBox> projected_bounds(const PointCloud& cloud, std::span<const std::size_t> indices,
                                                   const CameraIntrinsics& k) {
  if (indices.empty()) return std::nullopt;
  double u0 = std::numeric_limits<double>::infinity();
  double v0 = u0;
  double u1 = -u0;
  double v1 = -u0;
  for (auto i : indices) {
    const auto p = project(cloud.points[i], k);
    u0 = std::min(u0, p.u);
    v0 = std::min(v0, p.v);
    u1 = std::max(u1, p.u);
    v1 = std::max(v1, p.v);
  }
  BoundingBox box{std::clamp(std::floor(u0 + 0.5), 0.0, double(k.width)),
                  std::clamp(std::floor(v0 + 0.5), 0.0, double(k.height)),
                  std::clamp(std::floor(u1 + 0.5) + 1.0, 0.0, double(k.width)),
                  std::clamp(std::floor(v1 + 0.5) + 1.0, 0.0, double(k.height)),
                  1.0,
                  0};
  if (!(box.x_min < box.x_max && box.y_min < box.y_max)) return std::nullopt;
  return box;
}

}  // namespace safeaug

#endif  // SAFEAUG_GEOMETRY_HPP
