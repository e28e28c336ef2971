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

#ifndef SAFEAUG_SYNTHETIC_HPP
#define SAFEAUG_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "safeaug/depth.hpp"
#include "safeaug/image.hpp"
#include "safeaug/io.hpp"
#include "safeaug/types.hpp"

namespace safeaug::synthetic {

/// Rectified KITTI camera 02 intrinsics scaled to a smaller image.
inline CameraIntrinsics kitti_like_intrinsics(int width, int height) {
  const double sx = width / 1242.0;
  const double sy = height / 375.0;
  return {721.5377 * sx, 721.5377 * sy, 609.5593 * sx, 172.854 * sy, width, height};
}

/// Rear face of a lead vehicle: an axis-aligned plate perpendicular to the optical axis.
struct Vehicle {
  double lateral = 0.0;  // x of the plate center (m)
  double depth = 10.0;   // z of the plate (m)
  double width = 1.8;
  double height = 1.5;
  Rgb color{40, 40, 48};
};

struct Scene {
  std::optional<Vehicle> vehicle;
  double camera_height = 1.65;  // ground plane at y = camera_height
  double far_depth = 60.0;      // depth of the sky / background wall
  double max_ground_depth = 80.0;
  double brightness = 1.0;
  std::uint64_t texture_seed = 0;
};

struct RenderedScene {
  RgbImage image;
  DepthMap depth;
  std::optional<BoundingBox> vehicle_box;  // projection of the plate, pixel units
};

namespace detail {

inline std::uint8_t shade(double value, double brightness) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(value * brightness), 0L, 255L));
}

inline double hash_noise(std::uint64_t seed, int u, int v) {
  std::uint64_t h = seed ^ (static_cast<std::uint64_t>(u) * 0x9e3779b97f4a7c15ULL) ^
                    (static_cast<std::uint64_t>(v) * 0xc2b2ae3d27d4eb4fULL);
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<double>(h & 0xffff) / 65535.0 - 0.5;
}

}  // namespace detail

/// Ray-casts a road scene: sky/background wall, flat ground with lane marks, and an
/// optional vehicle plate. Depth is exact per pixel.
inline RenderedScene render_scene(const Scene& scene, const CameraIntrinsics& k) {
  RenderedScene out{RgbImage(k.width, k.height), DepthMap(k.width, k.height), std::nullopt};
  const auto& veh = scene.vehicle;
  for (int v = 0; v < k.height; ++v) {
    const double ry = (v - k.cy) / k.fy;
    for (int u = 0; u < k.width; ++u) {
      const double rx = (u - k.cx) / k.fx;
      const double noise = 12.0 * detail::hash_noise(scene.texture_seed, u, v);
      if (veh) {
        const double x = rx * veh->depth;
        const double y = ry * veh->depth;
        const double top = scene.camera_height - veh->height;
        if (std::abs(x - veh->lateral) <= 0.5 * veh->width && y >= top && y <= scene.camera_height) {
          // rear window band in the upper third
          const bool window = y < top + veh->height / 3.0;
          const double f = window ? 0.6 : 1.0;
          out.image(u, v) = {detail::shade(veh->color[0] * f + noise * 0.3, scene.brightness),
                             detail::shade(veh->color[1] * f + noise * 0.3, scene.brightness),
                             detail::shade(veh->color[2] * f + noise * 0.3, scene.brightness)};
          out.depth.set(u, v, static_cast<float>(veh->depth));
          continue;
        }
      }
      if (ry > 0.0) {
        const double z = std::min(scene.camera_height / ry, scene.max_ground_depth);
        const double x = rx * z;
        const bool lane = std::abs(std::abs(x) - 1.8) < 0.08 && std::fmod(z, 6.0) < 3.0;
        const double base = lane ? 225.0 : 118.0 + noise;
        out.image(u, v) = {detail::shade(base, scene.brightness), detail::shade(base, scene.brightness),
                           detail::shade(base + 4.0, scene.brightness)};
        out.depth.set(u, v, static_cast<float>(z));
      } else {
        const double sky = 200.0 + 40.0 * ry + noise * 0.5;
        out.image(u, v) = {detail::shade(sky - 40.0, scene.brightness), detail::shade(sky - 10.0, scene.brightness),
                           detail::shade(sky + 20.0, scene.brightness)};
        out.depth.set(u, v, static_cast<float>(scene.far_depth));
      }
    }
  }
  if (veh) {
    const double top = scene.camera_height - veh->height;
    BoundingBox box{k.fx * (veh->lateral - 0.5 * veh->width) / veh->depth + k.cx,
                    k.fy * top / veh->depth + k.cy,
                    k.fx * (veh->lateral + 0.5 * veh->width) / veh->depth + k.cx,
                    k.fy * scene.camera_height / veh->depth + k.cy,
                    0.9,
                    2};
    box.x_min = std::clamp(box.x_min, 0.0, double(k.width));
    box.x_max = std::clamp(box.x_max, 0.0, double(k.width));
    box.y_min = std::clamp(box.y_min, 0.0, double(k.height));
    box.y_max = std::clamp(box.y_max, 0.0, double(k.height));
    if (box.x_min < box.x_max && box.y_min < box.y_max) out.vehicle_box = box;
  }
  return out;
}

/// Generator settings for a car-following corpus with label a = -c * v / Z_front.
struct CorpusSpec {
  std::size_t frames = 300;
  int width = 416;
  int height = 126;
  double label_c = 1.0;
  double label_noise = 0.05;
  double no_vehicle_fraction = 0.1;
  double min_depth = 5.0;
  double max_depth = 40.0;
  double min_speed = 3.0;
  double max_speed = 20.0;
  std::uint64_t seed = 1;
  std::string sequence = "2011_09_26_drive_0001_sync";
};

inline std::string oxts_line(double speed, double accel) {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < 30; ++i) {
    if (i > 0) out << ' ';
    if (i == 8) out << speed;
    else if (i == 14) out << accel;
    else if (i >= 25) out << 4;  // navstat / numsats / modes are integers in the real format
    else out << 0.0;
  }
  out << '\n';
  return out.str();
}

inline std::string calibration_text(const CameraIntrinsics& k, int camera_index = 2) {
  std::ostringstream out;
  out.precision(17);
  const auto idx = "0" + std::to_string(camera_index);
  out << "calib_time: synthetic\n";
  out << "S_rect_" << idx << ": " << k.width << ' ' << k.height << '\n';
  out << "P_rect_" << idx << ": " << k.fx << " 0 " << k.cx << " 0 0 " << k.fy << ' ' << k.cy << " 0 0 0 1 0\n";
  return out.str();
}

/// Writes a KITTI-raw-style corpus (images, OXTS, quantized16 depth, detections, calibration)
/// under `root`. Returns the intrinsics used.
inline CameraIntrinsics write_corpus(const std::filesystem::path& root, const CorpusSpec& spec) {
  namespace fs = std::filesystem;
  const auto k = kitti_like_intrinsics(spec.width, spec.height);
  const auto seq = root / spec.sequence;
  for (const char* sub : {"image_02/data", "oxts/data", "depth/data", "detections/data"}) {
    fs::create_directories(seq / sub);
  }
  write_file_atomic(root / "calib_cam_to_cam.txt", calibration_text(k));

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < spec.frames; ++i) {
    Scene scene;
    scene.texture_seed = rng();
    scene.brightness = 0.9 + 0.2 * unit(rng);
    const double speed = spec.min_speed + (spec.max_speed - spec.min_speed) * unit(rng);
    double accel = 0.0;
    if (unit(rng) >= spec.no_vehicle_fraction) {
      Vehicle veh;
      veh.depth = spec.min_depth + (spec.max_depth - spec.min_depth) * unit(rng);
      veh.lateral = 0.4 * (unit(rng) - 0.5);
      const auto tone = static_cast<std::uint8_t>(25 + 50 * unit(rng));
      veh.color = {tone, tone, static_cast<std::uint8_t>(tone + 10)};
      scene.vehicle = veh;
      accel = -spec.label_c * speed / veh.depth + spec.label_noise * gauss(rng);
    } else {
      accel = 0.2 * gauss(rng);
    }
    const auto rendered = render_scene(scene, k);

    char stem[16];
    std::snprintf(stem, sizeof(stem), "%010zu", i);
    write_png_rgb(seq / "image_02/data" / (std::string(stem) + ".png"), rendered.image);
    save_depth_map(seq / "depth/data" / (std::string(stem) + ".png"), rendered.depth, 1.0 / 256.0,
                   DepthMode::kQuantized16);
    write_file_atomic(seq / "oxts/data" / (std::string(stem) + ".txt"), oxts_line(speed, accel));

    nlohmann::ordered_json dets = nlohmann::ordered_json::array();
    if (rendered.vehicle_box) {
      const auto& b = *rendered.vehicle_box;
      dets.push_back({{"x1", b.x_min}, {"y1", b.y_min}, {"x2", b.x_max}, {"y2", b.y_max}, {"conf", 0.9}, {"cls", 2}});
      // a jittered duplicate, as a detector would emit before NMS
      dets.push_back({{"x1", b.x_min + 1.0}, {"y1", b.y_min}, {"x2", b.x_max + 1.0}, {"y2", b.y_max}, {"conf", 0.6},
                      {"cls", 2}});
    }
    write_file_atomic(seq / "detections/data" / (std::string(stem) + ".json"), dets.dump() + '\n');
  }
  return k;
}

}  // namespace safeaug::synthetic

#endif  // SAFEAUG_SYNTHETIC_HPP
