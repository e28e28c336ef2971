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

#ifndef SAFEAUG_AUGMENT_HPP
#define SAFEAUG_AUGMENT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "safeaug/depth.hpp"
#include "safeaug/error.hpp"
#include "safeaug/geometry.hpp"
#include "safeaug/image.hpp"
#include "safeaug/io.hpp"
#include "safeaug/kitti.hpp"
#include "safeaug/manifest.hpp"
#include "safeaug/parallel.hpp"
#include "safeaug/types.hpp"

namespace safeaug {

struct AugmentationConfig {
  double accel_scale = 1.5;
  double body_length = 4.5;  // meters
  double shift_fraction = 0.5;
  double candidate_max_distance = 15.0;  // meters
  double candidate_fraction_cap = 0.10;
  double depth_band = 2.0;  // meters around the in-box median depth
  double min_z = kDefaultMinZ;
  bool estimate_body_length = false;  // body_length := box width * depth / fx
  bool hole_median = false;
  std::uint64_t rng_seed = 0;
  unsigned jobs = 1;

  void validate() const {
    if (!(accel_scale > 1.0) || !std::isfinite(accel_scale)) throw Error(ErrorCode::kInvalidConfig, "augment.accel_scale must exceed 1");
    if (!(shift_fraction > 0.0 && shift_fraction < 1.0)) throw Error(ErrorCode::kInvalidConfig, "augment.shift_fraction must be in (0, 1)");
    if (!(body_length > 0.0) || !std::isfinite(body_length)) throw Error(ErrorCode::kInvalidConfig, "augment.body_length must be positive");
    if (!(candidate_fraction_cap > 0.0 && candidate_fraction_cap <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "augment.candidate_fraction_cap must be in (0, 1]");
    }
    if (!(candidate_max_distance > 0.0)) throw Error(ErrorCode::kInvalidConfig, "augment.candidate_max_distance");
    if (!(depth_band > 0.0)) throw Error(ErrorCode::kInvalidConfig, "augment.depth_band must be positive");
    if (!(min_z > 0.0)) throw Error(ErrorCode::kInvalidConfig, "augment.min_z must be positive");
  }
};

/// Distance the front vehicle moves toward the camera, along -z.
inline double compute_shift(const AugmentationConfig& config) {
  config.validate();
  return config.shift_fraction * config.body_length;
}

inline double adjust_acceleration(double accel, const AugmentationConfig& config) { return config.accel_scale * accel; }

using FrontDepthFn = std::function<std::optional<double>(const FrameRecord&)>;

/// Median depth inside the front box, read from the record's depth map.
inline FrontDepthFn depth_map_front_depth(const DatasetManifest& manifest) {
  return [&manifest](const FrameRecord& r) -> std::optional<double> {
    if (!r.front_box || !r.depth_path) return std::nullopt;
    return median_depth_in_box(load_record_depth(manifest, r), *r.front_box);
  };
}

/// Eligible originals whose front vehicle is nearer than candidate_max_distance, nearest
/// first, capped at ceil(candidate_fraction_cap * originals).
inline std::vector<std::string> select_candidates(const DatasetManifest& manifest, const AugmentationConfig& config,
                                                  const FrontDepthFn& front_depth) {
  config.validate();
  struct Scored {
    double depth;
    const FrameRecord* record;
  };
  std::vector<Scored> scored;
  std::size_t originals = 0;
  for (const auto& r : manifest.records) {
    if (r.origin != Origin::kOriginal) continue;
    ++originals;
    if (!r.front_box || !r.augmentation_eligible()) continue;
    const auto depth = front_depth(r);
    if (depth && *depth < config.candidate_max_distance) scored.push_back({*depth, &r});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.record->frame_id < b.record->frame_id;
  });
  const auto cap = ceil_count(config.candidate_fraction_cap, originals);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < scored.size() && i < cap; ++i) ids.push_back(scored[i].record->frame_id);
  return ids;
}

inline std::vector<std::string> select_candidates(const DatasetManifest& manifest, const AugmentationConfig& config) {
  return select_candidates(manifest, config, depth_map_front_depth(manifest));
}

/// Result of moving the front vehicle in one frame.
struct AugmentedScene {
  RenderResult render;
  std::optional<BoundingBox> front_box;  // bounds of the moved vehicle after projection
  double shift = 0.0;
  std::size_t moved_points = 0;
  Mask footprint;  // source pixels of moved points plus the pixels they land on
};

/// unproject -> segment -> translate by (0, 0, -shift) -> render over the original image.
inline AugmentedScene augment_scene(const RgbImage& image, const DepthMap& depth, const BoundingBox& front_box,
                                    const CameraIntrinsics& k, const AugmentationConfig& config) {
  const auto cloud = unproject(depth, image, k);
  const auto indices = segment_vehicle_points(cloud, front_box, config.depth_band);

  double shift = compute_shift(config);
  if (config.estimate_body_length) {
    const auto median = median_depth_in_box(cloud, front_box);
    if (median) shift = config.shift_fraction * front_box.width() * *median / k.fx;
  }

  const auto moved = translate_points(cloud, indices, {0.0, 0.0, -shift}, config.min_z);
  AugmentedScene scene;
  scene.render = render(moved, k, image, RenderOptions{config.hole_median});
  scene.front_box = projected_bounds(moved, indices, k);
  if (scene.front_box) {
    scene.front_box->confidence = front_box.confidence;
    scene.front_box->class_id = front_box.class_id;
  }
  scene.shift = shift;
  scene.moved_points = indices.size();
  scene.footprint = Mask(k.width, k.height, 0);
  for (auto i : indices) {
    const auto& src = cloud.source_pixels[i];
    scene.footprint(src.u, src.v) = 1;
    const auto p = project(moved.points[i], k);
    const int u = static_cast<int>(std::floor(p.u + 0.5));
    const int v = static_cast<int>(std::floor(p.v + 0.5));
    if (scene.footprint.contains(u, v)) scene.footprint(u, v) = 1;
  }
  return scene;
}

struct FrameOutcome {
  std::optional<FrameRecord> record;
  std::string frame_id;
  std::string skip_reason;  // empty on success
  bool positive_accel = false;
};

inline std::string augmented_frame_id(const std::string& parent) { return parent + "#aug"; }

inline std::filesystem::path augmented_image_path(const std::filesystem::path& out_root, const std::string& parent) {
  return out_root / "augmented" / (parent + ".png");
}

/// Augments one original frame and writes `<out_root>/augmented/<frame_id>.png`.
/// Failures become a skip reason; they never throw.
inline FrameOutcome augment_frame(const FrameRecord& frame, const DatasetManifest& manifest,
                                  const AugmentationConfig& config, const std::filesystem::path& out_root) {
  FrameOutcome outcome;
  outcome.frame_id = frame.frame_id;
  if (!frame.front_box) {
    outcome.skip_reason = "NoFrontVehicle";
    return outcome;
  }
  if (!frame.augmentation_eligible()) {
    outcome.skip_reason = "Ineligible";
    return outcome;
  }
  try {
    const auto image = read_png_rgb(manifest.resolve(frame.image_path));
    const auto depth = load_record_depth(manifest, frame);
    check_dimensions(manifest.intrinsics, depth.width(), depth.height(), "depth map");
    check_dimensions(manifest.intrinsics, image.width(), image.height(), "image");
    const auto scene = augment_scene(image, depth, *frame.front_box, manifest.intrinsics, config);

    const auto path = augmented_image_path(out_root, frame.frame_id);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    write_png_rgb(tmp, scene.render.image);
    std::filesystem::rename(tmp, path);

    FrameRecord r;
    r.frame_id = augmented_frame_id(frame.frame_id);
    r.image_path = std::filesystem::absolute(path).lexically_normal().generic_string();
    r.kinematics = {frame.kinematics.speed, adjust_acceleration(frame.kinematics.accel, config)};
    r.front_box = scene.front_box;
    r.origin = Origin::kAugmented;
    r.parent_id = frame.frame_id;
    outcome.record = std::move(r);
    outcome.positive_accel = frame.kinematics.accel > 0.0;
  } catch (const Error& e) {
    outcome.skip_reason = std::string(to_string(e.code()));
  } catch (const std::exception& e) {
    outcome.skip_reason = std::string("Error: ") + e.what();
  }
  return outcome;
}

struct AugmentReport {
  std::vector<std::string> candidates;
  std::vector<std::string> augmented;
  std::vector<std::pair<std::string, std::string>> skipped;  // frame_id, reason
  std::vector<std::string> positive_accel_warnings;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["candidates"] = candidates.size();
    j["augmented"] = augmented.size();
    j["skipped"] = nlohmann::ordered_json::array();
    for (const auto& [id, reason] : skipped) j["skipped"].push_back({{"frame_id", id}, {"reason", reason}});
    j["positive_accel_warnings"] = positive_accel_warnings;
    return j;
  }
};

struct AugmentResult {
  DatasetManifest manifest;
  AugmentReport report;
};

/// All input records unchanged plus one augmented record per successful candidate.
inline AugmentResult augment_dataset(const DatasetManifest& manifest, const AugmentationConfig& config,
                                     const std::filesystem::path& out_root) {
  config.validate();
  AugmentResult result;
  result.manifest = manifest;
  auto& report = result.report;
  report.candidates = select_candidates(manifest, config);
  if (report.candidates.empty()) {
    LogLine("warn", "augment").kv("message", "no_candidates");
    return result;
  }

  std::vector<FrameOutcome> outcomes(report.candidates.size());
  parallel_for(report.candidates.size(), config.jobs, [&](std::size_t i) {
    const auto* frame = manifest.find(report.candidates[i]);
    if (manifest.find(augmented_frame_id(frame->frame_id)) != nullptr) {
      outcomes[i].frame_id = frame->frame_id;
      outcomes[i].skip_reason = "AlreadyAugmented";
      return;
    }
    outcomes[i] = augment_frame(*frame, manifest, config, out_root);
  });

  std::vector<FrameRecord> added;
  for (auto& o : outcomes) {
    if (o.record) {
      LogLine("info", "augment_frame").kv("frame_id", o.frame_id).kv("status", "ok");
      if (o.positive_accel) {
        LogLine("warn", "augment_frame").kv("frame_id", o.frame_id).kv("message", "positive_accel_scaled");
        report.positive_accel_warnings.push_back(o.frame_id);
      }
      report.augmented.push_back(o.frame_id);
      added.push_back(std::move(*o.record));
    } else {
      LogLine("warn", "augment_frame").kv("frame_id", o.frame_id).kv("status", "skipped").kv("reason", o.skip_reason);
      report.skipped.emplace_back(o.frame_id, o.skip_reason);
    }
  }
  std::sort(added.begin(), added.end(),
            [](const FrameRecord& a, const FrameRecord& b) { return a.frame_id < b.frame_id; });
  for (auto& r : added) result.manifest.records.push_back(std::move(r));

  auto& meta = result.manifest.meta;
  meta["augment.accel_scale"] = format_double(config.accel_scale);
  meta["augment.body_length"] = format_double(config.body_length);
  meta["augment.shift_fraction"] = format_double(config.shift_fraction);
  meta["augment.count"] = std::to_string(report.augmented.size());
  meta["augment.skipped"] = std::to_string(report.skipped.size());
  validate(result.manifest);
  return result;
}

}  // namespace safeaug

#endif  // SAFEAUG_AUGMENT_HPP
