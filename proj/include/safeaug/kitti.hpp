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

#ifndef SAFEAUG_KITTI_HPP
#define SAFEAUG_KITTI_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "safeaug/depth.hpp"
#include "safeaug/detection.hpp"
#include "safeaug/error.hpp"
#include "safeaug/io.hpp"
#include "safeaug/manifest.hpp"
#include "safeaug/parallel.hpp"
#include "safeaug/types.hpp"

namespace safeaug {

/// OXTS column layout (0-based): vf = 8 is forward velocity, af = 14 forward acceleration.
inline constexpr std::size_t kOxtsForwardVelocity = 8;
inline constexpr std::size_t kOxtsForwardAccel = 14;
inline constexpr std::size_t kOxtsMinFields = 17;

struct IngestConfig {
  int camera_index = 2;
  double depth_scale = 1.0 / 256.0;  // meters per stored unit
  DepthMode depth_mode = DepthMode::kQuantized16;
  std::size_t speed_index = kOxtsForwardVelocity;
  std::size_t accel_index = kOxtsForwardAccel;
  DetectionConfig detection;
  unsigned jobs = 1;

  void validate() const {
    if (camera_index < 0 || camera_index > 9) throw Error(ErrorCode::kInvalidConfig, "ingest.camera_index");
    if (!(depth_scale > 0.0) || !std::isfinite(depth_scale)) {
      throw Error(ErrorCode::kInvalidConfig, "ingest.depth_scale must be positive");
    }
    if (speed_index >= 30 || accel_index >= 30) throw Error(ErrorCode::kInvalidConfig, "OXTS index out of range");
    detection.validate();
  }
};

namespace detail {

// Values following "<key>:" on its own line, or nullopt if the key is absent.
inline std::optional<std::vector<std::string_view>> calib_values(std::string_view text, std::string_view key) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    auto name = line.substr(0, colon);
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.remove_suffix(1);
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front()))) name.remove_prefix(1);
    if (name == key) return split_whitespace(line.substr(colon + 1));
  }
  return std::nullopt;
}

}  // namespace detail

/// Pinhole intrinsics of rectified camera `camera_index` from a KITTI calib_cam_to_cam.txt:
/// fx = P[0][0], cx = P[0][2], fy = P[1][1], cy = P[1][2], size from S_rect.
inline CameraIntrinsics parse_calibration(std::string_view text, int camera_index) {
  const std::string suffix = "_0" + std::to_string(camera_index);
  const auto p_key = "P_rect" + suffix;
  const auto s_key = "S_rect" + suffix;

  const auto p_tokens = detail::calib_values(text, p_key);
  if (!p_tokens) throw Error(ErrorCode::kMissingKey, p_key);
  if (p_tokens->size() != 12) {
    throw Error(ErrorCode::kMalformedMatrix, p_key + " has " + std::to_string(p_tokens->size()) + " entries");
  }
  std::array<double, 12> p{};
  for (std::size_t i = 0; i < 12; ++i) {
    if (!parse_double((*p_tokens)[i], p[i]) || !std::isfinite(p[i])) {
      throw Error(ErrorCode::kMalformedMatrix, p_key + " entry " + std::to_string(i) + " is not numeric");
    }
  }

  const auto s_tokens = detail::calib_values(text, s_key);
  if (!s_tokens) throw Error(ErrorCode::kMissingKey, s_key);
  std::array<double, 2> size{};
  if (s_tokens->size() != 2 || !parse_double((*s_tokens)[0], size[0]) || !parse_double((*s_tokens)[1], size[1])) {
    throw Error(ErrorCode::kMalformedMatrix, s_key);
  }

  CameraIntrinsics k{p[0], p[5], p[2], p[6], static_cast<int>(std::lround(size[0])),
                     static_cast<int>(std::lround(size[1]))};
  try {
    k.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedMatrix, p_key + ": " + e.what());
  }
  return k;
}

/// Speed and acceleration columns of one OXTS line. Every token must be numeric.
inline Kinematics parse_oxts_record(std::string_view line, std::size_t speed_index = kOxtsForwardVelocity,
                                    std::size_t accel_index = kOxtsForwardAccel) {
  const auto tokens = split_whitespace(line);
  const auto needed = std::max({kOxtsMinFields, speed_index + 1, accel_index + 1});
  if (tokens.size() < needed) {
    throw Error(ErrorCode::kTooFewFields, std::to_string(tokens.size()) + " fields, need " + std::to_string(needed));
  }
  std::vector<double> values(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!parse_double(tokens[i], values[i])) {
      throw Error(ErrorCode::kNonNumericField, "field " + std::to_string(i) + " '" + std::string(tokens[i]) + "'");
    }
  }
  Kinematics k{values[speed_index], values[accel_index]};
  if (!std::isfinite(k.speed) || !std::isfinite(k.accel)) throw Error(ErrorCode::kMalformedRecord, "non-finite kinematics");
  if (k.speed < 0.0) throw Error(ErrorCode::kMalformedRecord, "negative forward velocity");
  return k;
}

namespace detail {

inline std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir, std::string_view ext) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string depth_extension(DepthMode mode) { return mode == DepthMode::kQuantized16 ? ".png" : ".bin"; }

}  // namespace detail

/// Walks `<root>/<seq>/image_0N/data/*.png` with matching `<seq>/oxts/data/*.txt`, plus the
/// optional `<seq>/depth/data/*` and `<seq>/detections/data/*.json` sidecars. Intrinsics come
/// from `<root>/calib_cam_to_cam.txt`. Records are sorted by frame_id ("<seq>/<stem>").
inline DatasetManifest build_manifest(const std::filesystem::path& root, const IngestConfig& config) {
  namespace fs = std::filesystem;
  config.validate();
  if (!fs::is_directory(root)) throw Error(ErrorCode::kEmptyCorpus, root.string() + " is not a directory");

  const std::string image_dir = "image_0" + std::to_string(config.camera_index);
  std::vector<fs::path> sequences;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::is_directory(entry.path() / image_dir / "data")) sequences.push_back(entry.path());
  }
  std::sort(sequences.begin(), sequences.end());

  struct Pending {
    std::string frame_id;
    fs::path image;
    fs::path oxts;
    fs::path seq;
  };
  std::vector<Pending> pending;
  for (const auto& seq : sequences) {
    const auto images = detail::sorted_files(seq / image_dir / "data", ".png");
    const auto oxts = detail::sorted_files(seq / "oxts" / "data", ".txt");
    if (images.size() != oxts.size()) {
      throw Error(ErrorCode::kCountMismatch, seq.filename().string() + ": " + std::to_string(images.size()) +
                                                 " images vs " + std::to_string(oxts.size()) + " OXTS records");
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].stem() != oxts[i].stem()) {
        throw Error(ErrorCode::kCountMismatch, "no OXTS record for " + images[i].string());
      }
      pending.push_back({seq.filename().string() + "/" + images[i].stem().string(), images[i], oxts[i], seq});
    }
  }
  if (pending.empty()) throw Error(ErrorCode::kEmptyCorpus, "no images under " + root.string());

  const auto calib_path = root / "calib_cam_to_cam.txt";
  if (!fs::is_regular_file(calib_path)) throw Error(ErrorCode::kMissingKey, calib_path.string());
  const auto intrinsics = parse_calibration(read_text_file(calib_path), config.camera_index);

  std::vector<FrameRecord> records(pending.size());
  parallel_for(pending.size(), config.jobs, [&](std::size_t i) {
    const auto& p = pending[i];
    FrameRecord r;
    r.frame_id = p.frame_id;
    r.image_path = fs::relative(p.image, root).generic_string();
    try {
      r.kinematics = parse_oxts_record(read_text_file(p.oxts), config.speed_index, config.accel_index);
    } catch (const Error& e) {
      throw Error(e.code(), p.oxts.string() + ": " + e.what());
    }
    const auto stem = p.image.stem().string();
    const auto depth = p.seq / "depth" / "data" / (stem + detail::depth_extension(config.depth_mode));
    if (fs::is_regular_file(depth)) r.depth_path = fs::relative(depth, root).generic_string();
    const auto dets = p.seq / "detections" / "data" / (stem + ".json");
    if (fs::is_regular_file(dets)) {
      r.detections_path = fs::relative(dets, root).generic_string();
      r.front_box = detect_front_vehicle(dets, config.detection, intrinsics.width, intrinsics.height);
    }
    records[i] = std::move(r);
  });
  std::sort(records.begin(), records.end(),
            [](const FrameRecord& a, const FrameRecord& b) { return a.frame_id < b.frame_id; });

  DatasetManifest manifest;
  manifest.records = std::move(records);
  manifest.intrinsics = intrinsics;
  manifest.meta["root"] = fs::weakly_canonical(fs::absolute(root)).generic_string();
  manifest.meta["source"] = "kitti_raw";
  manifest.meta["camera_index"] = std::to_string(config.camera_index);
  manifest.meta["depth_scale"] = format_double(config.depth_scale);
  manifest.meta["depth_mode"] = std::string(to_string(config.depth_mode));
  manifest.meta["accel_index"] = std::to_string(config.accel_index);
  validate(manifest);
  return manifest;
}

/// Loads the depth map of a record using the scale and mode recorded in the manifest meta.
inline DepthMap load_record_depth(const DatasetManifest& manifest, const FrameRecord& record) {
  if (!record.depth_path) throw Error(ErrorCode::kUnreadableFile, record.frame_id + " has no depth map");
  const auto scale_it = manifest.meta.find("depth_scale");
  const auto mode_it = manifest.meta.find("depth_mode");
  double scale = 1.0 / 256.0;
  if (scale_it != manifest.meta.end() && !parse_double(scale_it->second, scale)) {
    throw Error(ErrorCode::kInvalidManifest, "meta.depth_scale");
  }
  const auto mode = mode_it == manifest.meta.end() ? DepthMode::kQuantized16 : depth_mode_from_string(mode_it->second);
  return load_depth_map(manifest.resolve(*record.depth_path), scale, mode);
}

}  // namespace safeaug

#endif  // SAFEAUG_KITTI_HPP
