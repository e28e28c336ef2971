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

#ifndef SAFEAUG_MANIFEST_HPP
#define SAFEAUG_MANIFEST_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "safeaug/error.hpp"
#include "safeaug/io.hpp"
#include "safeaug/types.hpp"

namespace safeaug {

enum class Origin { kOriginal, kAugmented, kSyntheticSmogn, kResampled };

constexpr std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kOriginal: return "original";
    case Origin::kAugmented: return "augmented";
    case Origin::kSyntheticSmogn: return "synthetic_smogn";
    case Origin::kResampled: return "resampled";
  }
  return "original";
}

inline Origin origin_from_string(std::string_view text) {
  if (text == "original") return Origin::kOriginal;
  if (text == "augmented") return Origin::kAugmented;
  if (text == "synthetic_smogn") return Origin::kSyntheticSmogn;
  if (text == "resampled") return Origin::kResampled;
  throw Error(ErrorCode::kInvalidManifest, "unknown origin '" + std::string(text) + "'");
}

/// One frame of the dataset index. Paths are relative to the manifest root unless absolute.
struct FrameRecord {
  std::string frame_id;
  std::string image_path;  // empty for feature-space synthetic records
  std::optional<std::string> depth_path;
  std::optional<std::string> detections_path;
  Kinematics kinematics;
  std::optional<BoundingBox> front_box;
  Origin origin = Origin::kOriginal;
  std::optional<std::string> parent_id;
  std::vector<double> features;  // only populated for feature-space records

  /// Augmentation needs both a depth map and detections.
  [[nodiscard]] bool augmentation_eligible() const noexcept {
    return depth_path.has_value() && detections_path.has_value();
  }

  /// Id of the original frame this record descends from.
  [[nodiscard]] const std::string& root_id() const noexcept { return parent_id ? *parent_id : frame_id; }

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct DatasetManifest {
  std::vector<FrameRecord> records;
  CameraIntrinsics intrinsics;
  std::map<std::string, std::string> meta;

  [[nodiscard]] std::filesystem::path resolve(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.is_absolute()) return p;
    const auto it = meta.find("root");
    return it == meta.end() ? p : std::filesystem::path(it->second) / p;
  }

  [[nodiscard]] const FrameRecord* find(std::string_view frame_id) const {
    for (const auto& r : records) {
      if (r.frame_id == frame_id) return &r;
    }
    return nullptr;
  }

  [[nodiscard]] std::size_t count(Origin origin) const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.origin == origin ? 1 : 0;
    return n;
  }

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Unique ids; originals have no parent; every derived record points at an existing original.
inline void validate(const DatasetManifest& manifest) {
  std::map<std::string_view, Origin> origins;
  for (const auto& r : manifest.records) {
    if (r.frame_id.empty()) throw Error(ErrorCode::kInvalidManifest, "empty frame_id");
    if (!origins.emplace(r.frame_id, r.origin).second) {
      throw Error(ErrorCode::kInvalidManifest, "duplicate frame_id " + r.frame_id);
    }
  }
  for (const auto& r : manifest.records) {
    if (r.origin == Origin::kOriginal) {
      if (r.parent_id) throw Error(ErrorCode::kInvalidManifest, "original record " + r.frame_id + " has a parent");
      continue;
    }
    if (!r.parent_id) throw Error(ErrorCode::kInvalidManifest, "derived record " + r.frame_id + " has no parent");
    const auto it = origins.find(*r.parent_id);
    if (it == origins.end() || it->second != Origin::kOriginal) {
      throw Error(ErrorCode::kInvalidManifest, "unresolvable parent " + *r.parent_id + " of " + r.frame_id);
    }
  }
}

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson box_to_json(const BoundingBox& b) {
  return ojson{{"x_min", b.x_min}, {"y_min", b.y_min},           {"x_max", b.x_max},
               {"y_max", b.y_max}, {"confidence", b.confidence}, {"class_id", b.class_id}};
}

inline BoundingBox box_from_json(const ojson& j) {
  return BoundingBox{j.at("x_min").get<double>(),      j.at("y_min").get<double>(), j.at("x_max").get<double>(),
                     j.at("y_max").get<double>(),      j.at("confidence").get<double>(),
                     j.at("class_id").get<int>()};
}

template <class T>
ojson optional_to_json(const std::optional<T>& value) {
  return value ? ojson(*value) : ojson(nullptr);
}

inline std::optional<std::string> optional_string(const ojson& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace detail

inline nlohmann::ordered_json record_to_json(const FrameRecord& r) {
  detail::ojson j;
  j["frame_id"] = r.frame_id;
  j["image_path"] = r.image_path.empty() ? detail::ojson(nullptr) : detail::ojson(r.image_path);
  j["depth_path"] = detail::optional_to_json(r.depth_path);
  j["detections_path"] = detail::optional_to_json(r.detections_path);
  j["kinematics"] = {{"speed", r.kinematics.speed}, {"accel", r.kinematics.accel}};
  j["front_box"] = r.front_box ? detail::box_to_json(*r.front_box) : detail::ojson(nullptr);
  j["origin"] = to_string(r.origin);
  j["parent_id"] = detail::optional_to_json(r.parent_id);
  if (!r.features.empty()) j["features"] = r.features;
  return j;
}

inline FrameRecord record_from_json(const nlohmann::ordered_json& j) {
  FrameRecord r;
  r.frame_id = j.at("frame_id").get<std::string>();
  r.image_path = detail::optional_string(j, "image_path").value_or("");
  r.depth_path = detail::optional_string(j, "depth_path");
  r.detections_path = detail::optional_string(j, "detections_path");
  r.kinematics = {j.at("kinematics").at("speed").get<double>(), j.at("kinematics").at("accel").get<double>()};
  if (const auto it = j.find("front_box"); it != j.end() && !it->is_null()) r.front_box = detail::box_from_json(*it);
  r.origin = origin_from_string(j.at("origin").get<std::string>());
  r.parent_id = detail::optional_string(j, "parent_id");
  if (const auto it = j.find("features"); it != j.end()) r.features = it->get<std::vector<double>>();
  return r;
}

/// JSON Lines: a header line with intrinsics and meta, then one record per line.
inline std::string serialize_manifest(const DatasetManifest& m) {
  const auto& k = m.intrinsics;
  detail::ojson header;
  header["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width},
                          {"height", k.height}};
  header["meta"] = detail::ojson::object();
  for (const auto& [key, value] : m.meta) header["meta"][key] = value;
  std::string out = header.dump() + '\n';
  for (const auto& r : m.records) out += record_to_json(r).dump() + '\n';
  return out;
}

inline DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = detail::ojson::parse(line);
      if (!header_seen) {
        const auto& k = j.at("intrinsics");
        m.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                        k.at("cy").get<double>(), k.at("width").get<int>(),  k.at("height").get<int>()};
        for (const auto& [key, value] : j.at("meta").items()) m.meta[key] = value.get<std::string>();
        header_seen = true;
        continue;
      }
      m.records.push_back(record_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, "line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!header_seen) throw Error(ErrorCode::kInvalidManifest, "missing header line");
  validate(m);
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_text_file(path)); }

inline void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  write_file_atomic(path, serialize_manifest(m));
}

}  // namespace safeaug

#endif  // SAFEAUG_MANIFEST_HPP
