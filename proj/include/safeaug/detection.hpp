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

#ifndef SAFEAUG_DETECTION_HPP
#define SAFEAUG_DETECTION_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "safeaug/error.hpp"
#include "safeaug/io.hpp"
#include "safeaug/types.hpp"

namespace safeaug {

struct DetectionConfig {
  std::set<int> class_filter{2, 3, 5, 7};  // COCO car, motorcycle, bus, truck
  double conf_floor = 0.25;
  double nms_iou = 0.45;
  double center_tolerance_frac = 0.15;  // of image width

  void validate() const {
    if (!(conf_floor >= 0.0 && conf_floor <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "detect.conf_floor");
    if (!(nms_iou > 0.0 && nms_iou < 1.0)) throw Error(ErrorCode::kInvalidConfig, "detect.nms_iou");
    if (!(center_tolerance_frac >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "detect.center_tolerance_frac");
  }
};

/// Confidence-descending order; ties by x_min then y_min ascending.
inline bool detection_order(const BoundingBox& a, const BoundingBox& b) noexcept {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.x_min != b.x_min) return a.x_min < b.x_min;
  return a.y_min < b.y_min;
}

/// Greedy non-maximum suppression. A box survives when its IoU with every
/// previously kept box is below iou_threshold.
inline std::vector<BoundingBox> nms(std::span<const BoundingBox> boxes, double iou_threshold) {
  std::vector<BoundingBox> sorted(boxes.begin(), boxes.end());
  std::stable_sort(sorted.begin(), sorted.end(), detection_order);
  std::vector<BoundingBox> kept;
  kept.reserve(sorted.size());
  for (const auto& candidate : sorted) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const BoundingBox& k) {
      return iou(candidate, k) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

/// A box lies on the center line when its horizontal span contains C or its center is
/// within `center_tolerance` pixels of C, where C = image_width / 2.
inline bool on_center_line(const BoundingBox& box, double image_width, double center_tolerance) noexcept {
  const double c = 0.5 * image_width;
  return (box.x_min <= c && c <= box.x_max) || std::abs(box.center_x() - c) <= center_tolerance;
}

/// Largest box on the center line. Equal areas go to the higher confidence, then to
/// the box whose center is nearer C.
inline std::optional<BoundingBox> select_front_vehicle(std::span<const BoundingBox> boxes, double image_width,
                                                       double center_tolerance) {
  const double c = 0.5 * image_width;
  std::optional<BoundingBox> best;
  for (const auto& b : boxes) {
    if (!on_center_line(b, image_width, center_tolerance)) continue;
    if (!best) {
      best = b;
      continue;
    }
    const double area = b.area();
    const double best_area = best->area();
    bool better = area > best_area;
    if (area == best_area) {
      if (b.confidence != best->confidence) {
        better = b.confidence > best->confidence;
      } else {
        better = std::abs(b.center_x() - c) < std::abs(best->center_x() - c);
      }
    }
    if (better) best = b;
  }
  return best;
}

/// Reads a JSON array of {"x1","y1","x2","y2","conf","cls"} objects, keeps the listed
/// classes at or above conf_floor and clamps coordinates to the image.
inline std::vector<BoundingBox> parse_detections(std::string_view text, const std::set<int>& class_filter,
                                                 double conf_floor, int image_width, int image_height) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kUnreadableFile, std::string("detections: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::kMalformedDetection, "expected a JSON array");

  std::vector<BoundingBox> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& d = doc[i];
    BoundingBox box;
    try {
      box = {d.at("x1").get<double>(), d.at("y1").get<double>(), d.at("x2").get<double>(),
             d.at("y2").get<double>(), d.at("conf").get<double>(), d.at("cls").get<int>()};
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedDetection, "entry " + std::to_string(i) + ": " + e.what());
    }
    if (!box.valid()) throw Error(ErrorCode::kMalformedDetection, "entry " + std::to_string(i) + " is inverted");
    if (!class_filter.contains(box.class_id) || box.confidence < conf_floor) continue;
    box.x_min = std::clamp(box.x_min, 0.0, static_cast<double>(image_width));
    box.x_max = std::clamp(box.x_max, 0.0, static_cast<double>(image_width));
    box.y_min = std::clamp(box.y_min, 0.0, static_cast<double>(image_height));
    box.y_max = std::clamp(box.y_max, 0.0, static_cast<double>(image_height));
    if (box.x_min < box.x_max && box.y_min < box.y_max) out.push_back(box);
  }
  return out;
}

inline std::vector<BoundingBox> load_detections(const std::filesystem::path& path, const std::set<int>& class_filter,
                                                double conf_floor, int image_width, int image_height) {
  return parse_detections(read_text_file(path), class_filter, conf_floor, image_width, image_height);
}

/// load_detections, then NMS, then front-vehicle selection.
inline std::optional<BoundingBox> detect_front_vehicle(const std::filesystem::path& path, const DetectionConfig& config,
                                                       int image_width, int image_height) {
  const auto boxes = load_detections(path, config.class_filter, config.conf_floor, image_width, image_height);
  const auto kept = nms(boxes, config.nms_iou);
  return select_front_vehicle(kept, image_width, config.center_tolerance_frac * image_width);
}

}  // namespace safeaug

#endif  // SAFEAUG_DETECTION_HPP
