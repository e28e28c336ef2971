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

#ifndef SAFEAUG_DEPTH_HPP
#define SAFEAUG_DEPTH_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "safeaug/error.hpp"
#include "safeaug/image.hpp"
#include "safeaug/io.hpp"

namespace safeaug {

/// Metric depth (meters along the optical axis) with a validity mask.
/// Invariant: valid(u, v) implies depth(u, v) is finite and positive.
struct DepthMap {
  Grid<float> depth;
  Mask valid;

  DepthMap() = default;
  DepthMap(int width, int height) : depth(width, height, 0.0f), valid(width, height, 0) {}

  [[nodiscard]] int width() const noexcept { return depth.width(); }
  [[nodiscard]] int height() const noexcept { return depth.height(); }
  [[nodiscard]] bool is_valid(int u, int v) const { return valid(u, v) != 0; }

  void set(int u, int v, float z) {
    const bool ok = std::isfinite(z) && z > 0.0f;
    depth(u, v) = ok ? z : 0.0f;
    valid(u, v) = ok ? 1 : 0;
  }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

/// quantized16: 16-bit grayscale PNG, depth = value * scale, value 0 is invalid.
/// float_raw: "SDF1" magic, little-endian uint32 width and height, then width*height
/// little-endian float32 samples in row-major order, each multiplied by scale.
enum class DepthMode { kQuantized16, kFloatRaw };

constexpr std::string_view to_string(DepthMode mode) {
  return mode == DepthMode::kQuantized16 ? "quantized16" : "float_raw";
}

inline DepthMode depth_mode_from_string(std::string_view text) {
  if (text == "quantized16") return DepthMode::kQuantized16;
  if (text == "float_raw") return DepthMode::kFloatRaw;
  throw Error(ErrorCode::kInvalidConfig, "unknown depth mode '" + std::string(text) + "'");
}

inline constexpr std::size_t kFloatRawHeaderBytes = 12;

namespace detail {

static_assert(std::endian::native == std::endian::little, "float_raw I/O assumes a little-endian host");

inline std::uint32_t read_u32_le(const char* p) {
  std::uint32_t v = 0;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace detail

inline DepthMap load_depth_map(const std::filesystem::path& path, double scale, DepthMode mode) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::kInvalidConfig, "depth scale must be positive");
  if (mode == DepthMode::kQuantized16) {
    const auto raw = read_png_gray16(path);
    DepthMap map(raw.width(), raw.height());
    for (int v = 0; v < raw.height(); ++v) {
      for (int u = 0; u < raw.width(); ++u) {
        const auto stored = raw(u, v);
        if (stored != 0) map.set(u, v, static_cast<float>(stored * scale));
      }
    }
    return map;
  }

  const auto bytes = read_text_file(path);
  if (bytes.size() < kFloatRawHeaderBytes || bytes.compare(0, 4, "SDF1") != 0) {
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": missing float_raw header");
  }
  const auto w = detail::read_u32_le(bytes.data() + 4);
  const auto h = detail::read_u32_le(bytes.data() + 8);
  if (w == 0 || h == 0 || bytes.size() != kFloatRawHeaderBytes + 4ULL * w * h) {
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": byte length does not match header dimensions");
  }
  DepthMap map(static_cast<int>(w), static_cast<int>(h));
  const char* samples = bytes.data() + kFloatRawHeaderBytes;
  for (int v = 0; v < map.height(); ++v) {
    for (int u = 0; u < map.width(); ++u) {
      float stored = 0.0f;
      std::memcpy(&stored, samples + 4 * (static_cast<std::size_t>(v) * w + u), 4);
      map.set(u, v, static_cast<float>(stored * scale));
    }
  }
  return map;
}

/// Inverse of load_depth_map. quantized16 rounds depth / scale to the nearest step and
/// throws DimensionMismatch if a valid depth does not fit in 1..65535 steps.
inline void save_depth_map(const std::filesystem::path& path, const DepthMap& map, double scale, DepthMode mode) {
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidConfig, "depth scale must be positive");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (mode == DepthMode::kQuantized16) {
    Grid<std::uint16_t> raw(map.width(), map.height(), 0);
    for (int v = 0; v < map.height(); ++v) {
      for (int u = 0; u < map.width(); ++u) {
        if (!map.is_valid(u, v)) continue;
        const double steps = std::round(map.depth(u, v) / scale);
        if (steps < 1.0 || steps > 65535.0) {
          throw Error(ErrorCode::kDimensionMismatch, "depth out of quantized16 range at (" + std::to_string(u) +
                                                         "," + std::to_string(v) + ")");
        }
        raw(u, v) = static_cast<std::uint16_t>(steps);
      }
    }
    write_png_gray16(path, raw);
    return;
  }

  std::string bytes(kFloatRawHeaderBytes + 4 * map.depth.size(), '\0');
  std::memcpy(bytes.data(), "SDF1", 4);
  const auto w = static_cast<std::uint32_t>(map.width());
  const auto h = static_cast<std::uint32_t>(map.height());
  std::memcpy(bytes.data() + 4, &w, 4);
  std::memcpy(bytes.data() + 8, &h, 4);
  for (std::size_t i = 0; i < map.depth.size(); ++i) {
    const float stored = map.valid.data()[i] != 0 ? static_cast<float>(map.depth.data()[i] / scale) : 0.0f;
    std::memcpy(bytes.data() + kFloatRawHeaderBytes + 4 * i, &stored, 4);
  }
  write_file_atomic(path, bytes);
}

}  // namespace safeaug

#endif  // SAFEAUG_DEPTH_HPP
