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

#ifndef SAFEAUG_IMAGE_HPP
#define SAFEAUG_IMAGE_HPP

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "safeaug/error.hpp"

namespace safeaug {

/// Dense row-major 2D grid.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }

  T& operator()(int u, int v) { return data_[index(u, v)]; }
  const T& operator()(int u, int v) const { return data_[index(u, v)]; }

  [[nodiscard]] std::vector<T>& data() noexcept { return data_; }
  [[nodiscard]] const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  [[nodiscard]] std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * width_ + u;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Rgb = std::array<std::uint8_t, 3>;
using RgbImage = Grid<Rgb>;
using Mask = Grid<std::uint8_t>;

namespace detail {

struct PngFile {
  std::FILE* fp = nullptr;
  ~PngFile() {
    if (fp != nullptr) std::fclose(fp);
  }
};

struct PngRaw {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 or 3 after transforms
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint8_t> bytes;
};

// Reads a PNG into tightly packed rows. Palette and sub-byte gray are expanded,
// alpha is stripped; 16-bit samples are kept big-endian unless to_rgb8 is set.
inline PngRaw read_png_raw(const std::filesystem::path& path, bool to_rgb8) {
  PngFile file;
  file.fp = std::fopen(path.c_str(), "rb");
  if (file.fp == nullptr) throw Error(ErrorCode::kUnreadableFile, path.string());

  std::array<png_byte, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), file.fp) != sig.size() || png_sig_cmp(sig.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": not a PNG");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": libpng init");
  }

  PngRaw raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": corrupt PNG");
  }

  png_init_io(png, file.fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS) != 0) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (to_rgb8) {
    png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  const auto stride = png_get_rowbytes(png, info);
  raw.bytes.resize(stride * raw.height);
  rows.resize(raw.height);
  for (int v = 0; v < raw.height; ++v) rows[v] = raw.bytes.data() + stride * v;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raw;
}

inline void write_png_raw(const std::filesystem::path& path, int width, int height, int color_type, int bit_depth,
                          const std::vector<std::uint8_t>& bytes) {
  PngFile file;
  file.fp = std::fopen(path.c_str(), "wb");
  if (file.fp == nullptr) throw Error(ErrorCode::kUnreadableFile, "cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": libpng init");
  }
  const std::size_t stride = bytes.size() / static_cast<std::size_t>(height);
  std::vector<png_bytep> rows(height);
  for (int v = 0; v < height; ++v) rows[v] = const_cast<png_bytep>(bytes.data() + stride * v);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": PNG write failed");
  }
  png_init_io(png, file.fp);
  png_set_compression_level(png, 1);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

inline RgbImage read_png_rgb(const std::filesystem::path& path) {
  const auto raw = detail::read_png_raw(path, true);
  RgbImage image(raw.width, raw.height);
  auto& px = image.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = {raw.bytes[3 * i], raw.bytes[3 * i + 1], raw.bytes[3 * i + 2]};
  }
  return image;
}

inline void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.size() * 3);
  for (const auto& p : image.data()) bytes.insert(bytes.end(), p.begin(), p.end());
  detail::write_png_raw(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, bytes);
}

/// Reads a single-channel PNG as 16-bit values; 8-bit files are widened unchanged.
inline Grid<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  const auto raw = detail::read_png_raw(path, false);
  if (raw.channels != 1) throw Error(ErrorCode::kUnreadableFile, path.string() + ": expected single-channel PNG");
  Grid<std::uint16_t> out(raw.width, raw.height);
  auto& px = out.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = raw.bit_depth == 16
                ? static_cast<std::uint16_t>((raw.bytes[2 * i] << 8) | raw.bytes[2 * i + 1])
                : raw.bytes[i];
  }
  return out;
}

inline void write_png_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& grid) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(grid.size() * 2);
  for (auto value : grid.data()) {
    bytes.push_back(static_cast<std::uint8_t>(value >> 8));
    bytes.push_back(static_cast<std::uint8_t>(value & 0xff));
  }
  detail::write_png_raw(path, grid.width(), grid.height(), PNG_COLOR_TYPE_GRAY, 16, bytes);
}

}  // namespace safeaug

#endif  // SAFEAUG_IMAGE_HPP
