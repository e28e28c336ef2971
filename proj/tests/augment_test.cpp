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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "safeaug/augment.hpp"
#include "test_util.hpp"

namespace safeaug {
namespace {

using testing::TempDir;

TEST(Shift, Examples) {
  AugmentationConfig c;
  EXPECT_DOUBLE_EQ(compute_shift(c), 2.25);
  c.body_length = 4.0;
  EXPECT_DOUBLE_EQ(compute_shift(c), 2.0);
  c.shift_fraction = 0.0;
  EXPECT_ERROR_CODE(compute_shift(c), ErrorCode::kInvalidConfig);
  c.shift_fraction = 1.0;
  EXPECT_ERROR_CODE(compute_shift(c), ErrorCode::kInvalidConfig);
}

TEST(Config, Invariants) {
  AugmentationConfig c;
  c.accel_scale = 1.0;
  EXPECT_ERROR_CODE(c.validate(), ErrorCode::kInvalidConfig);
  c = {};
  c.body_length = 0.0;
  EXPECT_ERROR_CODE(c.validate(), ErrorCode::kInvalidConfig);
  c = {};
  c.candidate_fraction_cap = 1.5;
  EXPECT_ERROR_CODE(c.validate(), ErrorCode::kInvalidConfig);
  c.candidate_fraction_cap = 1.0;
  EXPECT_NO_THROW(c.validate());
}

TEST(AdjustAcceleration, Examples) {
  const AugmentationConfig c;
  EXPECT_EQ(adjust_acceleration(-2.0, c), -3.0);
  EXPECT_EQ(adjust_acceleration(0.0, c), 0.0);
  EXPECT_DOUBLE_EQ(adjust_acceleration(-1.2, c), -1.8);
  EXPECT_EQ(adjust_acceleration(0.4, c), 1.5 * 0.4);  // applied regardless of sign
}

// 20 eligible originals, five of them with a front vehicle at the given depths.
DatasetManifest candidate_manifest(const std::vector<double>& depths, std::map<std::string, double>& truth) {
  DatasetManifest m;
  for (int i = 0; i < 20; ++i) {
    FrameRecord r;
    r.frame_id = "s/" + std::to_string(100 + i);
    r.image_path = "x.png";
    r.depth_path = "d.png";
    r.detections_path = "b.json";
    if (static_cast<std::size_t>(i) < depths.size()) {
      r.front_box = BoundingBox{1, 1, 5, 5, 0.9, 2};
      truth[r.frame_id] = depths[i];
    }
    m.records.push_back(r);
  }
  return m;
}

// Brute force: filter, sort by depth, keep the first ceil(cap * N).
std::vector<std::string> candidates_oracle(const std::map<std::string, double>& depth, double max_d, double cap,
                                           std::size_t originals) {
  std::vector<std::pair<double, std::string>> near;
  for (const auto& [id, d] : depth) {
    if (d < max_d) near.emplace_back(d, id);
  }
  std::sort(near.begin(), near.end());
  const auto keep = static_cast<std::size_t>(std::ceil(cap * originals - 1e-9));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < near.size() && i < keep; ++i) out.push_back(near[i].second);
  return out;
}

TEST(SelectCandidates, Examples) {
  std::map<std::string, double> depth;
  const auto m = candidate_manifest({8, 9, 12, 18, 25}, depth);
  const FrontDepthFn fn = [&](const FrameRecord& r) -> std::optional<double> {
    const auto it = depth.find(r.frame_id);
    return it == depth.end() ? std::nullopt : std::optional<double>(it->second);
  };
  const AugmentationConfig defaults;
  const auto picked = select_candidates(m, defaults, fn);
  EXPECT_EQ(picked, (std::vector<std::string>{"s/100", "s/101"}));
  EXPECT_EQ(picked, candidates_oracle(depth, 15.0, 0.10, 20));

  AugmentationConfig open;
  open.candidate_fraction_cap = 1.0;
  open.candidate_max_distance = std::numeric_limits<double>::infinity();
  EXPECT_EQ(select_candidates(m, open, fn).size(), 5u);

  std::map<std::string, double> none;
  EXPECT_TRUE(select_candidates(candidate_manifest({}, none), defaults, fn).empty());
}

TEST(SelectCandidates, RandomizedAgainstOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(1.0, 40.0);
  std::uniform_real_distribution<double> cap(0.01, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> depths;
    for (int i = 0; i < 1 + trial % 20; ++i) depths.push_back(d(rng));
    std::map<std::string, double> truth;
    const auto m = candidate_manifest(depths, truth);
    AugmentationConfig c;
    c.candidate_fraction_cap = cap(rng);
    const FrontDepthFn fn = [&](const FrameRecord& r) -> std::optional<double> {
      const auto it = truth.find(r.frame_id);
      return it == truth.end() ? std::nullopt : std::optional<double>(it->second);
    };
    const auto picked = select_candidates(m, c, fn);
    EXPECT_EQ(picked, candidates_oracle(truth, 15.0, c.candidate_fraction_cap, 20));
    EXPECT_LE(picked.size(), ceil_count(c.candidate_fraction_cap, 20));
  }
}

struct PlateFrame {
  std::optional<double> z;  // plate depth; nullopt for an empty road
  double accel = -2.0;
  bool with_depth = true;
};

// Writes a KITTI-style tree of flat plate scenes and ingests it.
DatasetManifest write_plate_corpus(const std::filesystem::path& root, const CameraIntrinsics& k,
                                   const std::vector<PlateFrame>& frames) {
  namespace fs = std::filesystem;
  const auto seq = root / "drive";
  for (const char* sub : {"image_02/data", "oxts/data", "depth/data", "detections/data"}) {
    fs::create_directories(seq / sub);
  }
  write_file_atomic(root / "calib_cam_to_cam.txt", synthetic::calibration_text(k));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char stem[16];
    std::snprintf(stem, sizeof(stem), "%010zu", i);
    const auto scene = fixture::plate_scene(k, frames[i].z.value_or(30.0), frames[i].z ? 1.0 : -1.0, frames[i].z ? 1.0 : -1.0);
    write_png_rgb(seq / "image_02/data" / (std::string(stem) + ".png"), scene.image);
    if (frames[i].with_depth) {
      save_depth_map(seq / "depth/data" / (std::string(stem) + ".png"), scene.depth, 1.0 / 256.0,
                     DepthMode::kQuantized16);
    }
    write_file_atomic(seq / "oxts/data" / (std::string(stem) + ".txt"), synthetic::oxts_line(10.0, frames[i].accel));
    std::string dets = "[]";
    if (frames[i].z) {
      const auto& b = scene.box;
      dets = "[{\"x1\":" + format_double(b.x_min) + ",\"y1\":" + format_double(b.y_min) +
             ",\"x2\":" + format_double(b.x_max) + ",\"y2\":" + format_double(b.y_max) + ",\"conf\":0.9,\"cls\":2}]";
    }
    write_file_atomic(seq / "detections/data" / (std::string(stem) + ".json"), dets);
  }
  return build_manifest(root, {});
}

TEST(AugmentFrame, PlateAtTenMeters) {
  TempDir dir;
  const auto k = fixture::kitti_intrinsics();
  const auto m = write_plate_corpus(dir / "corpus", k, {{10.0, -2.0}});
  ASSERT_TRUE(m.records[0].front_box.has_value());
  const AugmentationConfig config;
  const auto out = augment_frame(m.records[0], m, config, dir / "out");
  ASSERT_TRUE(out.record.has_value()) << out.skip_reason;
  const auto& r = *out.record;
  EXPECT_EQ(r.kinematics.accel, -3.0);
  EXPECT_EQ(r.kinematics.speed, 10.0);
  EXPECT_EQ(r.origin, Origin::kAugmented);
  EXPECT_EQ(r.parent_id, m.records[0].frame_id);
  EXPECT_EQ(r.frame_id, m.records[0].frame_id + "#aug");

  // rendered width follows the plate at 7.75 m
  const auto original = read_png_rgb(m.resolve(m.records[0].image_path));
  const auto augmented = read_png_rgb(r.image_path);
  const int row = static_cast<int>(std::lround(k.cy));
  const double ratio = double(fixture::color_extent(augmented, row, fixture::kPlateColor)) /
                       fixture::color_extent(original, row, fixture::kPlateColor);
  EXPECT_NEAR(ratio / (10.0 / 7.75), 1.0, 0.02);
  ASSERT_TRUE(r.front_box.has_value());
  EXPECT_NEAR(r.front_box->width() / m.records[0].front_box->width(), 10.0 / 7.75, 0.02 * 10.0 / 7.75);
}

TEST(AugmentFrame, SkipReasons) {
  TempDir dir;
  const CameraIntrinsics k{200, 200, 100, 30, 200, 60};
  const auto m = write_plate_corpus(dir / "corpus", k, {{std::nullopt}, {10.0, -1.0, false}, {2.5, -1.0}});
  const AugmentationConfig config;
  EXPECT_EQ(augment_frame(m.records[0], m, config, dir / "out").skip_reason, "NoFrontVehicle");
  EXPECT_EQ(augment_frame(m.records[1], m, config, dir / "out").skip_reason, "Ineligible");
  // 2.5 - 2.25 leaves the plate behind the 0.5 m guard
  EXPECT_EQ(augment_frame(m.records[2], m, config, dir / "out").skip_reason, "DegenerateShift");
  EXPECT_FALSE(std::filesystem::exists(dir / "out/augmented" / "drive" / "0000000002.png"));
}

TEST(AugmentScene, ChangesOnlyNearTheVehicle) {
  const CameraIntrinsics k{300, 300, 160, 60, 320, 120};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> depth(4.0, 14.0);
  for (int trial = 0; trial < 5; ++trial) {
    auto scene = fixture::plate_scene(k, depth(rng), 1.6, 1.2, 40.0);
    // texture the wall so stray changes would show
    for (int v = 0; v < k.height; ++v) {
      for (int u = 0; u < k.width; ++u) {
        if (scene.image(u, v) == fixture::kWallColor) {
          scene.image(u, v) = {static_cast<std::uint8_t>(u * 7), static_cast<std::uint8_t>(v * 13), 90};
        }
      }
    }
    const auto out = augment_scene(scene.image, scene.depth, scene.box, k, {});
    Mask near(k.width, k.height, 0);
    for (int v = 0; v < k.height; ++v) {
      for (int u = 0; u < k.width; ++u) {
        if (out.footprint(u, v) == 0) continue;
        for (int dv = -2; dv <= 2; ++dv) {
          for (int du = -2; du <= 2; ++du) {
            if (near.contains(u + du, v + dv)) near(u + du, v + dv) = 1;
          }
        }
      }
    }
    std::size_t outside = 0;
    std::size_t differing = 0;
    for (int v = 0; v < k.height; ++v) {
      for (int u = 0; u < k.width; ++u) {
        if (near(u, v) != 0) continue;
        ++outside;
        differing += out.render.image(u, v) != scene.image(u, v);
      }
    }
    EXPECT_GT(outside, 0u);
    EXPECT_EQ(differing, 0u);
    EXPECT_GT(out.moved_points, 0u);
  }
}

TEST(AugmentDataset, CapLabelsAndOriginalsUntouched) {
  TempDir dir;
  const CameraIntrinsics k{200, 200, 100, 30, 200, 60};
  std::vector<PlateFrame> frames;
  for (int i = 0; i < 25; ++i) {
    if (i % 4 == 3) frames.push_back({std::nullopt, 0.1});
    else frames.push_back({4.0 + i, -0.1 * i + 0.5});
  }
  const auto m = write_plate_corpus(dir / "corpus", k, frames);
  std::map<std::string, std::string> before;
  for (const auto& r : m.records) before[r.frame_id] = read_text_file(m.resolve(r.image_path));

  AugmentationConfig config;
  config.jobs = 3;
  const auto result = augment_dataset(m, config, dir / "out");
  const auto& out = result.manifest;
  EXPECT_EQ(out.count(Origin::kOriginal), 25u);
  const auto augmented = out.count(Origin::kAugmented);
  EXPECT_EQ(augmented, 3u);  // ceil(2.5); plates at 4, 5, 6 m
  EXPECT_EQ(result.report.candidates.size(), 3u);
  EXPECT_TRUE(result.report.skipped.empty());
  EXPECT_EQ(result.report.positive_accel_warnings.size(), 3u);  // a = 0.5, 0.4, 0.3

  for (std::size_t i = 0; i < m.records.size(); ++i) EXPECT_EQ(out.records[i], m.records[i]);
  for (const auto& r : out.records) {
    if (r.origin != Origin::kAugmented) continue;
    const auto* parent = out.find(*r.parent_id);
    ASSERT_NE(parent, nullptr);
    EXPECT_EQ(r.kinematics.accel, 1.5 * parent->kinematics.accel);
    EXPECT_EQ(r.kinematics.speed, parent->kinematics.speed);
  }
  for (const auto& [id, bytes] : before) EXPECT_EQ(read_text_file(m.resolve(m.find(id)->image_path)), bytes);

  // a second pass skips frames that already have a child
  const auto again = augment_dataset(out, config, dir / "out");
  EXPECT_EQ(again.manifest.count(Origin::kAugmented), 3u);
  EXPECT_EQ(again.report.skipped.size(), 3u);
  EXPECT_EQ(again.report.skipped[0].second, "AlreadyAugmented");
}

TEST(AugmentDataset, NoCandidatesIsIdentity) {
  TempDir dir;
  const CameraIntrinsics k{200, 200, 100, 30, 200, 60};
  const auto m = write_plate_corpus(dir / "corpus", k, {{30.0}, {std::nullopt}});
  const auto result = augment_dataset(m, {}, dir / "out");
  EXPECT_EQ(result.manifest, m);
  EXPECT_TRUE(result.report.candidates.empty());
}

TEST(AugmentDataset, Deterministic) {
  TempDir dir;
  const CameraIntrinsics k{200, 200, 100, 30, 200, 60};
  std::vector<PlateFrame> frames;
  for (int i = 0; i < 12; ++i) frames.push_back({5.0 + i, -0.3});
  const auto m = write_plate_corpus(dir / "corpus", k, frames);
  AugmentationConfig serial;
  AugmentationConfig parallel;
  parallel.jobs = 4;
  const auto a = augment_dataset(m, serial, dir / "a");
  const auto b = augment_dataset(m, parallel, dir / "b");
  ASSERT_EQ(a.manifest.records.size(), b.manifest.records.size());
  for (std::size_t i = 0; i < a.manifest.records.size(); ++i) {
    auto ra = a.manifest.records[i];
    auto rb = b.manifest.records[i];
    if (ra.origin == Origin::kAugmented) {
      EXPECT_EQ(read_text_file(ra.image_path), read_text_file(rb.image_path));
      ra.image_path.clear();
      rb.image_path.clear();
    }
    EXPECT_EQ(ra, rb);
  }
  EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
}

}  // namespace
}  // namespace safeaug
