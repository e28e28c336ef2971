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

#ifndef SAFEAUG_CONFIG_HPP
#define SAFEAUG_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "safeaug/augment.hpp"
#include "safeaug/error.hpp"
#include "safeaug/experiment.hpp"
#include "safeaug/io.hpp"
#include "safeaug/kitti.hpp"
#include "safeaug/resampling.hpp"

namespace safeaug {

struct ResampleConfig {
  SmognParams smogn;
  std::size_t importance_bins = 20;
  std::size_t importance_out_size = 0;  // 0: same size as the input

  void validate() const {
    if (smogn.k < 1) throw Error(ErrorCode::kInvalidConfig, "resample.k must be >= 1");
    if (!(smogn.pert >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "resample.pert must be >= 0");
    if (!(smogn.rare_quantile > 0.0 && smogn.rare_quantile < 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "resample.rare_quantile must be in (0, 1)");
    }
    if (importance_bins < 2) throw Error(ErrorCode::kInvalidConfig, "resample.importance_bins must be >= 2");
  }
};

/// Every module setting, addressable as flat dotted keys (`augment.body_length = 4.5`).
struct RunConfig {
  IngestConfig ingest;
  AugmentationConfig augment;
  ResampleConfig resample;
  EvalConfig eval;
  std::string corpus_root;
  std::string output_root = "out";
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const {
    ingest.validate();
    augment.validate();
    resample.validate();
    eval.validate();
  }

  /// Pushes the run-level seed and job count into the module configs.
  void propagate() {
    ingest.jobs = augment.jobs = eval.jobs = jobs;
    augment.rng_seed = seed;
    resample.smogn.seed = seed;
  }
};

namespace detail {

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    if (parse_double(text, value)) return value;
  } else {
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec == std::errc{} && res.ptr == text.data() + text.size()) return value;
  }
  throw Error(ErrorCode::kInvalidConfig, std::string(key) + ": cannot parse '" + std::string(text) + "'");
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw Error(ErrorCode::kInvalidConfig, std::string(key) + ": expected true or false");
}

struct KeyBinding {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

#define SAFEAUG_NUM(path, type)                                                                   \
  KeyBinding {                                                                                    \
    [](const RunConfig& c) {                                                                      \
      if constexpr (std::is_floating_point_v<type>) return format_double(c.path);                 \
      else return std::to_string(c.path);                                                         \
    },                                                                                            \
        [](RunConfig& c, std::string_view v) { c.path = parse_number<type>(#path, v); }           \
  }
#define SAFEAUG_BOOL(path)                                                                        \
  KeyBinding {                                                                                    \
    [](const RunConfig& c) { return std::string(c.path ? "true" : "false"); },                    \
        [](RunConfig& c, std::string_view v) { c.path = parse_bool(#path, v); }                   \
  }
#define SAFEAUG_STR(path)                                                                         \
  KeyBinding {                                                                                    \
    [](const RunConfig& c) { return c.path; }, [](RunConfig& c, std::string_view v) { c.path = std::string(v); } \
  }

inline const std::map<std::string, KeyBinding, std::less<>>& key_table() {
  static const std::map<std::string, KeyBinding, std::less<>> table = {
      {"augment.accel_scale", SAFEAUG_NUM(augment.accel_scale, double)},
      {"augment.body_length", SAFEAUG_NUM(augment.body_length, double)},
      {"augment.candidate_fraction_cap", SAFEAUG_NUM(augment.candidate_fraction_cap, double)},
      {"augment.candidate_max_distance", SAFEAUG_NUM(augment.candidate_max_distance, double)},
      {"augment.depth_band", SAFEAUG_NUM(augment.depth_band, double)},
      {"augment.estimate_body_length", SAFEAUG_BOOL(augment.estimate_body_length)},
      {"augment.hole_median", SAFEAUG_BOOL(augment.hole_median)},
      {"augment.min_z", SAFEAUG_NUM(augment.min_z, double)},
      {"augment.shift_fraction", SAFEAUG_NUM(augment.shift_fraction, double)},
      {"detect.center_tolerance_frac", SAFEAUG_NUM(ingest.detection.center_tolerance_frac, double)},
      {"detect.class_filter",
       KeyBinding{[](const RunConfig& c) {
                    std::string out;
                    for (int id : c.ingest.detection.class_filter) out += (out.empty() ? "" : ",") + std::to_string(id);
                    return out;
                  },
                  [](RunConfig& c, std::string_view v) {
                    std::set<int> ids;
                    while (!v.empty()) {
                      const auto comma = v.find(',');
                      auto token = v.substr(0, comma);
                      while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
                      while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
                      ids.insert(parse_number<int>("detect.class_filter", token));
                      v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
                    }
                    c.ingest.detection.class_filter = std::move(ids);
                  }}},
      {"detect.conf_floor", SAFEAUG_NUM(ingest.detection.conf_floor, double)},
      {"detect.nms_iou", SAFEAUG_NUM(ingest.detection.nms_iou, double)},
      {"eval.grid_h", SAFEAUG_NUM(eval.grid_h, int)},
      {"eval.grid_w", SAFEAUG_NUM(eval.grid_w, int)},
      {"eval.hist_bins", SAFEAUG_NUM(eval.hist_bins, std::size_t)},
      {"eval.hist_max", SAFEAUG_NUM(eval.hist_max, double)},
      {"eval.hist_min", SAFEAUG_NUM(eval.hist_min, double)},
      {"eval.lambda", SAFEAUG_NUM(eval.lambda, double)},
      {"eval.quantile", SAFEAUG_NUM(eval.quantile, double)},
      {"eval.test_fraction", SAFEAUG_NUM(eval.test_fraction, double)},
      {"ingest.accel_index", SAFEAUG_NUM(ingest.accel_index, std::size_t)},
      {"ingest.camera_index", SAFEAUG_NUM(ingest.camera_index, int)},
      {"ingest.depth_mode",
       KeyBinding{[](const RunConfig& c) { return std::string(to_string(c.ingest.depth_mode)); },
                  [](RunConfig& c, std::string_view v) { c.ingest.depth_mode = depth_mode_from_string(v); }}},
      {"ingest.depth_scale", SAFEAUG_NUM(ingest.depth_scale, double)},
      {"ingest.speed_index", SAFEAUG_NUM(ingest.speed_index, std::size_t)},
      {"resample.importance_bins", SAFEAUG_NUM(resample.importance_bins, std::size_t)},
      {"resample.importance_out_size", SAFEAUG_NUM(resample.importance_out_size, std::size_t)},
      {"resample.k", SAFEAUG_NUM(resample.smogn.k, std::size_t)},
      {"resample.n_synth", SAFEAUG_NUM(resample.smogn.n_synth, std::size_t)},
      {"resample.pert", SAFEAUG_NUM(resample.smogn.pert, double)},
      {"resample.rare_quantile", SAFEAUG_NUM(resample.smogn.rare_quantile, double)},
      {"run.corpus_root", SAFEAUG_STR(corpus_root)},
      {"run.jobs", SAFEAUG_NUM(jobs, unsigned)},
      {"run.output_root", SAFEAUG_STR(output_root)},
      {"run.seed", SAFEAUG_NUM(seed, std::uint64_t)},
  };
  return table;
}

#undef SAFEAUG_NUM
#undef SAFEAUG_BOOL
#undef SAFEAUG_STR

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Sets one dotted key; unknown keys are rejected.
inline void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  const auto& table = detail::key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + std::string(key) + "'");
  it->second.set(config, detail::trim(value));
}

/// `key = value` lines; `#` starts a comment. Later lines override defaults, not each other.
inline RunConfig parse_config(std::string_view text, RunConfig config = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = detail::trim(view.substr(0, eq));
    if (!seen.emplace(key).second) throw Error(ErrorCode::kInvalidConfig, "duplicate key '" + std::string(key) + "'");
    set_config_value(config, key, view.substr(eq + 1));
  }
  config.validate();
  return config;
}

/// Canonical form: every key, sorted, one `key = value` per line.
inline std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, binding] : detail::key_table()) out += key + " = " + binding.get(config) + '\n';
  return out;
}

}  // namespace safeaug

#endif  // SAFEAUG_CONFIG_HPP
