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

#ifndef SAFEAUG_EXPERIMENT_HPP
#define SAFEAUG_EXPERIMENT_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "safeaug/error.hpp"
#include "safeaug/evalkit.hpp"
#include "safeaug/image.hpp"
#include "safeaug/io.hpp"
#include "safeaug/manifest.hpp"
#include "safeaug/parallel.hpp"
#include "safeaug/resampling.hpp"

namespace safeaug {

struct EvalConfig {
  double quantile = 0.10;
  int grid_w = 16;
  int grid_h = 8;
  double lambda = 1.0;
  double test_fraction = 0.2;
  std::size_t hist_bins = 40;
  double hist_min = -5.0;
  double hist_max = 5.0;
  unsigned jobs = 1;

  void validate() const {
    if (!(quantile > 0.0 && quantile < 1.0)) throw Error(ErrorCode::kInvalidConfig, "eval.quantile must be in (0, 1)");
    if (grid_w < 1 || grid_h < 1) throw Error(ErrorCode::kInvalidConfig, "eval.grid_w/grid_h must be >= 1");
    if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "eval.lambda must be >= 0");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error(ErrorCode::kInvalidConfig, "eval.test_fraction");
    if (hist_bins < 1 || !(hist_max > hist_min)) throw Error(ErrorCode::kInvalidConfig, "eval.hist_*");
  }
};

/// Training-set variants, one per comparison row.
enum class Variant { kOriginal, kSmogn, kImportance, kOurs };

inline constexpr Variant kAllVariants[] = {Variant::kOriginal, Variant::kSmogn, Variant::kImportance, Variant::kOurs};

constexpr std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kOriginal: return "original";
    case Variant::kSmogn: return "smogn";
    case Variant::kImportance: return "importance";
    case Variant::kOurs: return "ours";
  }
  return "original";
}

inline Variant variant_from_string(std::string_view text) {
  for (auto v : kAllVariants) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown variant '" + std::string(text) + "'");
}

/// original: originals; ours: originals + augmented; smogn: originals + synthetic_smogn;
/// importance: the resampled records alone.
inline bool variant_includes(Variant v, Origin o) {
  switch (v) {
    case Variant::kOriginal: return o == Origin::kOriginal;
    case Variant::kOurs: return o == Origin::kOriginal || o == Origin::kAugmented;
    case Variant::kSmogn: return o == Origin::kOriginal || o == Origin::kSyntheticSmogn;
    case Variant::kImportance: return o == Origin::kResampled;
  }
  return false;
}

inline std::vector<const FrameRecord*> variant_records(const DatasetManifest& m, Variant v) {
  std::vector<const FrameRecord*> out;
  for (const auto& r : m.records) {
    if (variant_includes(v, r.origin)) out.push_back(&r);
  }
  return out;
}

/// Image-derived features are computed once per image file.
class FeatureExtractor {
 public:
  FeatureExtractor(const DatasetManifest& manifest, const EvalConfig& config) : manifest_(manifest), config_(config) {}

  /// Warms the cache for every image referenced by `records`, in parallel.
  void prefetch(std::span<const FrameRecord* const> records) {
    std::vector<std::string> todo;
    std::set<std::string> seen;
    for (const auto* r : records) {
      if (!r->features.empty() || r->image_path.empty()) continue;
      if (!cache_.contains(r->image_path) && seen.insert(r->image_path).second) todo.push_back(r->image_path);
    }
    std::vector<std::vector<double>> computed(todo.size());
    parallel_for(todo.size(), config_.jobs, [&](std::size_t i) { computed[i] = image_part(todo[i]); });
    for (std::size_t i = 0; i < todo.size(); ++i) cache_.emplace(todo[i], std::move(computed[i]));
  }

  [[nodiscard]] std::vector<double> operator()(const FrameRecord& r) {
    if (!r.features.empty()) return r.features;
    if (r.image_path.empty()) throw Error(ErrorCode::kInvalidManifest, r.frame_id + " has neither image nor features");
    auto it = cache_.find(r.image_path);
    if (it == cache_.end()) it = cache_.emplace(r.image_path, image_part(r.image_path)).first;
    auto f = it->second;
    f.push_back(r.kinematics.speed);
    return f;
  }

 private:
  [[nodiscard]] std::vector<double> image_part(const std::string& path) const {
    auto f = pooled_features(read_png_rgb(manifest_.resolve(path)), config_.grid_w, config_.grid_h, {});
    f.pop_back();
    return f;
  }

  const DatasetManifest& manifest_;
  EvalConfig config_;
  std::map<std::string, std::vector<double>> cache_;
};

inline RegressionRecord to_regression_record(const FrameRecord& r, FeatureExtractor& features) {
  return {features(r), r.kinematics.accel, r.frame_id};
}

/// Train-side originals as regression samples; baselines resample only these.
inline std::vector<RegressionRecord> train_regression_records(const DatasetManifest& m, const EvalConfig& config,
                                                              FeatureExtractor& features) {
  std::vector<const FrameRecord*> train;
  for (const auto& r : m.records) {
    if (r.origin == Origin::kOriginal && !is_test_frame(r, config.test_fraction)) train.push_back(&r);
  }
  features.prefetch(train);
  std::vector<RegressionRecord> out;
  out.reserve(train.size());
  for (const auto* r : train) out.push_back(to_regression_record(*r, features));
  return out;
}

/// Appends SMOGN synthetic records (feature-space only) drawn from the train-side originals.
inline DatasetManifest add_smogn_baseline(const DatasetManifest& m, const SmognParams& params,
                                          const EvalConfig& config) {
  FeatureExtractor features(m, config);
  const auto train = train_regression_records(m, config, features);
  const auto synthetic = smogn_oversample(train, params);
  DatasetManifest out = m;
  for (const auto& s : synthetic) {
    FrameRecord r;
    r.frame_id = s.record.source_id;
    r.kinematics = {s.record.features.back(), s.record.target};
    r.origin = Origin::kSyntheticSmogn;
    r.parent_id = s.seed_id;
    r.features = s.record.features;
    out.records.push_back(std::move(r));
  }
  out.meta["baseline.smogn.count"] = std::to_string(synthetic.size());
  validate(out);
  return out;
}

/// Appends an importance-resampled copy of the train-side originals.
inline DatasetManifest add_importance_baseline(const DatasetManifest& m, std::size_t n_bins, std::size_t out_size,
                                               std::uint64_t seed, const EvalConfig& config) {
  std::vector<RegressionRecord> train;
  std::vector<const FrameRecord*> sources;
  for (const auto& r : m.records) {
    if (r.origin == Origin::kOriginal && !is_test_frame(r, config.test_fraction)) {
      train.push_back({{}, r.kinematics.accel, r.frame_id});
      sources.push_back(&r);
    }
  }
  const auto picks = importance_resample_indices(train, n_bins, out_size, seed);
  DatasetManifest out = m;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    FrameRecord r = *sources[picks[k]];
    r.parent_id = r.frame_id;
    r.frame_id += "#is" + std::to_string(k);
    r.origin = Origin::kResampled;
    out.records.push_back(std::move(r));
  }
  out.meta["baseline.importance.count"] = std::to_string(picks.size());
  validate(out);
  return out;
}

struct ComparisonRow {
  Variant variant = Variant::kOriginal;
  MetricReport critical;
  MetricReport complete;
  std::size_t train_size = 0;
};

struct EvaluationSet {
  std::vector<const FrameRecord*> complete;  // test-side originals
  std::vector<const FrameRecord*> critical;  // ... that the split marks critical
};

inline EvaluationSet evaluation_set(const DatasetManifest& m, const SplitResult& split, const EvalConfig& config) {
  std::set<std::string_view> critical(split.critical.begin(), split.critical.end());
  EvaluationSet set;
  for (const auto& r : m.records) {
    if (r.origin != Origin::kOriginal || !is_test_frame(r, config.test_fraction)) continue;
    set.complete.push_back(&r);
    if (critical.contains(r.frame_id)) set.critical.push_back(&r);
  }
  if (set.complete.empty()) throw Error(ErrorCode::kEmptyInput, "no test-side original frames");
  if (set.critical.empty()) throw Error(ErrorCode::kEmptyInput, "no safety-critical frames on the test side");
  return set;
}

/// Split over original records only; augmentation is a training-side intervention.
inline SplitResult original_split(const DatasetManifest& m, double quantile) {
  std::vector<FrameRecord> originals;
  for (const auto& r : m.records) {
    if (r.origin == Origin::kOriginal) originals.push_back(r);
  }
  return split_safety_critical(originals, quantile);
}

/// Fits a ridge model per variant present in the manifest and scores it on the
/// held-out originals. Rows follow kAllVariants order.
inline std::vector<ComparisonRow> run_comparison(const DatasetManifest& m, const SplitResult& split,
                                                 const EvalConfig& config,
                                                 std::span<const Variant> variants = kAllVariants) {
  config.validate();
  FeatureExtractor features(m, config);
  const auto eval = evaluation_set(m, split, config);
  {
    std::vector<const FrameRecord*> all;
    for (const auto& r : m.records) all.push_back(&r);
    features.prefetch(all);
  }

  auto feature_matrix = [&](std::span<const FrameRecord* const> rows) {
    Eigen::MatrixXd x;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto f = features(*rows[i]);
      if (i == 0) x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(f.size()));
      if (static_cast<Eigen::Index>(f.size()) != x.cols()) {
        throw Error(ErrorCode::kLengthMismatch, rows[i]->frame_id + ": feature length differs");
      }
      x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), x.cols());
    }
    return x;
  };
  auto score = [&](const RidgeModel& model, std::span<const FrameRecord* const> rows, Subset subset) {
    const auto x = feature_matrix(rows);
    std::vector<double> pred(rows.size());
    std::vector<double> truth(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Eigen::RowVectorXd row = x.row(static_cast<Eigen::Index>(i));
      pred[i] = model.predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
      truth[i] = rows[i]->kinematics.accel;
    }
    return metric_report(pred, truth, subset);
  };

  std::vector<ComparisonRow> rows;
  for (auto v : variants) {
    std::vector<const FrameRecord*> train;
    for (const auto* r : variant_records(m, v)) {
      if (!is_test_frame(*r, config.test_fraction)) train.push_back(r);
    }
    if (v != Variant::kOriginal &&
        std::none_of(train.begin(), train.end(), [](const FrameRecord* r) { return r->origin != Origin::kOriginal; })) {
      continue;  // variant not present in this manifest
    }
    if (train.empty()) throw Error(ErrorCode::kEmptyInput, std::string(to_string(v)) + ": empty training set");
    std::vector<double> y;
    for (const auto* r : train) y.push_back(r->kinematics.accel);
    const auto model = ridge_fit(feature_matrix(train), Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()),
                                 config.lambda);
    rows.push_back({v, score(model, eval.critical, Subset::kCritical), score(model, eval.complete, Subset::kComplete),
                    train.size()});
  }
  return rows;
}

inline std::string comparison_json(std::span<const ComparisonRow> rows) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    for (const auto* report : {&row.critical, &row.complete}) {
      auto entry = report->to_json();
      entry["method"] = to_string(row.variant);
      entry["train_size"] = row.train_size;
      j.push_back(entry);
    }
  }
  return j.dump(2) + '\n';
}

/// Parses a `frame_id,prediction` CSV (header line required).
inline std::map<std::string, double> parse_predictions_csv(std::string_view text) {
  std::map<std::string, double> out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame_id,prediction", 0) != 0) {
    throw Error(ErrorCode::kInvalidManifest, "predictions CSV must start with 'frame_id,prediction'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    double value = 0.0;
    if (comma == std::string::npos || !parse_double(std::string_view(line).substr(comma + 1), value)) {
      throw Error(ErrorCode::kInvalidManifest, "predictions line " + std::to_string(line_no));
    }
    out[line.substr(0, comma)] = value;
  }
  return out;
}

/// Critical and complete metrics for externally produced predictions over the same
/// held-out originals run_comparison uses.
inline std::vector<MetricReport> evaluate_predictions(const DatasetManifest& m, const SplitResult& split,
                                                      const std::map<std::string, double>& predictions,
                                                      const EvalConfig& config) {
  const auto eval = evaluation_set(m, split, config);
  std::vector<MetricReport> out;
  for (auto subset : {Subset::kCritical, Subset::kComplete}) {
    const auto& rows = subset == Subset::kCritical ? eval.critical : eval.complete;
    std::vector<double> pred;
    std::vector<double> truth;
    for (const auto* r : rows) {
      const auto it = predictions.find(r->frame_id);
      if (it == predictions.end()) throw Error(ErrorCode::kMissingPrediction, r->frame_id);
      pred.push_back(it->second);
      truth.push_back(r->kinematics.accel);
    }
    out.push_back(metric_report(pred, truth, subset));
  }
  return out;
}

}  // namespace safeaug

#endif  // SAFEAUG_EXPERIMENT_HPP
