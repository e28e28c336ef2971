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

#ifndef SAFEAUG_EVALKIT_HPP
#define SAFEAUG_EVALKIT_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "safeaug/error.hpp"
#include "safeaug/image.hpp"
#include "safeaug/io.hpp"
#include "safeaug/manifest.hpp"
#include "safeaug/types.hpp"

namespace safeaug {

// ---------------------------------------------------------------------------
// Safety-critical split

struct SplitResult {
  std::vector<std::string> critical;
  std::vector<std::string> general;
  double quantile = 0.10;

  friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

/// Among records with a front vehicle, the ceil(quantile * N_front) smallest accelerations
/// (ties by frame_id) are critical. Every other record, with or without a front vehicle, is general.
inline SplitResult split_safety_critical(std::span<const FrameRecord> records, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw Error(ErrorCode::kInvalidConfig, "split quantile must be in (0, 1)");
  std::vector<const FrameRecord*> front;
  for (const auto& r : records) {
    if (r.front_box) front.push_back(&r);
  }
  if (front.empty()) throw Error(ErrorCode::kNoFrontVehicleRecords, "no record has a front vehicle");
  std::sort(front.begin(), front.end(), [](const FrameRecord* a, const FrameRecord* b) {
    if (a->kinematics.accel != b->kinematics.accel) return a->kinematics.accel < b->kinematics.accel;
    return a->frame_id < b->frame_id;
  });
  const auto n_critical = ceil_count(quantile, front.size());
  SplitResult split;
  split.quantile = quantile;
  std::vector<std::string_view> critical_ids;
  for (std::size_t i = 0; i < n_critical; ++i) {
    split.critical.push_back(front[i]->frame_id);
    critical_ids.push_back(front[i]->frame_id);
  }
  std::sort(critical_ids.begin(), critical_ids.end());
  for (const auto& r : records) {
    if (!std::binary_search(critical_ids.begin(), critical_ids.end(), std::string_view(r.frame_id))) {
      split.general.push_back(r.frame_id);
    }
  }
  return split;
}

inline std::string serialize_split(const SplitResult& split) {
  nlohmann::ordered_json j;
  j["quantile"] = split.quantile;
  j["critical"] = split.critical;
  j["general"] = split.general;
  return j.dump(2) + '\n';
}

inline SplitResult parse_split(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return {j.at("critical").get<std::vector<std::string>>(), j.at("general").get<std::vector<std::string>>(),
            j.at("quantile").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, std::string("split file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metrics

namespace detail {

inline void check_metric_inputs(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(pred.size()) + " vs " + std::to_string(truth.size()));
  }
  if (pred.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions");
}

}  // namespace detail

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
  detail::check_metric_inputs(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

inline double mae(std::span<const double> pred, std::span<const double> truth) {
  detail::check_metric_inputs(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size());
}

enum class Subset { kCritical, kComplete };

constexpr std::string_view to_string(Subset s) { return s == Subset::kCritical ? "critical" : "complete"; }

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;
  Subset subset = Subset::kComplete;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    return {{"subset", to_string(subset)}, {"rmse", rmse}, {"mae", mae}, {"n", n}};
  }
};

inline MetricReport metric_report(std::span<const double> pred, std::span<const double> truth, Subset subset) {
  return {rmse(pred, truth), mae(pred, truth), pred.size(), subset};
}

// ---------------------------------------------------------------------------
// Acceleration histogram

/// Equal-width bins over [lo, hi]; values outside clamp to the end bins.
inline std::vector<std::size_t> accel_histogram(std::span<const double> accels, std::size_t n_bins, double lo,
                                                double hi) {
  if (n_bins < 1) throw Error(ErrorCode::kInvalidConfig, "n_bins must be >= 1");
  if (!(hi > lo)) throw Error(ErrorCode::kInvalidConfig, "histogram range must be non-empty");
  std::vector<std::size_t> counts(n_bins, 0);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (double a : accels) {
    const double pos = std::floor((a - lo) / width);
    const auto bin = pos < 0.0 ? 0 : std::min(static_cast<std::size_t>(pos), n_bins - 1);
    ++counts[bin];
  }
  return counts;
}

inline std::vector<std::size_t> accel_histogram(std::span<const FrameRecord> records, std::size_t n_bins, double lo,
                                                double hi) {
  std::vector<double> accels;
  accels.reserve(records.size());
  for (const auto& r : records) accels.push_back(r.kinematics.accel);
  return accel_histogram(accels, n_bins, lo, hi);
}

/// Two-column CSV `bin_center,count`.
inline std::string histogram_csv(std::span<const std::size_t> counts, double lo, double hi) {
  std::ostringstream out;
  out << "bin_center,count\n";
  const double width = (hi - lo) / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out << format_double(lo + (static_cast<double>(i) + 0.5) * width) << ',' << counts[i] << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Pooled features

/// Mean gray level (channel average / 255) of each cell of a gw x gh grid, row-major,
/// followed by the speed. Cell edges are floor(i * W / gw).
inline std::vector<double> pooled_features(const RgbImage& image, int gw, int gh, const Kinematics& kinematics) {
  if (gw < 1 || gh < 1) throw Error(ErrorCode::kInvalidConfig, "feature grid must be at least 1x1");
  if (gw > image.width() || gh > image.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature grid finer than the image");
  }
  std::vector<double> features;
  features.reserve(static_cast<std::size_t>(gw) * gh + 1);
  const long w = image.width();
  const long h = image.height();
  for (long j = 0; j < gh; ++j) {
    const long v0 = j * h / gh;
    const long v1 = (j + 1) * h / gh;
    for (long i = 0; i < gw; ++i) {
      const long u0 = i * w / gw;
      const long u1 = (i + 1) * w / gw;
      std::uint64_t sum = 0;
      for (long v = v0; v < v1; ++v) {
        for (long u = u0; u < u1; ++u) {
          const auto& p = image(static_cast<int>(u), static_cast<int>(v));
          sum += p[0] + p[1] + p[2];
        }
      }
      const double n = static_cast<double>((v1 - v0) * (u1 - u0));
      features.push_back(static_cast<double>(sum) / (3.0 * 255.0 * n));
    }
  }
  features.push_back(kinematics.speed);
  return features;
}

// ---------------------------------------------------------------------------
// Ridge regression

/// Linear model y = intercept + weights . x, fitted on standardized columns.
struct RidgeModel {
  double intercept = 0.0;
  Eigen::VectorXd weights;       // original feature scale
  Eigen::VectorXd standardized;  // coefficients on standardized features

  [[nodiscard]] double predict(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(weights.size())) {
      throw Error(ErrorCode::kLengthMismatch, "feature length differs from the fitted model");
    }
    double y = intercept;
    for (std::size_t i = 0; i < x.size(); ++i) y += weights[static_cast<Eigen::Index>(i)] * x[i];
    return y;
  }

  /// (intercept, w_1, ..., w_d)
  [[nodiscard]] std::vector<double> coefficients() const {
    std::vector<double> out{intercept};
    out.insert(out.end(), weights.data(), weights.data() + weights.size());
    return out;
  }
};

/// Solves (Z'Z + lambda I) b = Z'(y - mean(y)) on z-scored columns Z. Centering keeps the
/// intercept out of the penalty. Throws SingularSystem when lambda = 0 and Z'Z is rank deficient.
inline RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "lambda must be >= 0");
  if (x.rows() != y.size()) throw Error(ErrorCode::kLengthMismatch, "rows of X differ from length of y");
  if (x.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no training rows");

  const auto n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd z = x.rowwise() - mean;
  Eigen::VectorXd scale = ((z.array().square().colwise().sum()) / n).sqrt().matrix().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale[j] > 0.0)) scale[j] = 1.0;
  }
  z = z * scale.cwiseInverse().asDiagonal();
  const double y_mean = y.mean();

  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = z.transpose() * (y.array() - y_mean).matrix();

  if (lambda == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double max_eig = eig.eigenvalues().maxCoeff();
    if (eig.eigenvalues().minCoeff() <= 1e-10 * std::max(1.0, max_eig)) {
      throw Error(ErrorCode::kSingularSystem, "normal equations are rank deficient");
    }
  }

  RidgeModel model;
  model.standardized = gram.ldlt().solve(rhs);
  model.weights = model.standardized.cwiseQuotient(scale);
  model.intercept = y_mean - mean.dot(model.weights);
  return model;
}

inline double ridge_predict(const RidgeModel& model, std::span<const double> features) {
  return model.predict(features);
}

// ---------------------------------------------------------------------------
// Train/test assignment

/// Deterministic hash split on the root frame id, so derived records share their parent's side.
inline bool is_test_frame(const FrameRecord& record, double test_fraction) {
  const auto bucket = fnv1a64(record.root_id()) % 10000;
  return static_cast<double>(bucket) < test_fraction * 10000.0;
}

}  // namespace safeaug

#endif  // SAFEAUG_EVALKIT_HPP
