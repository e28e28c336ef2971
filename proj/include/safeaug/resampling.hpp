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

#ifndef SAFEAUG_RESAMPLING_HPP
#define SAFEAUG_RESAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "safeaug/error.hpp"
#include "safeaug/types.hpp"

namespace safeaug {

/// One (features -> acceleration) training sample.
struct RegressionRecord {
  std::vector<double> features;
  double target = 0.0;
  std::string source_id;

  friend bool operator==(const RegressionRecord&, const RegressionRecord&) = default;
};

struct RelevanceSplit {
  std::vector<RegressionRecord> rare;
  std::vector<RegressionRecord> normal;
};

namespace detail {

inline std::vector<std::size_t> order_by_target(std::span<const RegressionRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].target != records[b].target) return records[a].target < records[b].target;
    return records[a].source_id < records[b].source_id;
  });
  return order;
}

}  // namespace detail

/// The ceil(rare_quantile * N) lowest targets are rare (ties by source_id); the rest are normal.
inline RelevanceSplit relevance_split(std::span<const RegressionRecord> records, double rare_quantile) {
  if (!(rare_quantile > 0.0 && rare_quantile < 1.0)) throw Error(ErrorCode::kInvalidConfig, "rare_quantile must be in (0, 1)");
  if (records.size() < 2) throw Error(ErrorCode::kTooFewRecords, std::to_string(records.size()) + " records");
  const auto order = detail::order_by_target(records);
  const auto n_rare = ceil_count(rare_quantile, records.size());
  RelevanceSplit split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_rare ? split.rare : split.normal).push_back(records[order[i]]);
  }
  return split;
}

struct SmognParams {
  std::size_t k = 5;
  double pert = 0.02;
  double rare_quantile = 0.10;
  std::size_t n_synth = 0;  // 0: one synthetic sample per ten input records
  std::uint64_t seed = 0;
};

struct SyntheticSample {
  RegressionRecord record;
  std::string seed_id;
  std::string neighbor_id;
  double lambda = 0.0;
};

/// seed + lambda * (neighbor - seed), plus additive noise per feature and on the target.
inline RegressionRecord smogn_interpolate(const RegressionRecord& seed, const RegressionRecord& neighbor, double lambda,
                                          std::span<const double> feature_noise = {}, double target_noise = 0.0) {
  RegressionRecord out;
  out.features.resize(seed.features.size());
  for (std::size_t d = 0; d < seed.features.size(); ++d) {
    const double eps = d < feature_noise.size() ? feature_noise[d] : 0.0;
    out.features[d] = seed.features[d] + lambda * (neighbor.features[d] - seed.features[d]) + eps;
  }
  out.target = seed.target + lambda * (neighbor.target - seed.target) + target_noise;
  return out;
}

/// k nearest rare neighbours of each rare record, by Euclidean distance over features
/// standardized with statistics of `all`. Ties resolve to the lower index.
inline std::vector<std::vector<std::size_t>> rare_neighbors(std::span<const RegressionRecord> all,
                                                            std::span<const RegressionRecord> rare, std::size_t k) {
  const std::size_t dims = all.empty() ? 0 : all.front().features.size();
  std::vector<double> mean(dims, 0.0);
  std::vector<double> inv_std(dims, 1.0);
  for (const auto& r : all) {
    for (std::size_t d = 0; d < dims; ++d) mean[d] += r.features[d];
  }
  for (auto& m : mean) m /= static_cast<double>(all.size());
  for (std::size_t d = 0; d < dims; ++d) {
    double var = 0.0;
    for (const auto& r : all) var += (r.features[d] - mean[d]) * (r.features[d] - mean[d]);
    var /= static_cast<double>(all.size());
    inv_std[d] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  }

  const std::size_t kk = std::min(k, rare.size() - 1);
  std::vector<std::vector<std::size_t>> out(rare.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < rare.size(); ++i) {
    dist.clear();
    for (std::size_t j = 0; j < rare.size(); ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        const double diff = (rare[i].features[d] - rare[j].features[d]) * inv_std[d];
        s += diff * diff;
      }
      dist.emplace_back(s, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t n = 0; n < kk; ++n) out[i].push_back(dist[n].second);
  }
  return out;
}

/// SMOGN-style oversampling of the low-target tail: interpolate between a rare record and
/// one of its k nearest rare neighbours, then perturb with Gaussian noise whose standard
/// deviation is pert times the rare set's per-dimension range.
inline std::vector<SyntheticSample> smogn_oversample(std::span<const RegressionRecord> records,
                                                     const SmognParams& params) {
  if (params.k < 1) throw Error(ErrorCode::kInvalidConfig, "smogn k must be >= 1");
  if (!(params.pert >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "smogn pert must be >= 0");
  const auto split = relevance_split(records, params.rare_quantile);
  const auto& rare = split.rare;
  if (rare.size() < 2) throw Error(ErrorCode::kInsufficientRare, std::to_string(rare.size()) + " rare records");

  const std::size_t dims = rare.front().features.size();
  std::vector<double> feature_sd(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto [lo, hi] = std::minmax_element(rare.begin(), rare.end(), [d](const auto& a, const auto& b) {
      return a.features[d] < b.features[d];
    });
    feature_sd[d] = params.pert * (hi->features[d] - lo->features[d]);
  }
  const auto [tlo, thi] = std::minmax_element(rare.begin(), rare.end(),
                                              [](const auto& a, const auto& b) { return a.target < b.target; });
  const double target_sd = params.pert * (thi->target - tlo->target);

  const auto neighbors = rare_neighbors(records, rare, params.k);
  const std::size_t n_synth = params.n_synth > 0 ? params.n_synth : ceil_count(0.10, records.size());

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick_seed(0, rare.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<SyntheticSample> out;
  out.reserve(n_synth);
  std::vector<double> noise(dims);
  for (std::size_t s = 0; s < n_synth; ++s) {
    const auto si = pick_seed(rng);
    const auto& nbrs = neighbors[si];
    std::uniform_int_distribution<std::size_t> pick_nbr(0, nbrs.size() - 1);
    const auto ni = nbrs[pick_nbr(rng)];
    const double lambda = unit(rng);
    for (std::size_t d = 0; d < dims; ++d) noise[d] = feature_sd[d] * gauss(rng);
    const double target_noise = target_sd * gauss(rng);

    SyntheticSample sample;
    sample.record = smogn_interpolate(rare[si], rare[ni], lambda, noise, target_noise);
    sample.record.source_id = rare[si].source_id + "#smogn" + std::to_string(s);
    sample.seed_id = rare[si].source_id;
    sample.neighbor_id = rare[ni].source_id;
    sample.lambda = lambda;
    out.push_back(std::move(sample));
  }
  return out;
}

/// Selection probability of each record: proportional to 1 / (records in its target bin),
/// bins of equal width over [min, max] of the targets.
inline std::vector<double> importance_weights(std::span<const RegressionRecord> records, std::size_t n_bins) {
  if (n_bins < 2) throw Error(ErrorCode::kInvalidConfig, "importance n_bins must be >= 2");
  if (records.empty()) throw Error(ErrorCode::kTooFewRecords, "no records");
  const auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                            [](const auto& a, const auto& b) { return a.target < b.target; });
  const double min = lo->target;
  const double range = hi->target - min;
  if (!(range > 0.0)) throw Error(ErrorCode::kDegenerateRange, "all targets equal");

  std::vector<std::size_t> bin(records.size());
  std::vector<std::size_t> counts(n_bins, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto b = static_cast<std::size_t>(std::floor((records[i].target - min) / range * static_cast<double>(n_bins)));
    bin[i] = std::min(b, n_bins - 1);
    ++counts[bin[i]];
  }
  std::vector<double> weights(records.size());
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    weights[i] = 1.0 / static_cast<double>(counts[bin[i]]);
    total += weights[i];
  }
  for (auto& w : weights) w /= total;
  return weights;
}

/// Indices drawn with replacement according to importance_weights. out_size 0 means |records|.
inline std::vector<std::size_t> importance_resample_indices(std::span<const RegressionRecord> records,
                                                            std::size_t n_bins, std::size_t out_size,
                                                            std::uint64_t seed) {
  const auto weights = importance_weights(records, n_bins);
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  if (out_size == 0) out_size = records.size();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, cumulative.back());
  std::vector<std::size_t> out(out_size);
  for (auto& idx : out) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unit(rng));
    idx = std::min(static_cast<std::size_t>(it - cumulative.begin()), records.size() - 1);
  }
  return out;
}

inline std::vector<RegressionRecord> importance_resample(std::span<const RegressionRecord> records, std::size_t n_bins,
                                                         std::size_t out_size, std::uint64_t seed) {
  std::vector<RegressionRecord> out;
  for (auto i : importance_resample_indices(records, n_bins, out_size, seed)) out.push_back(records[i]);
  return out;
}

}  // namespace safeaug

#endif  // SAFEAUG_RESAMPLING_HPP
