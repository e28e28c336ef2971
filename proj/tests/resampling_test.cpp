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


#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "safeaug/resampling.hpp"
#include "test_util.hpp"

namespace safeaug {
namespace {

RegressionRecord rec(std::vector<double> f, double t, std::string id) { return {std::move(f), t, std::move(id)}; }

TEST(RelevanceSplit, Examples) {
  const std::vector<RegressionRecord> records{rec({0}, 1, "a"), rec({0}, -1, "b"), rec({0}, -5, "c"),
                                              rec({0}, 0, "d")};
  const auto split = relevance_split(records, 0.25);
  ASSERT_EQ(split.rare.size(), 1u);
  EXPECT_EQ(split.rare[0].target, -5.0);
  EXPECT_EQ(split.normal.size(), 3u);

  const std::vector<RegressionRecord> equal{rec({0}, 2, "z"), rec({0}, 2, "x"), rec({0}, 2, "y")};
  const auto tie = relevance_split(equal, 0.5);
  ASSERT_EQ(tie.rare.size(), 2u);
  EXPECT_EQ(tie.rare[0].source_id, "x");
  EXPECT_EQ(tie.rare[1].source_id, "y");

  EXPECT_ERROR_CODE(relevance_split(std::vector<RegressionRecord>{rec({0}, 1, "a")}, 0.1), ErrorCode::kTooFewRecords);
}

TEST(RelevanceSplit, RareAreTheSmallestTargets) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t n : {2, 3, 10, 37, 100}) {
    std::vector<RegressionRecord> records;
    std::vector<double> targets;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back(rec({}, g(rng), std::to_string(i)));
      targets.push_back(records.back().target);
    }
    const auto split = relevance_split(records, 0.1);
    std::vector<double> rare;
    for (const auto& r : split.rare) rare.push_back(r.target);
    EXPECT_EQ(rare, oracle::smallest(targets, static_cast<std::size_t>(std::ceil(0.1 * n))));
    EXPECT_EQ(split.rare.size() + split.normal.size(), n);
  }
}

TEST(Smogn, InterpolationExample) {
  const auto a = rec({0, 0}, 1, "a");
  const auto b = rec({1, 1}, 3, "b");
  const auto s = smogn_interpolate(a, b, 0.5);
  EXPECT_EQ(s.features, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(s.target, 2.0);
}

TEST(Smogn, TwoRareRecordsZeroNoise) {
  // rare = the two lowest of twenty; every sample lies on their segment
  std::vector<RegressionRecord> records{rec({0, 0}, 1, "a"), rec({1, 1}, 3, "b")};
  for (int i = 0; i < 18; ++i) records.push_back(rec({double(i), double(-i)}, 10.0 + i, "n" + std::to_string(i)));
  SmognParams p;
  p.pert = 0.0;
  p.n_synth = 50;
  const auto out = smogn_oversample(records, p);
  ASSERT_EQ(out.size(), 50u);
  for (const auto& s : out) {
    const double l = s.lambda;
    const bool from_a = s.seed_id == "a";
    const double t = from_a ? 1 + 2 * l : 3 - 2 * l;
    EXPECT_DOUBLE_EQ(s.record.target, t);
    EXPECT_DOUBLE_EQ(s.record.features[0], from_a ? l : 1 - l);
    EXPECT_GE(l, 0.0);
    EXPECT_LT(l, 1.0);
  }
}

// Brute-force k nearest rare neighbours in z-scored feature space.
std::set<std::string> knn_oracle(const std::vector<RegressionRecord>& all, const std::vector<RegressionRecord>& rare,
                                 const RegressionRecord& seed, std::size_t k) {
  const std::size_t dims = seed.features.size();
  std::vector<double> mean(dims), sd(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    for (const auto& r : all) mean[d] += r.features[d] / all.size();
    for (const auto& r : all) sd[d] += (r.features[d] - mean[d]) * (r.features[d] - mean[d]) / all.size();
    sd[d] = std::sqrt(sd[d]);
  }
  std::vector<std::pair<double, std::string>> dist;
  for (const auto& r : rare) {
    if (r.source_id == seed.source_id) continue;
    double s = 0;
    for (std::size_t d = 0; d < dims; ++d) s += std::pow((r.features[d] - seed.features[d]) / sd[d], 2);
    dist.emplace_back(s, r.source_id);
  }
  std::sort(dist.begin(), dist.end());
  std::set<std::string> out;
  for (std::size_t i = 0; i < k && i < dist.size(); ++i) out.insert(dist[i].second);
  return out;
}

TEST(Smogn, ZeroNoiseSamplesLieOnNeighbourSegments) {
  const auto records = oracle::skewed_dataset(300, 4);
  const auto rare = relevance_split(records, 0.1).rare;
  std::map<std::string, RegressionRecord> by_id;
  for (const auto& r : records) by_id[r.source_id] = r;

  SmognParams p;
  p.pert = 0.0;
  p.n_synth = 200;
  p.seed = 77;
  for (const auto& s : smogn_oversample(records, p)) {
    const auto& seed = by_id.at(s.seed_id);
    const auto& nbr = by_id.at(s.neighbor_id);
    EXPECT_TRUE(knn_oracle(records, rare, seed, p.k).contains(s.neighbor_id));
    const auto expected = smogn_interpolate(seed, nbr, s.lambda);
    EXPECT_EQ(s.record.features, expected.features);
    EXPECT_EQ(s.record.target, expected.target);
  }
}

TEST(Smogn, TargetsWithinThreeSigmaOfRareRange) {
  const auto records = oracle::skewed_dataset(500, 6);
  const auto rare = relevance_split(records, 0.1).rare;
  double lo = rare.front().target;
  double hi = lo;
  for (const auto& r : rare) {
    lo = std::min(lo, r.target);
    hi = std::max(hi, r.target);
  }
  SmognParams p;
  p.n_synth = 500;
  p.seed = 3;
  const double slack = 3 * p.pert * (hi - lo);
  for (const auto& s : smogn_oversample(records, p)) {
    EXPECT_GE(s.record.target, lo - slack);
    EXPECT_LE(s.record.target, hi + slack);
  }
}

TEST(Smogn, DeterministicAndDefaults) {
  const auto records = oracle::skewed_dataset(120, 9);
  SmognParams p;
  p.seed = 42;
  const auto a = smogn_oversample(records, p);
  const auto b = smogn_oversample(records, p);
  ASSERT_EQ(a.size(), 12u);  // ceil(0.1 * 120)
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].record, b[i].record);
    EXPECT_EQ(a[i].neighbor_id, b[i].neighbor_id);
  }
  p.seed = 43;
  EXPECT_NE(smogn_oversample(records, p)[0].record, a[0].record);
}

TEST(Smogn, Errors) {
  std::vector<RegressionRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back(rec({double(i)}, i, std::to_string(i)));
  SmognParams p;  // rare = ceil(0.1 * 10) = 1
  EXPECT_ERROR_CODE(smogn_oversample(records, p), ErrorCode::kInsufficientRare);
  p.rare_quantile = 0.2;
  EXPECT_NO_THROW(smogn_oversample(records, p));
  p.k = 0;
  EXPECT_ERROR_CODE(smogn_oversample(records, p), ErrorCode::kInvalidConfig);
}

TEST(Importance, TwoBinWeights) {
  std::vector<RegressionRecord> records;
  for (int i = 0; i < 9; ++i) records.push_back(rec({}, 0.0, "c" + std::to_string(i)));
  records.push_back(rec({}, -5.0, "rare"));
  const auto w = importance_weights(records, 2);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(w[i], 1.0 / 18.0, 1e-15);
  EXPECT_NEAR(w[9], 0.5, 1e-15);

  const auto idx = importance_resample_indices(records, 2, 100000, 1);
  const double rare_mass = std::count(idx.begin(), idx.end(), 9u) / 1e5;
  EXPECT_NEAR(rare_mass, 0.5, 0.01);
}

TEST(Importance, UniformAndDegenerate) {
  std::vector<RegressionRecord> records;
  for (int i = 0; i < 8; ++i) records.push_back(rec({}, i, std::to_string(i)));
  for (double w : importance_weights(records, 4)) EXPECT_DOUBLE_EQ(w, 1.0 / 8.0);
  const std::vector<RegressionRecord> flat{rec({}, 1, "a"), rec({}, 1, "b")};
  EXPECT_ERROR_CODE(importance_weights(flat, 4), ErrorCode::kDegenerateRange);
}

TEST(Importance, OutputIsDrawnFromInputAndDeterministic) {
  const auto records = oracle::skewed_dataset(200, 2);
  const auto a = importance_resample(records, 20, 0, 5);
  EXPECT_EQ(a.size(), records.size());
  for (const auto& r : a) EXPECT_NE(std::find(records.begin(), records.end(), r), records.end());
  EXPECT_EQ(a, importance_resample(records, 20, 0, 5));
}

TEST(Baselines, AmplifyRareMass) {
  const auto input = oracle::skewed_dataset(1000, 10);
  const double base = oracle::bottom_decile_mass(input, input);
  EXPECT_NEAR(base, 0.1, 1e-12);

  SmognParams p;
  p.seed = 1;
  auto with_smogn = input;
  for (const auto& s : smogn_oversample(input, p)) with_smogn.push_back(s.record);
  EXPECT_GE(oracle::bottom_decile_mass(input, with_smogn), 1.5 * base);

  EXPECT_GE(oracle::bottom_decile_mass(input, importance_resample(input, 20, 0, 1)), 1.5 * base);
}

}  // namespace
}  // namespace safeaug
