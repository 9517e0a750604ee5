// Copyright 2026 The causal-eval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "causal_eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "reference_metrics.h"

namespace causal_eval {
namespace {

struct Instance {
  std::vector<int> y;
  std::vector<double> r;
  std::vector<int> a;
};

// Scores on a coarse grid so ties occur.
Instance RandomInstance(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Instance out;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::round(unit(gen) * 200.0) / 200.0;
    out.r.push_back(std::clamp(r, 0.0, 1.0));
    out.y.push_back(unit(gen) < r ? 1 : 0);
    out.a.push_back(unit(gen) < 0.4 ? 1 : 0);
  }
  return out;
}

MetricId Id(MetricKind kind) {
  MetricId id;
  id.kind = kind;
  return id;
}

TEST(MetricsTest, WorkedExamples) {
  EXPECT_NEAR(Evaluate(Id(MetricKind::kLogLoss), std::vector<int>{1},
                       std::vector<double>{0.5})->value,
              0.693147, 1e-6);
  EXPECT_EQ(Evaluate(Id(MetricKind::kNetBenefit), std::vector<int>{1, 0, 0},
                     std::vector<double>{0.9, 0.9, 0.1})->value,
            0.0);
  EXPECT_EQ(Evaluate(Id(MetricKind::kAucRoc), std::vector<int>{0, 1},
                     std::vector<double>{0.2, 0.8})->value,
            1.0);
  EXPECT_EQ(Evaluate(Id(MetricKind::kAucRoc), std::vector<int>{0, 1},
                     std::vector<double>{0.5, 0.5})->value,
            0.5);
}

TEST(MetricsTest, ThresholdDefaults) {
  EXPECT_EQ(ThresholdDefaults().decision, 0.5);
  EXPECT_EQ(ThresholdDefaults().preference, 0.5);
}

TEST(MetricsTest, UniformWeightsMatchUnweightedReference) {
  const Instance data = RandomInstance(1000, 1);
  const std::vector<double> ones(data.y.size(), 1.0);
  const std::vector<double> scaled(data.y.size(), 3.7);
  for (const MetricId& metric : AllMetrics()) {
    const auto expected = reference::ReferenceMetric(metric.kind, data.y, data.r);
    ASSERT_TRUE(expected.has_value());
    for (const auto* w : {&ones, &scaled}) {
      auto got = Evaluate(metric, data.y, data.r, *w);
      ASSERT_TRUE(got.ok());
      ASSERT_TRUE(got->defined()) << metric.Name();
      EXPECT_NEAR(got->value, *expected, 1e-12) << metric.Name();
    }
    EXPECT_NEAR(Evaluate(metric, data.y, data.r)->value, *expected, 1e-12) << metric.Name();
  }
}

TEST(MetricsTest, WeightedAucMatchesPairwiseProducts) {
  const Instance data = RandomInstance(300, 2);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 2.0);
  std::vector<double> w(data.y.size());
  for (double& v : w) v = unit(gen);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (data.y[i] != 1 || data.y[j] != 0) continue;
      den += w[i] * w[j];
      num += w[i] * w[j] * ((data.r[i] > data.r[j]) + 0.5 * (data.r[i] == data.r[j]));
    }
  }
  EXPECT_NEAR(Evaluate(Id(MetricKind::kAucRoc), data.y, data.r, w)->value, num / den, 1e-12);
}

TEST(MetricsTest, WeightedNetBenefitMatchesFormula) {
  const Instance data = RandomInstance(200, 4);
  std::vector<double> w(data.y.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 + (i % 7);
  MetricId id = Id(MetricKind::kNetBenefit);
  id.preference = 0.2;
  double tp = 0, fp = 0, total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total += w[i];
    if (data.r[i] < 0.5) continue;
    (data.y[i] == 1 ? tp : fp) += w[i];
  }
  EXPECT_NEAR(Evaluate(id, data.y, data.r, w)->value, (tp - 0.25 * fp) / total, 1e-12);
}

TEST(MetricsTest, IndicatorWeightsEqualSubgroupMetric) {
  const Instance data = RandomInstance(800, 5);
  std::vector<double> w;
  std::vector<int> sub_y;
  std::vector<double> sub_r;
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    w.push_back(data.a[i] == 1 ? 1.0 : 0.0);
    if (data.a[i] == 1) {
      sub_y.push_back(data.y[i]);
      sub_r.push_back(data.r[i]);
    }
  }
  for (const MetricId& metric : AllMetrics()) {
    const double weighted = Evaluate(metric, data.y, data.r, w)->value;
    const double subgroup = Evaluate(metric, sub_y, sub_r)->value;
    EXPECT_NEAR(weighted, subgroup, 1e-12) << metric.Name();
  }
}

TEST(MetricsTest, EvaluateManyMatchesEvaluate) {
  const Instance data = RandomInstance(500, 6);
  const ScoreIndex index(data.y, data.r);
  std::vector<double> w(data.y.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (i % 5 == 0) ? 0.0 : 1.0 + 0.1 * (i % 3);
  const std::vector<MetricId> metrics = AllMetrics();
  std::vector<MetricResult> out(metrics.size());
  EvaluateMany(metrics, data.y, data.r, index, w, out);
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    auto single = Evaluate(metrics[m], data.y, data.r, w);
    ASSERT_TRUE(single.ok());
    EXPECT_NEAR(out[m].value, single->value, 1e-12) << metrics[m].Name();
    EXPECT_NEAR(out[m].effective_sample_size, single->effective_sample_size, 1e-9);
  }
}

TEST(MetricsTest, UndefinedCasesCarryReasons) {
  const std::vector<int> negatives = {0, 0, 0};
  const std::vector<double> low = {0.1, 0.2, 0.3};
  for (MetricKind kind : {MetricKind::kSensitivity, MetricKind::kAucRoc, MetricKind::kPrecision}) {
    auto result = Evaluate(Id(kind), negatives, low);
    ASSERT_TRUE(result.ok());
    EXPECT_FALSE(result->defined());
    EXPECT_FALSE(result->undefined_reason->empty());
  }
  EXPECT_FALSE(
      Evaluate(Id(MetricKind::kSpecificity), std::vector<int>{1, 1}, std::vector<double>{0.1, 0.2})->defined());
  // Defined metrics on the same rows stay defined.
  EXPECT_TRUE(Evaluate(Id(MetricKind::kSpecificity), negatives, low)->defined());
  EXPECT_EQ(Evaluate(Id(MetricKind::kNetBenefit), negatives, low)->value, 0.0);
}

TEST(MetricsTest, ZeroWeightOnPositivesIsUndefined) {
  const std::vector<int> y = {1, 0, 0};
  const std::vector<double> r = {0.9, 0.2, 0.7};
  const std::vector<double> w = {0.0, 1.0, 1.0};
  EXPECT_FALSE(Evaluate(Id(MetricKind::kSensitivity), y, r, w)->defined());
  EXPECT_FALSE(Evaluate(Id(MetricKind::kAucRoc), y, r, w)->defined());
}

TEST(MetricsTest, InvalidInputsAreErrors) {
  const std::vector<int> y = {1, 0};
  const std::vector<double> r = {0.9, 0.2};
  EXPECT_FALSE(Evaluate(Id(MetricKind::kLogLoss), y, std::vector<double>{0.5}).ok());
  EXPECT_FALSE(Evaluate(Id(MetricKind::kLogLoss), y, r, std::vector<double>{1.0, -1.0}).ok());
  EXPECT_FALSE(Evaluate(Id(MetricKind::kLogLoss), y, r, std::vector<double>{0.0, 0.0}).ok());
  EXPECT_FALSE(Evaluate(Id(MetricKind::kLogLoss), y, r, std::vector<double>{1.0, NAN}).ok());
}

TEST(MetricsTest, AucInvariantUnderIncreasingTransform) {
  const Instance data = RandomInstance(400, 7);
  std::vector<double> transformed;
  for (double r : data.r) transformed.push_back(std::exp(3.0 * r) - 2.0);
  EXPECT_EQ(Evaluate(Id(MetricKind::kAucRoc), data.y, data.r)->value,
            Evaluate(Id(MetricKind::kAucRoc), data.y, transformed)->value);
}

TEST(MetricsTest, ThresholdedMetricsInvariantUnderCrossingPreservingMaps) {
  const Instance data = RandomInstance(400, 8);
  std::vector<double> squashed;
  for (double r : data.r) squashed.push_back(0.5 + 0.5 * std::tanh(r - 0.5));
  for (MetricKind kind : {MetricKind::kSensitivity, MetricKind::kSpecificity,
                          MetricKind::kPrecision, MetricKind::kNetBenefit,
                          MetricKind::kClassificationRate}) {
    EXPECT_EQ(Evaluate(Id(kind), data.y, data.r)->value,
              Evaluate(Id(kind), data.y, squashed)->value);
  }
}

TEST(MetricsTest, RangesAndEffectiveSampleSize) {
  const Instance data = RandomInstance(300, 9);
  std::vector<double> w(data.y.size(), 1.0);
  w[0] = 50.0;
  for (const MetricId& metric : AllMetrics()) {
    auto result = Evaluate(metric, data.y, data.r, w);
    ASSERT_TRUE(result.ok() && result->defined());
    if (metric.kind == MetricKind::kLogLoss) {
      EXPECT_GE(result->value, 0.0);
    } else if (metric.kind != MetricKind::kNetBenefit) {
      EXPECT_GE(result->value, 0.0);
      EXPECT_LE(result->value, 1.0);
    }
    EXPECT_GE(result->effective_sample_size, 1.0);
  }
  EXPECT_NEAR(Evaluate(Id(MetricKind::kLogLoss), data.y, data.r)->effective_sample_size, 300.0,
              1e-9);
}

TEST(MetricsTest, LogLossClipsExtremeScores) {
  auto result = Evaluate(Id(MetricKind::kLogLoss), std::vector<int>{1}, std::vector<double>{0.0});
  ASSERT_TRUE(result.ok());
  EXPECT_NEAR(result->value, -std::log(1e-12), 1e-9);
}

TEST(MetricsTest, NamesRoundTrip) {
  for (const MetricId& metric : AllMetrics()) {
    auto parsed = ParseMetric(metric.Name());
    ASSERT_TRUE(parsed.ok());
    EXPECT_EQ(parsed->kind, metric.kind);
  }
  EXPECT_FALSE(ParseMetric("brier").ok());
  EXPECT_EQ(AllMetrics().size(), 7u);
}

}  // namespace
}  // namespace causal_eval
