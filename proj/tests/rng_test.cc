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

#include "causal_eval/rng.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"

namespace causal_eval {
namespace {

// Known-answer vectors of the Random123 reference implementation.
TEST(PhiloxTest, KnownAnswerZero) {
  EXPECT_EQ(Philox4x32({0, 0, 0, 0}, {0, 0}),
            (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(PhiloxTest, KnownAnswerAllOnes) {
  EXPECT_EQ(Philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                       {0xffffffff, 0xffffffff}),
            (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(PhiloxTest, KnownAnswerPiDigits) {
  EXPECT_EQ(Philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                       {0xa4093822, 0x299f31d0}),
            (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRngTest, StreamsAreIndependentAndReproducible) {
  const CounterRng a(42, Stream::kLabel), b(42, Stream::kLabel), c(42, Stream::kCovariate);
  EXPECT_EQ(a.Uniform(7), b.Uniform(7));
  EXPECT_NE(a.Uniform(7), c.Uniform(7));
  EXPECT_NE(CounterRng(42, Stream::kLabel, 1).Uniform(7), a.Uniform(7));
}

TEST(CounterRngTest, UniformMomentsAndRange) {
  const CounterRng rng(1, Stream::kLabel);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform(i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sum_sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(CounterRngTest, NormalMoments) {
  const CounterRng rng(3, Stream::kCovariate);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal(i);
    ASSERT_TRUE(std::isfinite(z));
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.015);
}

TEST(CounterRngTest, BelowStaysInRange) {
  const CounterRng rng(5, Stream::kFolds);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const uint64_t k = rng.Below(i, 7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
}

TEST(DeriveSeedTest, DistinctPerTagAndIndex) {
  EXPECT_EQ(DeriveSeed(9, 1, 2), DeriveSeed(9, 1, 2));
  EXPECT_NE(DeriveSeed(9, 1, 2), DeriveSeed(9, 1, 3));
  EXPECT_NE(DeriveSeed(9, 1, 2), DeriveSeed(9, 2, 2));
  EXPECT_NE(DeriveSeed(9, 1, 2), DeriveSeed(10, 1, 2));
}

TEST(ShuffleTest, IsPermutation) {
  std::vector<std::size_t> values(100);
  std::iota(values.begin(), values.end(), 0);
  Shuffle(values, CounterRng(11, Stream::kFolds));
  std::vector<std::size_t> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(values.begin(), values.end()));
}

TEST(BootstrapCountsTest, CountsSumToNAndDependOnReplicate) {
  std::vector<double> first, again, other;
  BootstrapCounts(17, 3, 1000, first);
  BootstrapCounts(17, 3, 1000, again);
  BootstrapCounts(17, 4, 1000, other);
  EXPECT_EQ(std::accumulate(first.begin(), first.end(), 0.0), 1000.0);
  EXPECT_EQ(first, again);
  EXPECT_NE(first, other);
  // About 1/e of the rows are left out of a resample.
  const auto zeros = std::count(first.begin(), first.end(), 0.0);
  EXPECT_NEAR(zeros / 1000.0, std::exp(-1.0), 0.05);
}

}  // namespace
}  // namespace causal_eval
