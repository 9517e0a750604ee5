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

// Percentile bootstrap and calibration curves.
//
// A bootstrap replicate is represented by row multiplicities: counts[i] is how
// often row i was drawn. Statistics multiply the counts into whatever fixed
// per-row weights they carry, which is the same as resampling rows together
// with their weights. Counts depend only on (seed, replicate index, n), so
// every statistic computed from one replicate sees the same resample and the
// result does not depend on the number of threads.

#ifndef CAUSAL_EVAL_INFERENCE_H_
#define CAUSAL_EVAL_INFERENCE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "causal_eval/metrics.h"

namespace causal_eval {

struct BootstrapConfig {
  int replicates = 10000;
  uint64_t seed = 0;
  double ci_level = 0.95;
  // Worker threads; the result is identical for every value.
  int threads = 1;
};

struct IntervalEstimate {
  // Statistic on the full sample (not the replicate mean).
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int replicates = 0;
  int undefined_replicates = 0;

  bool Covers(double value) const { return lower <= value && value <= upper; }
};

// Percentile interval from the defined replicate values. Endpoints are the
// order statistics v[ceil(B*alpha/2) - 1] and v[floor(B*(1 - alpha/2))],
// widened if needed so that lower <= point <= upper.
IntervalEstimate PercentileInterval(double point, std::vector<double> values,
                                    int undefined_replicates, double ci_level);

// Fills `out` (one entry per statistic) for the resample given by `counts`.
// Called concurrently from several threads.
using MultiStatistic =
    std::function<void(std::span<const double> counts, std::span<MetricResult> out)>;
using Statistic = std::function<MetricResult(std::span<const double> counts)>;

// Joint bootstrap of several statistics over the same resamples. A statistic
// whose full-sample value is undefined, or which is undefined on more than
// half of the replicates, gets an error carrying the dominant reason.
std::vector<absl::StatusOr<IntervalEstimate>> BootstrapMany(std::size_t n,
                                                            std::size_t num_statistics,
                                                            const MultiStatistic& statistic,
                                                            const BootstrapConfig& config);

absl::StatusOr<IntervalEstimate> BootstrapCi(std::size_t n, const Statistic& statistic,
                                             const BootstrapConfig& config);

inline constexpr double kWilsonZ = 1.959964;

struct WilsonBounds {
  double lower = 0.0;
  double upper = 1.0;
};

WilsonBounds WilsonInterval(double successes, double trials, double z = kWilsonZ);

struct CalibrationBin {
  double mean_score = 0.0;
  double mean_outcome = 0.0;
  double wilson_lower = 0.0;
  double wilson_upper = 1.0;
  std::size_t count = 0;

  // The bin's mean score lies inside the Wilson band of its outcome rate.
  bool covers() const { return wilson_lower <= mean_score && mean_score <= wilson_upper; }
};

struct CalibrationCurve {
  std::vector<CalibrationBin> bins;
  int requested_bins = 10;
  // Set when tied scores collapsed some quantile bins.
  bool merged = false;

  int PassingBins() const;
  int FailingBins() const { return static_cast<int>(bins.size()) - PassingBins(); }
  // At least 90% of the bins cover their mean score.
  bool Calibrated() const;
};

// Quantile bins on r; a score equal to an edge goes to the lower bin.
// Requires at least `bins` rows.
absl::StatusOr<CalibrationCurve> ComputeCalibrationCurve(std::span<const int> y,
                                                         std::span<const double> r,
                                                         int bins = 10);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_INFERENCE_H_
