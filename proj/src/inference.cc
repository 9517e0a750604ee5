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

#include "causal_eval/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <thread>

#include "absl/strings/str_cat.h"
#include "causal_eval/rng.h"

namespace causal_eval {
namespace {

// Per-thread tallies of undefined replicates by reason.
using ReasonCounts = std::vector<std::map<std::string, int>>;

std::string DominantReason(const std::map<std::string, int>& reasons) {
  std::string best;
  int best_count = -1;
  for (const auto& [reason, count] : reasons) {
    if (count > best_count) {
      best = reason;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

IntervalEstimate PercentileInterval(double point, std::vector<double> values,
                                    int undefined_replicates, double ci_level) {
  IntervalEstimate estimate;
  estimate.point = point;
  estimate.undefined_replicates = undefined_replicates;
  estimate.replicates = static_cast<int>(values.size()) + undefined_replicates;
  if (values.empty()) {
    estimate.lower = estimate.upper = point;
    return estimate;
  }
  std::sort(values.begin(), values.end());
  const double b = static_cast<double>(values.size());
  const double alpha = 1.0 - ci_level;
  const auto last = static_cast<long long>(values.size()) - 1;
  const long long lower = std::clamp(static_cast<long long>(std::ceil(b * alpha / 2.0)) - 1,
                                     0LL, last);
  const long long upper =
      std::clamp(static_cast<long long>(std::floor(b * (1.0 - alpha / 2.0))), 0LL, last);
  estimate.lower = std::min(values[lower], point);
  estimate.upper = std::max(values[upper], point);
  return estimate;
}

std::vector<absl::StatusOr<IntervalEstimate>> BootstrapMany(std::size_t n,
                                                            std::size_t num_statistics,
                                                            const MultiStatistic& statistic,
                                                            const BootstrapConfig& config) {
  std::vector<absl::StatusOr<IntervalEstimate>> results;
  auto fail_all = [&](const absl::Status& status) {
    results.assign(num_statistics, status);
    return results;
  };
  if (config.replicates < 100) {
    return fail_all(absl::InvalidArgumentError("bootstrap needs at least 100 replicates"));
  }
  if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) {
    return fail_all(absl::InvalidArgumentError("confidence level must lie in (0, 1)"));
  }
  if (n == 0) return fail_all(absl::InvalidArgumentError("bootstrap of an empty sample"));

  std::vector<MetricResult> full(num_statistics);
  const std::vector<double> ones(n, 1.0);
  statistic(ones, full);

  const int replicates = config.replicates;
  std::vector<double> values(num_statistics * static_cast<std::size_t>(replicates));
  const int threads = std::clamp(config.threads, 1, replicates);
  std::vector<ReasonCounts> reasons(threads, ReasonCounts(num_statistics));

  auto worker = [&](int t) {
    const int begin = static_cast<int>(static_cast<long long>(replicates) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(replicates) * (t + 1) / threads);
    std::vector<double> counts;
    std::vector<MetricResult> out(num_statistics);
    for (int rep = begin; rep < end; ++rep) {
      BootstrapCounts(config.seed, static_cast<uint32_t>(rep), n, counts);
      statistic(counts, out);
      for (std::size_t s = 0; s < num_statistics; ++s) {
        double& slot = values[s * replicates + rep];
        if (out[s].defined()) {
          slot = out[s].value;
        } else {
          slot = std::numeric_limits<double>::quiet_NaN();
          ++reasons[t][s][*out[s].undefined_reason];
        }
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& thread : pool) thread.join();
  }

  results.reserve(num_statistics);
  for (std::size_t s = 0; s < num_statistics; ++s) {
    if (!full[s].defined()) {
      results.push_back(absl::FailedPreconditionError(*full[s].undefined_reason));
      continue;
    }
    std::map<std::string, int> merged;
    for (const auto& per_thread : reasons) {
      for (const auto& [reason, count] : per_thread[s]) merged[reason] += count;
    }
    std::vector<double> defined;
    defined.reserve(replicates);
    for (int rep = 0; rep < replicates; ++rep) {
      const double v = values[s * replicates + rep];
      if (!std::isnan(v)) defined.push_back(v);
    }
    const int undefined = replicates - static_cast<int>(defined.size());
    if (2 * undefined > replicates) {
      results.push_back(absl::FailedPreconditionError(absl::StrCat(
          undefined, " of ", replicates, " bootstrap replicates undefined: ",
          DominantReason(merged))));
      continue;
    }
    results.push_back(PercentileInterval(full[s].value, std::move(defined), undefined,
                                         config.ci_level));
  }
  return results;
}

absl::StatusOr<IntervalEstimate> BootstrapCi(std::size_t n, const Statistic& statistic,
                                             const BootstrapConfig& config) {
  auto results = BootstrapMany(
      n, 1,
      [&](std::span<const double> counts, std::span<MetricResult> out) {
        out[0] = statistic(counts);
      },
      config);
  return std::move(results.front());
}

WilsonBounds WilsonInterval(double successes, double trials, double z) {
  if (!(trials > 0.0)) return {};
  const double p = successes / trials;
  const double z2 = z * z;
  const double denominator = 1.0 + z2 / trials;
  const double center = (p + z2 / (2.0 * trials)) / denominator;
  const double half =
      z / denominator * std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials));
  // Rounding can leave p just outside the band when k is 0 or n.
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

int CalibrationCurve::PassingBins() const {
  return static_cast<int>(
      std::count_if(bins.begin(), bins.end(), [](const CalibrationBin& b) { return b.covers(); }));
}

bool CalibrationCurve::Calibrated() const {
  return !bins.empty() && 10 * PassingBins() >= 9 * static_cast<int>(bins.size());
}

absl::StatusOr<CalibrationCurve> ComputeCalibrationCurve(std::span<const int> y,
                                                         std::span<const double> r, int bins) {
  if (y.size() != r.size()) return absl::InvalidArgumentError("labels and scores differ in length");
  if (bins < 1) return absl::InvalidArgumentError("need at least one bin");
  const std::size_t n = y.size();
  if (n < static_cast<std::size_t>(bins)) {
    return absl::InvalidArgumentError(absl::StrCat("calibration curve needs at least ", bins,
                                                   " rows, got ", n));
  }
  std::vector<double> sorted(r.begin(), r.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int j = 1; j < bins; ++j) {
    const std::size_t rank = (static_cast<std::size_t>(j) * n + bins - 1) / bins;  // ceil
    edges.push_back(sorted[rank - 1]);
  }

  std::vector<double> score_sum(bins, 0.0), outcome_sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int bin = static_cast<int>(std::lower_bound(edges.begin(), edges.end(), r[i]) -
                                     edges.begin());
    score_sum[bin] += r[i];
    outcome_sum[bin] += y[i];
    ++count[bin];
  }

  CalibrationCurve curve;
  curve.requested_bins = bins;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) {
      curve.merged = true;
      continue;
    }
    CalibrationBin bin;
    bin.count = count[b];
    bin.mean_score = score_sum[b] / count[b];
    bin.mean_outcome = outcome_sum[b] / count[b];
    const WilsonBounds bounds = WilsonInterval(outcome_sum[b], static_cast<double>(count[b]));
    bin.wilson_lower = bounds.lower;
    bin.wilson_upper = bounds.upper;
    curve.bins.push_back(bin);
  }
  return curve;
}

}  // namespace causal_eval
