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

// Weighted performance metrics for binary scores.
//
// Every weighted value is a self-normalized (Hajek) mean, so multiplying all
// weights by a constant leaves it unchanged. AUC is the weighted
// Mann-Whitney statistic
//
//   sum_{i pos, j neg} w_i w_j [1(r_i > r_j) + 0.5 * 1(r_i = r_j)]
//   ---------------------------------------------------------------
//                     sum_{i pos, j neg} w_i w_j
//
// Thresholded metrics use yhat = 1(r >= tau). Metrics that divide by an empty
// (zero-weight) set are reported as undefined with a reason; they are never 0.

#ifndef CAUSAL_EVAL_METRICS_H_
#define CAUSAL_EVAL_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace causal_eval {

enum class MetricKind {
  kLogLoss,
  kAucRoc,
  kSensitivity,
  kSpecificity,
  kPrecision,
  kNetBenefit,
  kClassificationRate,
};

struct Thresholds {
  double decision = 0.5;
  double preference = 0.5;
};

// Decision threshold and net-benefit preference threshold, both 0.5.
Thresholds ThresholdDefaults();

struct MetricId {
  MetricKind kind = MetricKind::kLogLoss;
  // Decision threshold tau for thresholded metrics.
  double threshold = 0.5;
  // Preference threshold tau_p of net benefit.
  double preference = 0.5;

  // Canonical name, e.g. "log_loss" or "net_benefit".
  std::string Name() const;
  bool thresholded() const;
  bool decomposable() const { return kind != MetricKind::kAucRoc; }
};

// Accepts canonical names; thresholds take the defaults.
absl::StatusOr<MetricId> ParseMetric(std::string_view name);
std::vector<MetricId> AllMetrics();

struct MetricResult {
  double value = 0.0;
  // (sum w)^2 / sum w^2 over the rows the metric averages over.
  double effective_sample_size = 0.0;
  std::optional<std::string> undefined_reason;

  bool defined() const { return !undefined_reason.has_value(); }
};

// Per-row quantities shared by every weighting of one (labels, scores) pair:
// the ascending score order with tied scores grouped, and each row's
// log-loss.
class ScoreIndex {
 public:
  ScoreIndex(std::span<const int> y, std::span<const double> scores);

  const std::vector<std::size_t>& order() const { return order_; }
  // group_start()[g] .. group_start()[g + 1] index into order().
  const std::vector<std::size_t>& group_start() const { return group_start_; }
  const std::vector<double>& losses() const { return losses_; }

 private:
  std::vector<std::size_t> order_;
  std::vector<std::size_t> group_start_;
  std::vector<double> losses_;
};

// Log-loss of one row with the score clipped away from 0 and 1.
double RowLogLoss(int y, double r);

// Validating entry point. Empty `w` means unit weights. Errors on length
// mismatch, negative or non-finite weights and a non-positive weight total.
absl::StatusOr<MetricResult> Evaluate(const MetricId& metric, std::span<const int> y,
                                      std::span<const double> r,
                                      std::span<const double> w = {});

// Unchecked fast path used inside resampling loops: evaluates every metric in
// `metrics` for one weight vector. `index` must be built from (y, r). A zero
// weight total yields undefined results.
void EvaluateMany(std::span<const MetricId> metrics, std::span<const int> y,
                  std::span<const double> r, const ScoreIndex& index,
                  std::span<const double> w, std::span<MetricResult> out);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_METRICS_H_
