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

// Controlled evaluation weights.
//
// A WeightSet pairs two row weightings of the same evaluation rows: the
// reweighted one (`weights`, giving M_a) and the reference it is compared to
// (`reference_weights`). The statistic is
//
//   T_a = metric(reference_weights) - metric(weights).
//
//   scheme            weights                              reference
//   ----------------  -----------------------------------  ------------
//   PopToSubgroup     P(A=a | v) on every row              1[A=a]
//   SubgroupToPop     1[A=a] / P(A=a | v)                  every row
//   PairwiseRatio     1[A=a] P(A=a'|v) / P(A=a|v)          1[A=a']
//   SharedSpace       1[A=a'] P(A=a|v) / D(v)              1[A=a] P(A=a'|v) / D(v)
//
// with D(v) = P(A=a) P(A=a'|v) + P(A=a') P(A=a|v) and the marginals P(A=.)
// taken from the evaluation rows. For PopToSubgroup, T_a is the subgroup
// metric minus the population metric reweighted to the subgroup's law of V.

#ifndef CAUSAL_EVAL_WEIGHTING_H_
#define CAUSAL_EVAL_WEIGHTING_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "causal_eval/dataset.h"
#include "causal_eval/learner.h"
#include "causal_eval/metrics.h"

namespace causal_eval {

enum class WeightSchemeKind { kPopToSubgroup, kSubgroupToPop, kPairwiseRatio, kSharedSpace };

struct WeightScheme {
  WeightSchemeKind kind = WeightSchemeKind::kPopToSubgroup;
  // The second subgroup a' of the pair schemes; unset picks the other group
  // when there are exactly two.
  std::optional<int> other;

  bool pairwise() const {
    return kind == WeightSchemeKind::kPairwiseRatio || kind == WeightSchemeKind::kSharedSpace;
  }
  std::string Name() const;
};

absl::StatusOr<WeightScheme> ParseWeightScheme(std::string_view name);

struct WeightDiagnostics {
  // (sum w)^2 / sum w^2.
  double effective_sample_size = 0.0;
  // max w / sum w.
  double max_weight_share = 0.0;
};

struct WeightSet {
  std::vector<double> weights;
  std::vector<double> reference_weights;
  WeightScheme scheme;
  int a = 0;
  // Resolved partner subgroup for pair schemes, -1 otherwise.
  int other = -1;
  // Name of the conditioning variable ("X", "Y", "R" or "none").
  std::string control;
  WeightDiagnostics diagnostics;
};

struct WeightOptions {
  // Smallest admissible denominator probability for SubgroupToPop and
  // PairwiseRatio.
  double denominator_floor = 1e-6;
};

WeightDiagnostics Diagnose(std::span<const double> weights);

// `probabilities` is n x K with P(A=k | v_i) in row i (out-of-fold when V=R).
absl::StatusOr<WeightSet> BuildWeights(const Eigen::MatrixXd& probabilities,
                                       const WeightScheme& scheme, int a, const Dataset& rows,
                                       std::string control, const WeightOptions& options = {});

// Convenience overload for fitted (non cross-fitted) and cross-fitted models.
absl::StatusOr<WeightSet> BuildWeights(const GroupModel& model, const WeightScheme& scheme, int a,
                                       const Dataset& rows, std::span<const double> scores = {},
                                       const WeightOptions& options = {});

// P(A=k) for every row: the weighting with no control variable.
Eigen::MatrixXd MarginalProbabilities(const Dataset& rows);

// M_a.
absl::StatusOr<MetricResult> WeightedPopulationEstimate(const MetricId& metric,
                                                        std::span<const int> y,
                                                        std::span<const double> r,
                                                        const WeightSet& weights);

// T_a = metric(reference) - M_a; undefined when either side is.
absl::StatusOr<MetricResult> TStatistic(const MetricId& metric, std::span<const int> y,
                                        std::span<const double> r, const WeightSet& weights);

// Columns: row_id, weight, scheme, a, v.
void WriteWeightsCsv(const WeightSet& weights, const Dataset& rows, std::ostream& out);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_WEIGHTING_H_
