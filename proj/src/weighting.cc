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

#include "causal_eval/weighting.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "absl/strings/str_cat.h"

namespace causal_eval {
namespace {

constexpr struct {
  WeightSchemeKind kind;
  const char* name;
} kSchemeNames[] = {
    {WeightSchemeKind::kPopToSubgroup, "pop_to_subgroup"},
    {WeightSchemeKind::kSubgroupToPop, "subgroup_to_pop"},
    {WeightSchemeKind::kPairwiseRatio, "pairwise_ratio"},
    {WeightSchemeKind::kSharedSpace, "shared_space"},
};

absl::Status FloorError(const WeightScheme& scheme, std::size_t row, double p, double floor) {
  return absl::FailedPreconditionError(absl::StrCat(
      scheme.Name(), " weights: P(A | V) = ", p, " at row ", row, " is below the floor ", floor,
      "; inverse-probability weights this extreme give unstable, high-variance estimates "
      "(lower the floor explicitly to proceed)"));
}

}  // namespace

std::string WeightScheme::Name() const {
  for (const auto& entry : kSchemeNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

absl::StatusOr<WeightScheme> ParseWeightScheme(std::string_view name) {
  for (const auto& entry : kSchemeNames) {
    if (name == entry.name) return WeightScheme{entry.kind, std::nullopt};
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown weight scheme '", std::string(name), "'"));
}

WeightDiagnostics Diagnose(std::span<const double> weights) {
  double total = 0.0, total_sq = 0.0, largest = 0.0;
  for (double w : weights) {
    total += w;
    total_sq += w * w;
    largest = std::max(largest, w);
  }
  WeightDiagnostics d;
  if (total > 0.0) {
    d.effective_sample_size = total * total / total_sq;
    d.max_weight_share = largest / total;
  }
  return d;
}

Eigen::MatrixXd MarginalProbabilities(const Dataset& rows) {
  const auto counts = rows.GroupCounts();
  Eigen::RowVectorXd shares(rows.num_groups());
  for (int k = 0; k < rows.num_groups(); ++k) {
    shares(k) = static_cast<double>(counts[k]) / static_cast<double>(rows.size());
  }
  return shares.replicate(static_cast<Eigen::Index>(rows.size()), 1);
}

absl::StatusOr<WeightSet> BuildWeights(const Eigen::MatrixXd& probabilities,
                                       const WeightScheme& scheme, int a, const Dataset& rows,
                                       std::string control, const WeightOptions& options) {
  const std::size_t n = rows.size();
  const int num_groups = rows.num_groups();
  if (static_cast<std::size_t>(probabilities.rows()) != n ||
      probabilities.cols() != num_groups) {
    return absl::InvalidArgumentError("group probabilities do not match the evaluation rows");
  }
  if (a < 0 || a >= num_groups) {
    return absl::InvalidArgumentError(absl::StrCat("subgroup code ", a, " out of range"));
  }
  int other = -1;
  if (scheme.pairwise()) {
    if (scheme.other) {
      other = *scheme.other;
    } else if (num_groups == 2) {
      other = 1 - a;
    } else {
      return absl::InvalidArgumentError(
          "pair weight schemes need an explicit second subgroup when there are more than two");
    }
    if (other < 0 || other >= num_groups || other == a) {
      return absl::InvalidArgumentError("pair weight scheme needs two distinct subgroups");
    }
  }

  WeightSet set;
  set.scheme = scheme;
  set.a = a;
  set.other = other;
  set.control = std::move(control);
  set.weights.assign(n, 0.0);
  set.reference_weights.assign(n, 0.0);

  const auto counts = rows.GroupCounts();
  const double share_a = static_cast<double>(counts[a]) / n;
  const double share_other = other >= 0 ? static_cast<double>(counts[other]) / n : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double p_a = probabilities(i, a);
    const int group = rows.a[i];
    switch (scheme.kind) {
      case WeightSchemeKind::kPopToSubgroup:
        set.weights[i] = p_a;
        set.reference_weights[i] = group == a ? 1.0 : 0.0;
        break;
      case WeightSchemeKind::kSubgroupToPop:
        set.reference_weights[i] = 1.0;
        if (group == a) {
          if (p_a < options.denominator_floor) {
            return FloorError(scheme, i, p_a, options.denominator_floor);
          }
          set.weights[i] = 1.0 / p_a;
        }
        break;
      case WeightSchemeKind::kPairwiseRatio:
        set.reference_weights[i] = group == other ? 1.0 : 0.0;
        if (group == a) {
          if (p_a < options.denominator_floor) {
            return FloorError(scheme, i, p_a, options.denominator_floor);
          }
          set.weights[i] = probabilities(i, other) / p_a;
        }
        break;
      case WeightSchemeKind::kSharedSpace: {
        const double p_other = probabilities(i, other);
        if (p_a <= 0.0 || p_other <= 0.0) break;
        const double d = share_a * p_other + share_other * p_a;
        if (!(d > 0.0)) break;
        if (group == a) set.reference_weights[i] = p_other / d;
        if (group == other) set.weights[i] = p_a / d;
        break;
      }
    }
    if (!std::isfinite(set.weights[i]) || set.weights[i] < 0.0) {
      return absl::InvalidArgumentError(absl::StrCat("invalid weight at row ", i));
    }
  }
  double total = 0.0, reference_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += set.weights[i];
    reference_total += set.reference_weights[i];
  }
  if (!(total > 0.0) || !(reference_total > 0.0)) {
    return absl::FailedPreconditionError(absl::StrCat(
        scheme.Name(), " weights for subgroup '", rows.group_labels[a], "' sum to zero"));
  }
  set.diagnostics = Diagnose(set.weights);
  return set;
}

absl::StatusOr<WeightSet> BuildWeights(const GroupModel& model, const WeightScheme& scheme, int a,
                                       const Dataset& rows, std::span<const double> scores,
                                       const WeightOptions& options) {
  const std::string control(ControlVariableName(model.variable()));
  if (model.cross_fitted()) {
    return BuildWeights(model.out_of_fold(), scheme, a, rows, control, options);
  }
  auto probabilities = model.Predict(rows, scores);
  if (!probabilities.ok()) return probabilities.status();
  return BuildWeights(*probabilities, scheme, a, rows, control, options);
}

absl::StatusOr<MetricResult> WeightedPopulationEstimate(const MetricId& metric,
                                                        std::span<const int> y,
                                                        std::span<const double> r,
                                                        const WeightSet& weights) {
  return Evaluate(metric, y, r, weights.weights);
}

absl::StatusOr<MetricResult> TStatistic(const MetricId& metric, std::span<const int> y,
                                        std::span<const double> r, const WeightSet& weights) {
  auto reference = Evaluate(metric, y, r, weights.reference_weights);
  if (!reference.ok()) return reference.status();
  auto weighted = WeightedPopulationEstimate(metric, y, r, weights);
  if (!weighted.ok()) return weighted.status();
  MetricResult result;
  if (!reference->defined()) {
    result.undefined_reason = absl::StrCat("reference side: ", *reference->undefined_reason);
  } else if (!weighted->defined()) {
    result.undefined_reason = absl::StrCat("weighted side: ", *weighted->undefined_reason);
  }
  if (!result.defined()) {
    result.value = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  result.value = reference->value - weighted->value;
  result.effective_sample_size = weighted->effective_sample_size;
  return result;
}

void WriteWeightsCsv(const WeightSet& weights, const Dataset& rows, std::ostream& out) {
  out << "row_id,weight,scheme,a,v\n";
  const std::string scheme = weights.scheme.Name();
  const std::string& group = rows.group_labels[weights.a];
  char buffer[32];
  for (std::size_t i = 0; i < weights.weights.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", weights.weights[i]);
    out << i << ',' << buffer << ',' << scheme << ',' << group << ',' << weights.control << '\n';
  }
}

}  // namespace causal_eval
