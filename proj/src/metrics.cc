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
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "causal_eval/learner.h"

namespace causal_eval {
namespace {

constexpr MetricKind kAllKinds[] = {
    MetricKind::kLogLoss,     MetricKind::kAucRoc,     MetricKind::kSensitivity,
    MetricKind::kSpecificity, MetricKind::kPrecision,  MetricKind::kNetBenefit,
    MetricKind::kClassificationRate,
};

std::string_view KindName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kLogLoss:
      return "log_loss";
    case MetricKind::kAucRoc:
      return "auc_roc";
    case MetricKind::kSensitivity:
      return "sensitivity";
    case MetricKind::kSpecificity:
      return "specificity";
    case MetricKind::kPrecision:
      return "precision";
    case MetricKind::kNetBenefit:
      return "net_benefit";
    case MetricKind::kClassificationRate:
      return "classification_rate";
  }
  return "unknown";
}

double Ess(double sum, double sum_sq) { return sum_sq > 0.0 ? sum * sum / sum_sq : 0.0; }

MetricResult Undefined(std::string reason) {
  MetricResult result;
  result.value = std::numeric_limits<double>::quiet_NaN();
  result.undefined_reason = std::move(reason);
  return result;
}

MetricResult Ratio(double numerator, double denominator, double ess, const char* reason) {
  if (!(denominator > 0.0)) return Undefined(reason);
  return MetricResult{numerator / denominator, ess, std::nullopt};
}

// Confusion-matrix weight totals at one decision threshold.
struct Confusion {
  double threshold;
  double tp = 0, fp = 0, pp_sq = 0;
};

}  // namespace

Thresholds ThresholdDefaults() { return Thresholds{0.5, 0.5}; }

std::string MetricId::Name() const { return std::string(KindName(kind)); }

bool MetricId::thresholded() const {
  return kind != MetricKind::kLogLoss && kind != MetricKind::kAucRoc;
}

absl::StatusOr<MetricId> ParseMetric(std::string_view name) {
  for (MetricKind kind : kAllKinds) {
    if (KindName(kind) == name) {
      const Thresholds defaults = ThresholdDefaults();
      return MetricId{kind, defaults.decision, defaults.preference};
    }
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown metric '", std::string(name), "'"));
}

std::vector<MetricId> AllMetrics() {
  std::vector<MetricId> metrics;
  const Thresholds defaults = ThresholdDefaults();
  for (MetricKind kind : kAllKinds) metrics.push_back({kind, defaults.decision, defaults.preference});
  return metrics;
}

double RowLogLoss(int y, double r) {
  const double p = std::clamp(r, kScoreFloor, 1.0 - kScoreFloor);
  return y == 1 ? -std::log(p) : -std::log1p(-p);
}

ScoreIndex::ScoreIndex(std::span<const int> y, std::span<const double> scores)
    : order_(scores.size()), losses_(scores.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t l, std::size_t r) { return scores[l] < scores[r]; });
  for (std::size_t k = 0; k < order_.size(); ++k) {
    if (k == 0 || scores[order_[k]] != scores[order_[k - 1]]) group_start_.push_back(k);
  }
  group_start_.push_back(order_.size());
  for (std::size_t i = 0; i < scores.size(); ++i) losses_[i] = RowLogLoss(y[i], scores[i]);
}

void EvaluateMany(std::span<const MetricId> metrics, std::span<const int> y,
                  std::span<const double> r, const ScoreIndex& index,
                  std::span<const double> w, std::span<MetricResult> out) {
  const std::size_t n = y.size();
  const auto& losses = index.losses();
  double total = 0, total_sq = 0, loss = 0, pos = 0, pos_sq = 0, neg = 0, neg_sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    total += wi;
    total_sq += wi * wi;
    loss += wi * losses[i];
    if (y[i] == 1) {
      pos += wi;
      pos_sq += wi * wi;
    } else {
      neg += wi;
      neg_sq += wi * wi;
    }
  }

  // One pass per distinct decision threshold.
  std::vector<Confusion> confusions;
  for (const MetricId& m : metrics) {
    if (!m.thresholded()) continue;
    const bool seen = std::any_of(confusions.begin(), confusions.end(),
                                  [&](const Confusion& c) { return c.threshold == m.threshold; });
    if (!seen) confusions.push_back(Confusion{m.threshold});
  }
  for (Confusion& c : confusions) {
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = w[i];
      if (wi == 0.0 || r[i] < c.threshold) continue;
      (y[i] == 1 ? c.tp : c.fp) += wi;
      c.pp_sq += wi * wi;
    }
  }
  auto confusion_at = [&](double threshold) -> const Confusion& {
    return *std::find_if(confusions.begin(), confusions.end(),
                         [&](const Confusion& c) { return c.threshold == threshold; });
  };

  const double ess = Ess(total, total_sq);
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    const MetricId& m = metrics[k];
    if (!(total > 0.0)) {
      out[k] = Undefined("total weight is zero");
      continue;
    }
    switch (m.kind) {
      case MetricKind::kLogLoss:
        out[k] = MetricResult{loss / total, ess, std::nullopt};
        break;
      case MetricKind::kAucRoc: {
        if (!(pos > 0.0) || !(neg > 0.0)) {
          out[k] = Undefined("AUC needs both label classes");
          break;
        }
        const auto& order = index.order();
        const auto& starts = index.group_start();
        double below_neg = 0.0, numerator = 0.0;
        for (std::size_t g = 0; g + 1 < starts.size(); ++g) {
          double group_pos = 0.0, group_neg = 0.0;
          for (std::size_t q = starts[g]; q < starts[g + 1]; ++q) {
            const std::size_t i = order[q];
            (y[i] == 1 ? group_pos : group_neg) += w[i];
          }
          numerator += group_pos * (below_neg + 0.5 * group_neg);
          below_neg += group_neg;
        }
        out[k] = MetricResult{numerator / (pos * neg), ess, std::nullopt};
        break;
      }
      case MetricKind::kSensitivity: {
        const Confusion& c = confusion_at(m.threshold);
        out[k] = Ratio(c.tp, pos, Ess(pos, pos_sq), "sensitivity undefined: no positive labels");
        break;
      }
      case MetricKind::kSpecificity: {
        const Confusion& c = confusion_at(m.threshold);
        out[k] = Ratio(neg - c.fp, neg, Ess(neg, neg_sq),
                       "specificity undefined: no negative labels");
        break;
      }
      case MetricKind::kPrecision: {
        const Confusion& c = confusion_at(m.threshold);
        out[k] = Ratio(c.tp, c.tp + c.fp, Ess(c.tp + c.fp, c.pp_sq),
                       "precision undefined: no predicted positives");
        break;
      }
      case MetricKind::kNetBenefit: {
        const Confusion& c = confusion_at(m.threshold);
        const double odds = m.preference / (1.0 - m.preference);
        out[k] = MetricResult{(c.tp - odds * c.fp) / total, ess, std::nullopt};
        break;
      }
      case MetricKind::kClassificationRate: {
        const Confusion& c = confusion_at(m.threshold);
        out[k] = MetricResult{(c.tp + c.fp) / total, ess, std::nullopt};
        break;
      }
    }
  }
}

absl::StatusOr<MetricResult> Evaluate(const MetricId& metric, std::span<const int> y,
                                      std::span<const double> r, std::span<const double> w) {
  if (y.size() != r.size()) {
    return absl::InvalidArgumentError(absl::StrCat("label count ", y.size(),
                                                   " differs from score count ", r.size()));
  }
  if (!w.empty() && w.size() != y.size()) {
    return absl::InvalidArgumentError(absl::StrCat("weight count ", w.size(),
                                                   " differs from row count ", y.size()));
  }
  if (metric.kind == MetricKind::kNetBenefit &&
      !(metric.preference > 0.0 && metric.preference < 1.0)) {
    return absl::InvalidArgumentError("net benefit preference threshold must lie in (0, 1)");
  }
  std::vector<double> unit;
  if (w.empty()) {
    unit.assign(y.size(), 1.0);
    w = unit;
  }
  double total = 0.0;
  for (double wi : w) {
    if (!std::isfinite(wi) || wi < 0.0) {
      return absl::InvalidArgumentError("weights must be finite and nonnegative");
    }
    total += wi;
  }
  if (!(total > 0.0)) return absl::InvalidArgumentError("weights must have a positive sum");
  for (int label : y) {
    if (label != 0 && label != 1) return absl::InvalidArgumentError("labels must be 0 or 1");
  }
  const ScoreIndex index(y, r);
  MetricResult result;
  EvaluateMany({&metric, 1}, y, r, index, w, {&result, 1});
  return result;
}

}  // namespace causal_eval
