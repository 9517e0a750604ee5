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

#include "causal_eval/audit.h"

#include <algorithm>
#include <map>
#include <utility>

#include "absl/strings/str_cat.h"
#include "causal_eval/rng.h"

namespace causal_eval {
namespace {

// Seed tags of the sub-computations of one setting.
constexpr uint32_t kTagTrain = 21;
constexpr uint32_t kTagTest = 22;
constexpr uint32_t kTagFit = 23;
constexpr uint32_t kTagBootstrap = 24;
constexpr uint32_t kTagGroupModel = 25;

CellEstimate ToCell(const absl::StatusOr<IntervalEstimate>& result) {
  CellEstimate cell;
  if (result.ok()) {
    cell.interval = *result;
  } else {
    cell.undefined_reason = std::string(result.status().message());
  }
  return cell;
}

CellEstimate Unavailable(std::string reason) {
  CellEstimate cell;
  cell.undefined_reason = std::move(reason);
  return cell;
}

std::optional<Prediction> CellPrediction(const std::optional<DgpSpec>& spec,
                                         CovariatePolicy policy,
                                         std::optional<ControlVariable> control) {
  if (!spec) return std::nullopt;
  if (spec->selection == Selection::kNone) return LookupStability(spec->family, policy, control);
  if (control == ControlVariable::kR) {
    return LookupProperty(spec->family, spec->selection, policy, Property::kSufficiency);
  }
  if (control == ControlVariable::kY) {
    return LookupProperty(spec->family, spec->selection, policy, Property::kSeparation);
  }
  return std::nullopt;
}

// Deduplicated row-weight vectors.
class WeightRegistry {
 public:
  int Add(std::vector<double> weights) {
    for (std::size_t id = 0; id < vectors_.size(); ++id) {
      if (vectors_[id] == weights) return static_cast<int>(id);
    }
    vectors_.push_back(std::move(weights));
    return static_cast<int>(vectors_.size()) - 1;
  }
  const std::vector<double>& Get(int id) const { return vectors_[id]; }

 private:
  std::vector<std::vector<double>> vectors_;
};

// One bootstrap statistic: a metric on a (scores, weights) slot, or the
// difference of two such values.
struct StatDef {
  int slot_a = 0;
  int slot_b = -1;  // -1: plain value
  int metric = 0;
};

struct PendingCell {
  ControlledCell cell;
  int stat_reference = -1;
  int stat_weighted = -1;
  int stat_t = -1;
};

struct PendingComparison {
  ComparisonRecord record;
  int stat = -1;
};

// Out-of-fold P(A | V) on the evaluation rows, or the reason it is missing.
struct GroupProbabilities {
  std::optional<Eigen::MatrixXd> probabilities;
  std::string error;
};

GroupProbabilities CrossFitProbabilities(const Dataset& test, ControlVariable v,
                                         std::span<const double> scores,
                                         const AuditConfig& config, uint32_t index) {
  FitConfig fit = config.fit;
  fit.seed = DeriveSeed(config.fit.seed, kTagGroupModel, index);
  auto model = FitGroupModelCrossfit(test, v, scores, config.crossfit_folds, fit);
  if (!model.ok()) {
    return {std::nullopt, absl::StrCat("group model P(A | ", std::string(ControlVariableName(v)),
                                       "): ", model.status().message())};
  }
  return {model->out_of_fold(), ""};
}

absl::StatusOr<AuditReport> EvaluateCore(
    const std::string& setting, const Dataset& test, std::span<const ScoredPolicy> scored,
    const std::optional<DgpSpec>& spec, const AuditConfig& config,
    const std::vector<std::pair<std::size_t, std::size_t>>& comparison_pairs) {
  if (auto status = test.Validate(); !status.ok()) return status;
  if (test.empty()) return absl::InvalidArgumentError("no evaluation rows");
  const std::size_t n = test.size();
  const int num_groups = test.num_groups();
  for (const ScoredPolicy& s : scored) {
    if (s.scores.size() != n) {
      return absl::InvalidArgumentError(absl::StrCat(std::string(PolicyName(s.policy)),
                                                     " scores are not aligned with the rows"));
    }
  }
  const std::span<const MetricId> metrics = config.metrics;
  const std::span<const int> y = test.y;

  std::vector<ScoreIndex> indexes;
  indexes.reserve(scored.size());
  for (const ScoredPolicy& s : scored) indexes.emplace_back(y, s.scores);

  WeightRegistry registry;
  std::vector<std::pair<int, int>> slots;  // (scored index, weight id)
  std::map<std::pair<int, int>, int> slot_of;
  auto slot = [&](int p, int weight_id) {
    auto [it, inserted] = slot_of.try_emplace({p, weight_id}, static_cast<int>(slots.size()));
    if (inserted) slots.emplace_back(p, weight_id);
    return it->second;
  };
  std::vector<StatDef> stats;
  auto add_stat = [&](StatDef def) {
    stats.push_back(def);
    return static_cast<int>(stats.size()) - 1;
  };

  // Controlled cells.
  std::vector<PendingCell> pending;
  std::optional<GroupProbabilities> marginal, by_x, by_y;
  for (const auto& control : config.controls) {
    for (std::size_t p = 0; p < scored.size(); ++p) {
      const CovariatePolicy policy = scored[p].policy;
      GroupProbabilities owned;
      const GroupProbabilities* probabilities = nullptr;
      if (!control) {
        if (!marginal) marginal = GroupProbabilities{MarginalProbabilities(test), ""};
        probabilities = &*marginal;
      } else if (*control == ControlVariable::kX) {
        if (!by_x) by_x = CrossFitProbabilities(test, ControlVariable::kX, {}, config, 0);
        probabilities = &*by_x;
      } else if (*control == ControlVariable::kY) {
        if (!by_y) by_y = CrossFitProbabilities(test, ControlVariable::kY, {}, config, 1);
        probabilities = &*by_y;
      } else {
        owned = CrossFitProbabilities(test, ControlVariable::kR, scored[p].scores, config,
                                      2 + static_cast<uint32_t>(policy));
        probabilities = &owned;
      }
      for (int a = 0; a < num_groups; ++a) {
        absl::StatusOr<WeightSet> weights =
            probabilities->probabilities
                ? BuildWeights(*probabilities->probabilities, config.scheme, a, test,
                               ControlName(control), config.weight_options)
                : absl::StatusOr<WeightSet>(absl::FailedPreconditionError(probabilities->error));
        int slot_reference = -1, slot_weighted = -1;
        if (weights.ok()) {
          slot_reference = slot(static_cast<int>(p), registry.Add(weights->reference_weights));
          slot_weighted = slot(static_cast<int>(p), registry.Add(weights->weights));
        }
        for (std::size_t m = 0; m < metrics.size(); ++m) {
          PendingCell cell;
          ControlledCell& c = cell.cell;
          c.setting = setting;
          c.policy = policy;
          c.metric = metrics[m];
          c.subgroup = a;
          c.subgroup_label = test.group_labels[a];
          c.control = control;
          c.scheme = config.scheme;
          c.prediction = CellPrediction(spec, policy, control);
          if (weights.ok()) {
            c.other_subgroup = weights->other;
            if (weights->other >= 0) c.other_label = test.group_labels[weights->other];
            c.diagnostics = weights->diagnostics;
            const int mi = static_cast<int>(m);
            cell.stat_reference = add_stat({slot_reference, -1, mi});
            cell.stat_weighted = add_stat({slot_weighted, -1, mi});
            cell.stat_t = add_stat({slot_reference, slot_weighted, mi});
          } else {
            const std::string reason(weights.status().message());
            c.reference = c.weighted = c.t_statistic = Unavailable(reason);
          }
          pending.push_back(std::move(cell));
        }
      }
    }
  }

  // Paired model comparisons, overall and per subgroup.
  std::vector<PendingComparison> comparisons;
  for (const auto& [pa, pb] : comparison_pairs) {
    for (int a = -1; a < num_groups; ++a) {
      std::vector<double> rows(n);
      for (std::size_t i = 0; i < n; ++i) rows[i] = (a < 0 || test.a[i] == a) ? 1.0 : 0.0;
      const int weight_id = registry.Add(std::move(rows));
      const int slot_a = slot(static_cast<int>(pa), weight_id);
      const int slot_b = slot(static_cast<int>(pb), weight_id);
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        PendingComparison comparison;
        comparison.record.setting = setting;
        comparison.record.model_a = scored[pa].policy;
        comparison.record.model_b = scored[pb].policy;
        comparison.record.metric = metrics[m];
        comparison.record.subgroup = a;
        comparison.record.subgroup_label = a < 0 ? "all" : test.group_labels[a];
        comparison.stat = add_stat({slot_a, slot_b, static_cast<int>(m)});
        comparisons.push_back(std::move(comparison));
      }
    }
  }

  // Joint bootstrap.
  const std::size_t num_metrics = metrics.size();
  auto statistic = [&](std::span<const double> counts, std::span<MetricResult> out) {
    std::vector<double> effective(n);
    std::vector<MetricResult> results(slots.size() * num_metrics);
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto [p, weight_id] = slots[s];
      const std::vector<double>& w = registry.Get(weight_id);
      for (std::size_t i = 0; i < n; ++i) effective[i] = counts[i] * w[i];
      EvaluateMany(metrics, y, scored[p].scores, indexes[p], effective,
                   std::span<MetricResult>(results).subspan(s * num_metrics, num_metrics));
    }
    for (std::size_t k = 0; k < stats.size(); ++k) {
      const StatDef& def = stats[k];
      const MetricResult& first = results[def.slot_a * num_metrics + def.metric];
      if (def.slot_b < 0) {
        out[k] = first;
        continue;
      }
      const MetricResult& second = results[def.slot_b * num_metrics + def.metric];
      MetricResult diff;
      if (!first.defined()) {
        diff.undefined_reason = first.undefined_reason;
      } else if (!second.defined()) {
        diff.undefined_reason = second.undefined_reason;
      } else {
        diff.value = first.value - second.value;
        diff.effective_sample_size = second.effective_sample_size;
      }
      out[k] = std::move(diff);
    }
  };
  std::vector<absl::StatusOr<IntervalEstimate>> intervals;
  if (!stats.empty()) intervals = BootstrapMany(n, stats.size(), statistic, config.bootstrap);

  AuditReport report;
  for (PendingCell& cell : pending) {
    ControlledCell& c = cell.cell;
    if (cell.stat_t >= 0) {
      c.reference = ToCell(intervals[cell.stat_reference]);
      c.weighted = ToCell(intervals[cell.stat_weighted]);
      c.t_statistic = ToCell(intervals[cell.stat_t]);
    }
    c.verdict = JudgeInterval(c.prediction, c.t_statistic.interval);
    report.cells.push_back(std::move(c));
  }
  for (PendingComparison& comparison : comparisons) {
    comparison.record.delta = ToCell(intervals[comparison.stat]);
    report.comparisons.push_back(std::move(comparison.record));
  }

  // Calibration per policy and subgroup.
  for (const ScoredPolicy& s : scored) {
    for (int a = 0; a < num_groups; ++a) {
      CalibrationRecord record;
      record.setting = setting;
      record.policy = s.policy;
      record.subgroup = a;
      record.subgroup_label = test.group_labels[a];
      if (spec) {
        record.prediction =
            LookupProperty(spec->family, spec->selection, s.policy, Property::kSubgroupCalibration);
      }
      std::vector<int> group_y;
      std::vector<double> group_r;
      for (std::size_t i = 0; i < n; ++i) {
        if (test.a[i] != a) continue;
        group_y.push_back(test.y[i]);
        group_r.push_back(s.scores[i]);
      }
      auto curve = ComputeCalibrationCurve(group_y, group_r, config.calibration_bins);
      if (curve.ok()) {
        record.curve = *std::move(curve);
      } else {
        record.error = std::string(curve.status().message());
      }
      record.verdict = JudgeCalibration(record.prediction, record.curve);
      report.calibration.push_back(std::move(record));
    }
  }

  for (const ScoredPolicy& s : scored) {
    ModelRecord model;
    model.setting = setting;
    model.policy = s.policy;
    model.oracle = s.oracle;
    model.l2 = s.l2;
    model.test_log_loss = MeanLogLoss(test.y, s.scores);
    report.models.push_back(std::move(model));
  }
  return report;
}

std::vector<std::pair<std::size_t, std::size_t>> DefaultComparisons(
    std::span<const ScoredPolicy> scored, const AuditConfig& config) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (!config.compare_models) return pairs;
  for (std::size_t b = 0; b < scored.size(); ++b) {
    if (scored[b].policy != CovariatePolicy::kAgnostic) continue;
    for (std::size_t a = 0; a < scored.size(); ++a) {
      if (scored[a].policy != CovariatePolicy::kAgnostic) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

}  // namespace

std::string SettingName(const DgpSpec& spec) {
  std::string name(FamilyName(spec.family));
  if (spec.selection != Selection::kNone) {
    absl::StrAppend(&name, "+selection_", std::string(SelectionName(spec.selection)));
  }
  return name;
}

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kConsistent:
      return "consistent";
    case Verdict::kInconsistent:
      return "inconsistent";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

Verdict JudgeInterval(const std::optional<Prediction>& prediction,
                      const std::optional<IntervalEstimate>& t) {
  if (!prediction || !t) return Verdict::kInconclusive;
  const bool covers = t->Covers(0.0);
  if (prediction->expected == Expectation::kHolds) {
    return covers ? Verdict::kConsistent : Verdict::kInconsistent;
  }
  return covers ? Verdict::kInconclusive : Verdict::kConsistent;
}

Verdict JudgeCalibration(const std::optional<Prediction>& prediction,
                         const std::optional<CalibrationCurve>& curve) {
  if (!prediction || !curve || curve->bins.empty()) return Verdict::kInconclusive;
  if (prediction->expected == Expectation::kHolds) {
    return curve->Calibrated() ? Verdict::kConsistent : Verdict::kInconsistent;
  }
  return curve->FailingBins() >= 2 ? Verdict::kConsistent : Verdict::kInconclusive;
}

std::string ControlName(std::optional<ControlVariable> v) {
  return v ? std::string(ControlVariableName(*v)) : "none";
}

absl::StatusOr<std::optional<ControlVariable>> ParseControl(std::string_view name) {
  if (name == "none") return std::optional<ControlVariable>();
  auto v = ParseControlVariable(name);
  if (!v.ok()) return v.status();
  return std::optional<ControlVariable>(*v);
}

std::string ControlledCell::Key() const {
  std::string key = absl::StrCat(setting, "|", std::string(PolicyName(policy)), "|", metric.Name(), "|",
                                 scheme.Name(), "|", ControlName(control), "|", subgroup_label);
  if (other_subgroup >= 0) absl::StrAppend(&key, ">", other_label);
  return key;
}

std::string CalibrationRecord::Key() const {
  return absl::StrCat(setting, "|", std::string(PolicyName(policy)), "|", subgroup_label);
}

std::string ComparisonRecord::Key() const {
  return absl::StrCat(setting, "|", std::string(PolicyName(model_a)), "-", std::string(PolicyName(model_b)), "|",
                      metric.Name(), "|", subgroup < 0 ? std::string() : subgroup_label);
}

void AuditReport::Merge(AuditReport other) {
  auto append = [](auto& into, auto& from) {
    into.insert(into.end(), std::make_move_iterator(from.begin()),
                std::make_move_iterator(from.end()));
  };
  append(settings, other.settings);
  append(models, other.models);
  append(cells, other.cells);
  append(calibration, other.calibration);
  append(comparisons, other.comparisons);
}

void AuditReport::Finalize() {
  auto by_key = [](const auto& l, const auto& r) { return l.Key() < r.Key(); };
  std::stable_sort(settings.begin(), settings.end(),
                   [](const SettingRecord& l, const SettingRecord& r) { return l.name < r.name; });
  std::stable_sort(models.begin(), models.end(), [](const ModelRecord& l, const ModelRecord& r) {
    return std::make_pair(l.setting, static_cast<int>(l.policy)) <
           std::make_pair(r.setting, static_cast<int>(r.policy));
  });
  std::stable_sort(cells.begin(), cells.end(), by_key);
  std::stable_sort(calibration.begin(), calibration.end(), by_key);
  std::stable_sort(comparisons.begin(), comparisons.end(), by_key);
}

int AuditReport::HoldsViolations() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const ControlledCell& c) {
    return c.prediction && c.prediction->expected == Expectation::kHolds &&
           c.verdict == Verdict::kInconsistent;
  }));
}

absl::StatusOr<AuditReport> EvaluateScores(const std::string& setting, const Dataset& test,
                                           std::span<const ScoredPolicy> scored,
                                           const std::optional<DgpSpec>& spec,
                                           const AuditConfig& config) {
  return EvaluateCore(setting, test, scored, spec, config, DefaultComparisons(scored, config));
}

absl::StatusOr<AuditReport> AuditDatasets(const std::string& setting, const Dataset& train,
                                          const Dataset& test,
                                          const std::optional<DgpSpec>& spec,
                                          const AuditConfig& config) {
  if (config.oracle_scores && !spec) {
    return absl::InvalidArgumentError("oracle scores need a synthetic process");
  }
  if (train.num_features != test.num_features || train.group_labels != test.group_labels) {
    return absl::InvalidArgumentError("train and test rows have different schemas");
  }
  SettingRecord record;
  record.name = setting;
  record.n_train = train.size();
  record.n_test = test.size();
  record.group_labels = test.group_labels;
  if (spec) record.source = {{"dgp", SpecToJson(*spec)}};

  std::vector<ScoredPolicy> scored;
  for (CovariatePolicy policy : config.policies) {
    ScoredPolicy s;
    s.policy = policy;
    if (config.oracle_scores) {
      s.oracle = true;
      const ScorePolicy target =
          policy == CovariatePolicy::kAgnostic ? ScorePolicy::kAgnostic : ScorePolicy::kAware;
      s.scores.resize(test.size());
      for (std::size_t i = 0; i < test.size(); ++i) {
        s.scores[i] = BayesScore(*spec, test.Feature(i, 0), test.a[i], target);
      }
    } else {
      FitConfig fit = config.fit;
      fit.seed = DeriveSeed(config.fit.seed, kTagFit, static_cast<uint32_t>(policy));
      auto model = Fit(train, policy, fit);
      if (!model.ok()) {
        record.errors.push_back(
            absl::StrCat(std::string(PolicyName(policy)), " model: ", model.status().message()));
        continue;
      }
      auto scores = model->Score(test);
      if (!scores.ok()) {
        record.errors.push_back(
            absl::StrCat(std::string(PolicyName(policy)), " scoring: ", scores.status().message()));
        continue;
      }
      s.scores = *std::move(scores);
      s.l2 = model->l2();
    }
    scored.push_back(std::move(s));
  }
  auto report = EvaluateScores(setting, test, scored, spec, config);
  if (!report.ok()) {
    return absl::Status(report.status().code(),
                        absl::StrCat("setting ", setting, ": ", report.status().message()));
  }
  report->settings.push_back(std::move(record));
  return report;
}

absl::StatusOr<TrainTest> SampleTrainTest(const DgpSpec& spec, int64_t n_train, int64_t n_test,
                                          uint64_t seed) {
  if (n_train <= 0 || n_test <= 0) {
    return absl::InvalidArgumentError("train and test sizes must be positive");
  }
  absl::StatusOr<Dataset> train = spec.selection == Selection::kNone
                                      ? Sample(spec, n_train, DeriveSeed(seed, kTagTrain))
                                      : SampleSelected(spec, n_train, DeriveSeed(seed, kTagTrain));
  if (!train.ok()) return train.status();
  auto test = Sample(spec, n_test, DeriveSeed(seed, kTagTest));
  if (!test.ok()) return test.status();
  return TrainTest{*std::move(train), *std::move(test)};
}

absl::StatusOr<AuditReport> AuditSynthetic(const DgpSpec& spec, int64_t n_train, int64_t n_test,
                                           uint64_t seed, const AuditConfig& config) {
  auto rows = SampleTrainTest(spec, n_train, n_test, seed);
  if (!rows.ok()) return rows.status();
  AuditConfig derived = config;
  derived.fit.seed = DeriveSeed(seed, kTagFit);
  derived.bootstrap.seed = DeriveSeed(seed, kTagBootstrap);
  auto report = AuditDatasets(SettingName(spec), rows->train, rows->test, spec, derived);
  if (!report.ok()) return report.status();
  for (SettingRecord& record : report->settings) record.seed = seed;
  return report;
}

absl::StatusOr<AuditReport> RunControlledEvaluation(const Dataset& test, const FittedModel& model,
                                                    std::optional<ControlVariable> v,
                                                    std::span<const MetricId> metrics,
                                                    const AuditConfig& config,
                                                    const std::optional<DgpSpec>& spec) {
  auto scores = model.Score(test);
  if (!scores.ok()) return scores.status();
  AuditConfig narrowed = config;
  narrowed.controls = {v};
  narrowed.metrics.assign(metrics.begin(), metrics.end());
  narrowed.compare_models = false;
  const ScoredPolicy scored[] = {{model.policy(), *std::move(scores), false, model.l2()}};
  return EvaluateScores(spec ? SettingName(*spec) : "external", test, scored, spec, narrowed);
}

absl::StatusOr<std::vector<ControlledCell>> SufficiencyTest(const Dataset& test,
                                                            std::span<const double> scores,
                                                            CovariatePolicy policy,
                                                            const AuditConfig& config,
                                                            const std::optional<DgpSpec>& spec) {
  AuditConfig narrowed = config;
  narrowed.controls = {ControlVariable::kR};
  narrowed.metrics = {MetricId{MetricKind::kLogLoss}};
  narrowed.compare_models = false;
  narrowed.scheme = WeightScheme{};
  const ScoredPolicy scored[] = {{policy, std::vector<double>(scores.begin(), scores.end()), false, {}}};
  auto report =
      EvaluateScores(spec ? SettingName(*spec) : "external", test, scored, spec, narrowed);
  if (!report.ok()) return report.status();
  return std::move(report->cells);
}

absl::StatusOr<std::vector<ComparisonRecord>> ModelComparison(const Dataset& test,
                                                              const FittedModel& model_a,
                                                              const FittedModel& model_b,
                                                              std::span<const MetricId> metrics,
                                                              const AuditConfig& config) {
  auto scores_a = model_a.Score(test);
  if (!scores_a.ok()) return scores_a.status();
  auto scores_b = model_b.Score(test);
  if (!scores_b.ok()) return scores_b.status();
  AuditConfig narrowed = config;
  narrowed.controls = {};
  narrowed.metrics.assign(metrics.begin(), metrics.end());
  const ScoredPolicy scored[] = {{model_a.policy(), *std::move(scores_a), false, {}},
                                 {model_b.policy(), *std::move(scores_b), false, {}}};
  auto report = EvaluateCore("comparison", test, scored, std::nullopt, narrowed, {{0, 1}});
  if (!report.ok()) return report.status();
  return std::move(report->comparisons);
}

absl::StatusOr<AuditReport> SelectionAudit(const DgpSpec& spec, int64_t n_train, int64_t n_test,
                                           uint64_t seed, const AuditConfig& config) {
  if (spec.selection == Selection::kNone) {
    return absl::InvalidArgumentError("selection audit needs a selection mechanism");
  }
  AuditConfig narrowed = config;
  narrowed.controls = {ControlVariable::kR};
  narrowed.metrics = {MetricId{MetricKind::kLogLoss}};
  narrowed.compare_models = false;
  return AuditSynthetic(spec, n_train, n_test, seed, narrowed);
}

}  // namespace causal_eval
