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

// Controlled disaggregated evaluation and comparison with the theoretical
// predictions.
//
// For one set of evaluation rows, every (policy, control V, subgroup, metric)
// cell gets the reference estimate, the reweighted estimate M_a and
// T_a = reference - M_a, all from a single joint bootstrap: each replicate
// resamples the evaluation rows once and every statistic is computed on that
// same resample. Group probabilities P(A | V) are cross-fitted on the
// evaluation rows, so no row is weighted by a model that saw it.
//
// Verdicts (pure functions of the prediction and the T_a interval):
//
//   prediction  interval of T_a      verdict
//   ----------  -------------------  ------------
//   holds       covers 0             consistent
//   holds       excludes 0           inconsistent
//   fails       excludes 0           consistent
//   fails       covers 0             inconclusive (no power to reject)
//   none / T_a undefined             inconclusive

#ifndef CAUSAL_EVAL_AUDIT_H_
#define CAUSAL_EVAL_AUDIT_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "causal_eval/dataset.h"
#include "causal_eval/dgp.h"
#include "causal_eval/inference.h"
#include "causal_eval/learner.h"
#include "causal_eval/metrics.h"
#include "causal_eval/prediction_table.h"
#include "causal_eval/weighting.h"

namespace causal_eval {

enum class Verdict { kConsistent, kInconsistent, kInconclusive };

std::string_view VerdictName(Verdict verdict);

// `t` is nullopt when the statistic is undefined.
Verdict JudgeInterval(const std::optional<Prediction>& prediction,
                      const std::optional<IntervalEstimate>& t);

// Holds: consistent when at least 90% of bins cover their mean score,
// inconsistent otherwise. Fails: consistent when two or more bins miss,
// inconclusive otherwise.
Verdict JudgeCalibration(const std::optional<Prediction>& prediction,
                         const std::optional<CalibrationCurve>& curve);

// Name of a control set: "none", "X", "Y" or "R".
std::string ControlName(std::optional<ControlVariable> v);
absl::StatusOr<std::optional<ControlVariable>> ParseControl(std::string_view name);

struct AuditConfig {
  std::vector<CovariatePolicy> policies = {CovariatePolicy::kAgnostic, CovariatePolicy::kAware,
                                           CovariatePolicy::kStratified};
  std::vector<MetricId> metrics = AllMetrics();
  std::vector<std::optional<ControlVariable>> controls = {
      std::nullopt, ControlVariable::kX, ControlVariable::kY, ControlVariable::kR};
  WeightScheme scheme;
  WeightOptions weight_options;
  BootstrapConfig bootstrap;
  FitConfig fit;
  int crossfit_folds = 5;
  int calibration_bins = 10;
  // Replace fitted scores with the closed-form full-population Bayes scores
  // (synthetic settings only): agnostic -> E[Y | X], aware and stratified ->
  // E[Y | X, A].
  bool oracle_scores = false;
  // Paired aware - agnostic and stratified - agnostic metric deltas.
  bool compare_models = true;
};

// Interval, or the reason it could not be computed.
struct CellEstimate {
  std::optional<IntervalEstimate> interval;
  std::string undefined_reason;

  bool defined() const { return interval.has_value(); }
};

struct ControlledCell {
  std::string setting;
  CovariatePolicy policy = CovariatePolicy::kAgnostic;
  MetricId metric;
  int subgroup = 0;
  std::string subgroup_label;
  // Partner of the pair schemes, -1 otherwise.
  int other_subgroup = -1;
  std::string other_label;
  std::optional<ControlVariable> control;
  WeightScheme scheme;
  CellEstimate reference;
  CellEstimate weighted;
  CellEstimate t_statistic;
  WeightDiagnostics diagnostics;
  std::optional<Prediction> prediction;
  Verdict verdict = Verdict::kInconclusive;

  std::string Key() const;
};

struct CalibrationRecord {
  std::string setting;
  CovariatePolicy policy = CovariatePolicy::kAgnostic;
  int subgroup = 0;
  std::string subgroup_label;
  std::optional<CalibrationCurve> curve;
  std::string error;
  std::optional<Prediction> prediction;
  Verdict verdict = Verdict::kInconclusive;

  std::string Key() const;
};

struct ComparisonRecord {
  std::string setting;
  CovariatePolicy model_a = CovariatePolicy::kAware;
  CovariatePolicy model_b = CovariatePolicy::kAgnostic;
  MetricId metric;
  // -1 for all evaluation rows.
  int subgroup = -1;
  std::string subgroup_label = "all";
  // metric(model_a) - metric(model_b) on the same rows.
  CellEstimate delta;

  std::string Key() const;
};

struct ModelRecord {
  std::string setting;
  CovariatePolicy policy = CovariatePolicy::kAgnostic;
  bool oracle = false;
  std::vector<double> l2;
  double test_log_loss = 0.0;
};

struct SettingRecord {
  std::string name;
  // DGP spec or external data description.
  nlohmann::json source;
  uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<std::string> group_labels;
  // Problems that removed part of the setting (for example a policy that
  // could not be fit), with context.
  std::vector<std::string> errors;
};

struct AuditReport {
  std::vector<SettingRecord> settings;
  std::vector<ModelRecord> models;
  std::vector<ControlledCell> cells;
  std::vector<CalibrationRecord> calibration;
  std::vector<ComparisonRecord> comparisons;

  void Merge(AuditReport other);
  // Sorts every section by key so the report does not depend on the order in
  // which settings were evaluated.
  void Finalize();
  // Number of controlled cells predicted to hold whose verdict is
  // inconsistent; the audit command fails when this is nonzero.
  int HoldsViolations() const;
};

// Scores of one covariate policy on the evaluation rows.
struct ScoredPolicy {
  CovariatePolicy policy = CovariatePolicy::kAgnostic;
  std::vector<double> scores;
  bool oracle = false;
  std::vector<double> l2;
};

// Controlled cells, calibration and comparisons for precomputed scores. `spec`
// supplies predictions; without it every verdict is inconclusive.
absl::StatusOr<AuditReport> EvaluateScores(const std::string& setting, const Dataset& test,
                                           std::span<const ScoredPolicy> scored,
                                           const std::optional<DgpSpec>& spec,
                                           const AuditConfig& config);

// Fits every configured policy on `train` (or takes oracle scores) and
// evaluates on `test`.
absl::StatusOr<AuditReport> AuditDatasets(const std::string& setting, const Dataset& train,
                                          const Dataset& test,
                                          const std::optional<DgpSpec>& spec,
                                          const AuditConfig& config);

// Display name of a synthetic setting, e.g. "label_shift+selection_y".
std::string SettingName(const DgpSpec& spec);

struct TrainTest {
  Dataset train;
  Dataset test;
};

// The rows AuditSynthetic evaluates for (spec, seed): training rows
// conditional on S=1 when the spec has selection, test rows from the full
// population.
absl::StatusOr<TrainTest> SampleTrainTest(const DgpSpec& spec, int64_t n_train, int64_t n_test,
                                          uint64_t seed);

// Samples train and test rows from `spec` and audits them. With selection, the
// training rows are drawn conditional on S=1 and the test rows from the full
// population.
absl::StatusOr<AuditReport> AuditSynthetic(const DgpSpec& spec, int64_t n_train, int64_t n_test,
                                           uint64_t seed, const AuditConfig& config);

// Controlled evaluation of one fitted model with one control variable.
absl::StatusOr<AuditReport> RunControlledEvaluation(const Dataset& test, const FittedModel& model,
                                                    std::optional<ControlVariable> v,
                                                    std::span<const MetricId> metrics,
                                                    const AuditConfig& config,
                                                    const std::optional<DgpSpec>& spec = {});

// T_a of log-loss with V = R for each subgroup.
absl::StatusOr<std::vector<ControlledCell>> SufficiencyTest(const Dataset& test,
                                                            std::span<const double> scores,
                                                            CovariatePolicy policy,
                                                            const AuditConfig& config,
                                                            const std::optional<DgpSpec>& spec = {});

// Paired metric(a) - metric(b) per subgroup and overall.
absl::StatusOr<std::vector<ComparisonRecord>> ModelComparison(const Dataset& test,
                                                              const FittedModel& model_a,
                                                              const FittedModel& model_b,
                                                              std::span<const MetricId> metrics,
                                                              const AuditConfig& config);

// Trains on S=1 rows, evaluates calibration and sufficiency (V = R) in the
// full population.
absl::StatusOr<AuditReport> SelectionAudit(const DgpSpec& spec, int64_t n_train, int64_t n_test,
                                           uint64_t seed, const AuditConfig& config);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_AUDIT_H_
