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

// Penalized logistic models for the label (P(Y=1 | Z)) and for subgroup
// membership (P(A | V)).
//
// All models minimize
//
//   J(B) = (1/n) * sum_i -log P(class_i | row_i) + (lambda/2) * ||B_slopes||^2
//
// over standardized features with an unpenalized intercept, using damped
// Newton steps until the largest gradient component is below the configured
// tolerance. The L2 strength is chosen by stratified k-fold cross-validation
// on mean held-out log-loss; ties go to the stronger penalty.

#ifndef CAUSAL_EVAL_LEARNER_H_
#define CAUSAL_EVAL_LEARNER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "causal_eval/dataset.h"
#include "json.hpp"

namespace causal_eval {

// Scores are clipped into [kScoreFloor, 1 - kScoreFloor] before any log.
inline constexpr double kScoreFloor = 1e-12;

enum class CovariatePolicy { kAgnostic, kAware, kStratified };

inline constexpr CovariatePolicy kAllPolicies[] = {
    CovariatePolicy::kAgnostic, CovariatePolicy::kAware, CovariatePolicy::kStratified};

std::string_view PolicyName(CovariatePolicy policy);
absl::StatusOr<CovariatePolicy> ParsePolicy(std::string_view name);

// Conditioning variable of a group model (and of a controlled evaluation).
enum class ControlVariable { kX, kY, kR };

std::string_view ControlVariableName(ControlVariable v);
absl::StatusOr<ControlVariable> ParseControlVariable(std::string_view name);

enum class BasisKind {
  kQuadratic,  // [v, v^2] per input column.
  kSpline,     // Restricted cubic spline per input column, knots at quantiles.
  kLinear,     // [v] per input column.
};

// Expands raw inputs into standardized model features.
class FeatureTransform {
 public:
  FeatureTransform() = default;

  // `values` is row-major with `num_inputs` columns.
  static FeatureTransform Fit(BasisKind kind, std::span<const double> values,
                              std::size_t num_inputs, int spline_knots = 7);

  BasisKind kind() const { return kind_; }
  std::size_t num_inputs() const { return num_inputs_; }
  std::size_t num_outputs() const { return mean_.size(); }

  // Writes num_outputs() standardized features for one input row.
  void Apply(std::span<const double> input, std::span<double> out) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<FeatureTransform> FromJson(const nlohmann::json& value);

 private:
  void Expand(std::span<const double> input, std::span<double> out) const;

  BasisKind kind_ = BasisKind::kQuadratic;
  std::size_t num_inputs_ = 0;
  std::vector<std::vector<double>> knots_;
  std::vector<double> mean_;
  std::vector<double> scale_;
};

struct FitConfig {
  std::vector<double> l2_grid = {1e-4, 1e-2, 1.0};
  int folds = 5;
  uint64_t seed = 0;
  double tolerance = 1e-8;
  int max_iterations = 100;
  // Skips cross-validation when set.
  std::optional<double> fixed_l2;
  int spline_knots = 7;
};

// Result of one penalized softmax fit. `coefficients` is p x (K-1); class 0
// is the reference with logit 0.
struct SoftmaxFit {
  Eigen::MatrixXd coefficients;
  double l2 = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Penalized multinomial logistic regression on a design whose first column is
// the intercept. Labels are codes in [0, num_classes).
absl::StatusOr<SoftmaxFit> FitSoftmax(const Eigen::MatrixXd& design, std::span<const int> labels,
                                      int num_classes, double l2, const FitConfig& config);

// Chooses the L2 strength by stratified cross-validation and refits on all
// rows. Returns the refit with `l2` set to the selected strength.
absl::StatusOr<SoftmaxFit> FitSoftmaxCv(const Eigen::MatrixXd& design, std::span<const int> labels,
                                        int num_classes, const FitConfig& config);

// Stratified fold assignment: each class is shuffled and dealt round-robin.
absl::StatusOr<std::vector<int>> StratifiedFolds(std::span<const int> labels, int num_classes,
                                                 int folds, uint64_t seed);

class FittedModel {
 public:
  FittedModel(CovariatePolicy policy, int num_groups, FeatureTransform transform,
              std::vector<Eigen::VectorXd> coefficients, std::vector<double> l2, uint64_t seed);

  CovariatePolicy policy() const { return policy_; }
  int num_groups() const { return num_groups_; }
  std::size_t num_inputs() const { return transform_.num_inputs(); }
  const FeatureTransform& transform() const { return transform_; }
  const std::vector<Eigen::VectorXd>& coefficients() const { return coefficients_; }
  const std::vector<double>& l2() const { return l2_; }
  std::size_t num_branches() const { return coefficients_.size(); }

  absl::StatusOr<double> ScoreRow(std::span<const double> x, int a) const;
  absl::StatusOr<std::vector<double>> Score(const Dataset& rows) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<FittedModel> FromJson(const nlohmann::json& value);

 private:
  CovariatePolicy policy_;
  int num_groups_;
  FeatureTransform transform_;
  std::vector<Eigen::VectorXd> coefficients_;
  std::vector<double> l2_;
  uint64_t seed_;
};

// Fits P(Y=1 | Z) with features [x, x^2]. Aware adds the one-hot subgroup
// indicators and their interactions with every feature; Stratified fits one
// branch per subgroup.
absl::StatusOr<FittedModel> Fit(const Dataset& train, CovariatePolicy policy,
                                const FitConfig& config);

// P(A | V) as a multinomial logistic model.
class GroupModel {
 public:
  GroupModel(ControlVariable variable, int num_groups, FeatureTransform transform,
             Eigen::MatrixXd coefficients, double l2);

  ControlVariable variable() const { return variable_; }
  int num_groups() const { return num_groups_; }
  double l2() const { return l2_; }
  bool cross_fitted() const { return cross_fitted_; }

  // n x K matrix of P(A=k | V) for the rows; `scores` is required when the
  // conditioning variable is R.
  absl::StatusOr<Eigen::MatrixXd> Predict(const Dataset& rows,
                                          std::span<const double> scores = {}) const;

  // Out-of-fold probabilities of a cross-fitted model, one row per test row.
  const Eigen::MatrixXd& out_of_fold() const { return out_of_fold_; }
  const std::vector<int>& fold_of_row() const { return fold_of_row_; }

  static GroupModel CrossFitted(ControlVariable variable, int num_groups,
                                Eigen::MatrixXd out_of_fold, std::vector<int> fold_of_row);

 private:
  GroupModel() = default;

  ControlVariable variable_ = ControlVariable::kR;
  int num_groups_ = 0;
  FeatureTransform transform_;
  Eigen::MatrixXd coefficients_;
  double l2_ = 0.0;
  bool cross_fitted_ = false;
  Eigen::MatrixXd out_of_fold_;
  std::vector<int> fold_of_row_;
};

absl::StatusOr<GroupModel> FitGroupModel(const Dataset& data, ControlVariable v,
                                         const FitConfig& config,
                                         std::span<const double> scores = {});

// Nested cross-fitting of P(A | R) on the evaluation rows: every row receives
// a prediction from a model that never saw it.
absl::StatusOr<GroupModel> FitGroupModelCrossfit(const Dataset& test,
                                                 std::span<const double> scores, int folds,
                                                 const FitConfig& config);

// The same scheme for any conditioning variable (`scores` only for R).
absl::StatusOr<GroupModel> FitGroupModelCrossfit(const Dataset& test, ControlVariable v,
                                                 std::span<const double> scores, int folds,
                                                 const FitConfig& config);

double MeanLogLoss(std::span<const int> y, std::span<const double> scores);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_LEARNER_H_
