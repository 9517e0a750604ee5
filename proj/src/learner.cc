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

#include "causal_eval/learner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "causal_eval/rng.h"

namespace causal_eval {
namespace {

constexpr char kModelFormat[] = "causal_eval.fitted_model/1";

// Seed tags for derived sub-computations.
constexpr uint32_t kTagBranch = 11;
constexpr uint32_t kTagOuterFolds = 12;
constexpr uint32_t kTagInnerFolds = 13;

double Clip(double p) { return std::clamp(p, kScoreFloor, 1.0 - kScoreFloor); }

double Logit(double p) {
  p = Clip(p);
  return std::log(p) - std::log1p(-p);
}

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double Quantile(std::vector<double> sorted, double q) {
  const double position = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double fraction = position - static_cast<double>(lower);
  return sorted[lower] + fraction * (sorted[upper] - sorted[lower]);
}

std::vector<double> SplineKnots(std::vector<double> column, int requested) {
  std::sort(column.begin(), column.end());
  const double outer = requested >= 7 ? 0.025 : 0.05;
  std::vector<double> knots;
  for (int j = 0; j < requested; ++j) {
    const double q = outer + (1.0 - 2.0 * outer) * j / std::max(1, requested - 1);
    const double knot = Quantile(column, q);
    if (knots.empty() || knot > knots.back() + 1e-12 * std::max(1.0, std::abs(knot))) {
      knots.push_back(knot);
    }
  }
  if (knots.size() < 3) knots.clear();
  return knots;
}

double Cube(double v) { return v > 0.0 ? v * v * v : 0.0; }

// Log-probabilities of every class for the given logits (class 0 has logit 0).
void LogSoftmax(const double* logits, int num_free, double* out) {
  double max_logit = 0.0;
  for (int k = 0; k < num_free; ++k) max_logit = std::max(max_logit, logits[k]);
  double total = std::exp(-max_logit);
  for (int k = 0; k < num_free; ++k) total += std::exp(logits[k] - max_logit);
  const double log_total = max_logit + std::log(total);
  out[0] = -log_total;
  for (int k = 0; k < num_free; ++k) out[k + 1] = logits[k] - log_total;
}

struct Objective {
  double value;
  Eigen::MatrixXd probabilities;  // n x K
};

Objective Evaluate(const Eigen::MatrixXd& design, std::span<const int> labels, int num_classes,
                   const Eigen::MatrixXd& coefficients, double l2) {
  const Eigen::Index n = design.rows();
  const int num_free = num_classes - 1;
  const Eigen::MatrixXd logits = design * coefficients;
  Objective result{0.0, Eigen::MatrixXd(n, num_classes)};
  std::vector<double> row_logits(num_free), log_probs(num_classes);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < num_free; ++k) row_logits[k] = logits(i, k);
    LogSoftmax(row_logits.data(), num_free, log_probs.data());
    loss -= log_probs[labels[i]];
    for (int k = 0; k < num_classes; ++k) result.probabilities(i, k) = std::exp(log_probs[k]);
  }
  const double penalty =
      coefficients.bottomRows(coefficients.rows() - 1).squaredNorm() * 0.5 * l2;
  result.value = loss / static_cast<double>(n) + penalty;
  return result;
}

Eigen::MatrixXd Gradient(const Eigen::MatrixXd& design, std::span<const int> labels,
                         const Eigen::MatrixXd& probabilities, const Eigen::MatrixXd& coefficients,
                         double l2) {
  const Eigen::Index n = design.rows();
  const int num_free = static_cast<int>(coefficients.cols());
  Eigen::MatrixXd residual = probabilities.rightCols(num_free);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] > 0) residual(i, labels[i] - 1) -= 1.0;
  }
  Eigen::MatrixXd gradient = design.transpose() * residual / static_cast<double>(n);
  gradient.bottomRows(gradient.rows() - 1) += l2 * coefficients.bottomRows(coefficients.rows() - 1);
  return gradient;
}

Eigen::MatrixXd Hessian(const Eigen::MatrixXd& design, const Eigen::MatrixXd& probabilities,
                        int num_free, double l2) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  Eigen::MatrixXd hessian(p * num_free, p * num_free);
  for (int j = 0; j < num_free; ++j) {
    for (int k = j; k < num_free; ++k) {
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double pj = probabilities(i, j + 1);
        const double pk = probabilities(i, k + 1);
        w(i) = pj * ((j == k ? 1.0 : 0.0) - pk);
      }
      const Eigen::MatrixXd block =
          design.transpose() * (design.array().colwise() * w.array()).matrix() /
          static_cast<double>(n);
      hessian.block(j * p, k * p, p, p) = block;
      if (k != j) hessian.block(k * p, j * p, p, p) = block.transpose();
    }
    for (Eigen::Index c = 1; c < p; ++c) hessian(j * p + c, j * p + c) += l2;
  }
  return hessian;
}

Eigen::MatrixXd DesignFromRows(const FeatureTransform& transform, std::span<const double> inputs,
                               std::size_t num_rows) {
  const std::size_t m = transform.num_outputs();
  const std::size_t d = transform.num_inputs();
  Eigen::MatrixXd design(num_rows, 1 + m);
  std::vector<double> features(m);
  for (std::size_t i = 0; i < num_rows; ++i) {
    transform.Apply(inputs.subspan(i * d, d), features);
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < m; ++j) design(i, 1 + j) = features[j];
  }
  return design;
}

Eigen::MatrixXd AwareDesign(const FeatureTransform& transform, const Dataset& data,
                            int num_groups) {
  const std::size_t m = transform.num_outputs();
  const std::size_t block = 1 + m;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(data.size(), block * num_groups);
  std::vector<double> features(m);
  for (std::size_t i = 0; i < data.size(); ++i) {
    transform.Apply(data.Row(i), features);
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < m; ++j) design(i, 1 + j) = features[j];
    const int a = data.a[i];
    if (a > 0) {
      const std::size_t offset = block * a;
      design(i, offset) = 1.0;
      for (std::size_t j = 0; j < m; ++j) design(i, offset + 1 + j) = features[j];
    }
  }
  return design;
}

bool BothClassesPresent(std::span<const int> y) {
  bool zero = false, one = false;
  for (int v : y) (v == 1 ? one : zero) = true;
  return zero && one;
}

nlohmann::json VectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string_view BasisName(BasisKind kind) {
  switch (kind) {
    case BasisKind::kQuadratic:
      return "quadratic";
    case BasisKind::kSpline:
      return "restricted_cubic_spline";
    case BasisKind::kLinear:
      return "linear";
  }
  return "unknown";
}

}  // namespace

std::string_view PolicyName(CovariatePolicy policy) {
  switch (policy) {
    case CovariatePolicy::kAgnostic:
      return "agnostic";
    case CovariatePolicy::kAware:
      return "aware";
    case CovariatePolicy::kStratified:
      return "stratified";
  }
  return "unknown";
}

absl::StatusOr<CovariatePolicy> ParsePolicy(std::string_view name) {
  for (CovariatePolicy p : kAllPolicies) {
    if (PolicyName(p) == name) return p;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown covariate policy '", std::string(name), "'"));
}

std::string_view ControlVariableName(ControlVariable v) {
  switch (v) {
    case ControlVariable::kX:
      return "X";
    case ControlVariable::kY:
      return "Y";
    case ControlVariable::kR:
      return "R";
  }
  return "unknown";
}

absl::StatusOr<ControlVariable> ParseControlVariable(std::string_view name) {
  for (ControlVariable v : {ControlVariable::kX, ControlVariable::kY, ControlVariable::kR}) {
    if (ControlVariableName(v) == name) return v;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown control variable '", std::string(name), "'"));
}

// ---------------------------------------------------------------------------
// FeatureTransform

FeatureTransform FeatureTransform::Fit(BasisKind kind, std::span<const double> values,
                                       std::size_t num_inputs, int spline_knots) {
  FeatureTransform transform;
  transform.kind_ = kind;
  transform.num_inputs_ = num_inputs;
  const std::size_t n = num_inputs == 0 ? 0 : values.size() / num_inputs;
  transform.knots_.assign(num_inputs, {});
  if (kind == BasisKind::kSpline) {
    for (std::size_t j = 0; j < num_inputs; ++j) {
      std::vector<double> column(n);
      for (std::size_t i = 0; i < n; ++i) column[i] = values[i * num_inputs + j];
      transform.knots_[j] = SplineKnots(std::move(column), spline_knots);
    }
  }
  std::size_t outputs = 0;
  for (std::size_t j = 0; j < num_inputs; ++j) {
    switch (kind) {
      case BasisKind::kQuadratic:
        outputs += 2;
        break;
      case BasisKind::kLinear:
        outputs += 1;
        break;
      case BasisKind::kSpline:
        outputs += transform.knots_[j].empty() ? 1 : transform.knots_[j].size() - 1;
        break;
    }
  }
  transform.mean_.assign(outputs, 0.0);
  transform.scale_.assign(outputs, 1.0);
  std::vector<double> expanded(outputs);
  std::vector<double> sum(outputs, 0.0), sum_sq(outputs, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    transform.Expand(values.subspan(i * num_inputs, num_inputs), expanded);
    for (std::size_t j = 0; j < outputs; ++j) sum[j] += expanded[j];
  }
  for (std::size_t j = 0; j < outputs && n > 0; ++j) transform.mean_[j] = sum[j] / n;
  for (std::size_t i = 0; i < n; ++i) {
    transform.Expand(values.subspan(i * num_inputs, num_inputs), expanded);
    for (std::size_t j = 0; j < outputs; ++j) {
      const double d = expanded[j] - transform.mean_[j];
      sum_sq[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < outputs && n > 0; ++j) {
    const double sd = std::sqrt(sum_sq[j] / n);
    transform.scale_[j] = sd > 1e-12 ? sd : 1.0;
  }
  return transform;
}

void FeatureTransform::Expand(std::span<const double> input, std::span<double> out) const {
  std::size_t o = 0;
  for (std::size_t j = 0; j < num_inputs_; ++j) {
    const double v = input[j];
    switch (kind_) {
      case BasisKind::kQuadratic:
        out[o++] = v;
        out[o++] = v * v;
        break;
      case BasisKind::kLinear:
        out[o++] = v;
        break;
      case BasisKind::kSpline: {
        out[o++] = v;
        const auto& t = knots_[j];
        if (t.empty()) break;
        const std::size_t k = t.size();
        const double last = t[k - 1], penultimate = t[k - 2];
        const double norm = (last - t[0]) * (last - t[0]);
        for (std::size_t m = 0; m + 2 < k; ++m) {
          const double term = Cube(v - t[m]) -
                              Cube(v - penultimate) * (last - t[m]) / (last - penultimate) +
                              Cube(v - last) * (penultimate - t[m]) / (last - penultimate);
          out[o++] = term / norm;
        }
        break;
      }
    }
  }
}

void FeatureTransform::Apply(std::span<const double> input, std::span<double> out) const {
  Expand(input, out);
  for (std::size_t j = 0; j < mean_.size(); ++j) out[j] = (out[j] - mean_[j]) / scale_[j];
}

nlohmann::json FeatureTransform::ToJson() const {
  return {{"basis", std::string(BasisName(kind_))},
          {"num_inputs", num_inputs_},
          {"knots", knots_},
          {"mean", mean_},
          {"scale", scale_}};
}

absl::StatusOr<FeatureTransform> FeatureTransform::FromJson(const nlohmann::json& value) {
  FeatureTransform transform;
  try {
    const std::string basis = value.at("basis").get<std::string>();
    bool known = false;
    for (BasisKind kind : {BasisKind::kQuadratic, BasisKind::kSpline, BasisKind::kLinear}) {
      if (BasisName(kind) == basis) {
        transform.kind_ = kind;
        known = true;
      }
    }
    if (!known) return absl::InvalidArgumentError(absl::StrCat("unknown basis '", basis, "'"));
    transform.num_inputs_ = value.at("num_inputs").get<std::size_t>();
    transform.knots_ = value.at("knots").get<std::vector<std::vector<double>>>();
    transform.mean_ = value.at("mean").get<std::vector<double>>();
    transform.scale_ = value.at("scale").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed feature transform: ", e.what()));
  }
  if (transform.knots_.size() != transform.num_inputs_ ||
      transform.mean_.size() != transform.scale_.size()) {
    return absl::InvalidArgumentError("inconsistent feature transform");
  }
  return transform;
}

// ---------------------------------------------------------------------------
// Solvers

absl::StatusOr<SoftmaxFit> FitSoftmax(const Eigen::MatrixXd& design, std::span<const int> labels,
                                      int num_classes, double l2, const FitConfig& config) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  const int num_free = num_classes - 1;
  if (n == 0 || num_free < 1) return absl::InvalidArgumentError("softmax fit needs rows and >= 2 classes");
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    return absl::InvalidArgumentError("label count does not match design rows");
  }
  std::vector<double> class_counts(num_classes, 0.0);
  for (int label : labels) ++class_counts[label];

  SoftmaxFit fit;
  fit.l2 = l2;
  fit.coefficients = Eigen::MatrixXd::Zero(p, num_free);
  for (int k = 0; k < num_free; ++k) {
    if (class_counts[k + 1] > 0 && class_counts[0] > 0) {
      fit.coefficients(0, k) = std::log(class_counts[k + 1] / class_counts[0]);
    }
  }

  Objective current = Evaluate(design, labels, num_classes, fit.coefficients, l2);
  for (int iteration = 0; iteration <= config.max_iterations; ++iteration) {
    const Eigen::MatrixXd gradient =
        Gradient(design, labels, current.probabilities, fit.coefficients, l2);
    fit.gradient_norm = gradient.cwiseAbs().maxCoeff();
    fit.iterations = iteration;
    if (!std::isfinite(fit.gradient_norm)) break;
    if (fit.gradient_norm <= config.tolerance) return fit;
    if (iteration == config.max_iterations) break;

    const Eigen::MatrixXd hessian = Hessian(design, current.probabilities, num_free, l2);
    const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(gradient.data(), gradient.size());
    Eigen::VectorXd step = hessian.ldlt().solve(g);
    if (!step.allFinite()) step = g;
    const double decrease = g.dot(step);
    double t = 1.0;
    Objective candidate;
    Eigen::MatrixXd trial;
    while (true) {
      trial = fit.coefficients -
              t * Eigen::Map<const Eigen::MatrixXd>(step.data(), p, num_free);
      candidate = Evaluate(design, labels, num_classes, trial, l2);
      const double slack = 1e-13 * (1.0 + std::abs(current.value));
      if (candidate.value <= current.value - 1e-4 * t * decrease + slack) break;
      t *= 0.5;
      if (t < 1e-10) break;
    }
    fit.coefficients = std::move(trial);
    current = std::move(candidate);
  }
  return absl::InternalError(absl::StrCat("logistic fit did not converge after ",
                                          config.max_iterations, " iterations (l2=", l2,
                                          ", final gradient norm ", fit.gradient_norm, ")"));
}

absl::StatusOr<std::vector<int>> StratifiedFolds(std::span<const int> labels, int num_classes,
                                                 int folds, uint64_t seed) {
  if (folds < 2) return absl::InvalidArgumentError("need at least two folds");
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::vector<int> fold_of(labels.size(), 0);
  for (int c = 0; c < num_classes; ++c) {
    auto& rows = members[c];
    if (rows.empty()) continue;
    if (static_cast<int>(rows.size()) < folds) {
      return absl::InvalidArgumentError(absl::StrCat("fold count ", folds, " exceeds the ",
                                                     rows.size(), " rows of class ", c));
    }
    Shuffle(rows, CounterRng(seed, Stream::kFolds, static_cast<uint32_t>(c)));
    for (std::size_t j = 0; j < rows.size(); ++j) fold_of[rows[j]] = static_cast<int>(j % folds);
  }
  return fold_of;
}

absl::StatusOr<SoftmaxFit> FitSoftmaxCv(const Eigen::MatrixXd& design, std::span<const int> labels,
                                        int num_classes, const FitConfig& config) {
  if (config.fixed_l2) return FitSoftmax(design, labels, num_classes, *config.fixed_l2, config);
  if (config.l2_grid.empty()) return absl::InvalidArgumentError("empty regularization grid");
  auto folds = StratifiedFolds(labels, num_classes, config.folds, config.seed);
  if (!folds.ok()) return folds.status();

  std::vector<std::vector<std::size_t>> train_rows(config.folds), held_rows(config.folds);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int f = 0; f < config.folds; ++f) {
      ((*folds)[i] == f ? held_rows[f] : train_rows[f]).push_back(i);
    }
  }

  std::vector<double> grid = config.l2_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());  // strongest first
  double best_loss = std::numeric_limits<double>::infinity();
  std::optional<double> best_l2;
  for (double l2 : grid) {
    double total = 0.0;
    bool failed = false;
    for (int f = 0; f < config.folds && !failed; ++f) {
      const auto& train = train_rows[f];
      const auto& held = held_rows[f];
      Eigen::MatrixXd train_design(train.size(), design.cols());
      std::vector<int> train_labels(train.size());
      for (std::size_t r = 0; r < train.size(); ++r) {
        train_design.row(r) = design.row(train[r]);
        train_labels[r] = labels[train[r]];
      }
      auto fit = FitSoftmax(train_design, train_labels, num_classes, l2, config);
      if (!fit.ok()) {
        failed = true;
        break;
      }
      double loss = 0.0;
      std::vector<double> logits(num_classes - 1), log_probs(num_classes);
      for (std::size_t r : held) {
        const Eigen::VectorXd z = fit->coefficients.transpose() * design.row(r).transpose();
        for (int k = 0; k < num_classes - 1; ++k) logits[k] = z(k);
        LogSoftmax(logits.data(), num_classes - 1, log_probs.data());
        loss -= std::log(Clip(std::exp(log_probs[labels[r]])));
      }
      total += loss / static_cast<double>(held.size());
    }
    if (failed) continue;
    const double mean_loss = total / config.folds;
    if (!best_l2 || mean_loss < best_loss - 1e-12 * std::max(1.0, std::abs(best_loss))) {
      best_loss = mean_loss;
      best_l2 = l2;
    }
  }
  if (!best_l2) {
    return absl::InternalError("every regularization strength failed to converge in cross-validation");
  }
  return FitSoftmax(design, labels, num_classes, *best_l2, config);
}

double MeanLogLoss(std::span<const int> y, std::span<const double> scores) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = Clip(scores[i]);
    total -= y[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------
// FittedModel

FittedModel::FittedModel(CovariatePolicy policy, int num_groups, FeatureTransform transform,
                         std::vector<Eigen::VectorXd> coefficients, std::vector<double> l2,
                         uint64_t seed)
    : policy_(policy),
      num_groups_(num_groups),
      transform_(std::move(transform)),
      coefficients_(std::move(coefficients)),
      l2_(std::move(l2)),
      seed_(seed) {}

absl::StatusOr<double> FittedModel::ScoreRow(std::span<const double> x, int a) const {
  if (x.size() != transform_.num_inputs()) {
    return absl::InvalidArgumentError(absl::StrCat("row has ", x.size(),
                                                   " covariates; model expects ",
                                                   transform_.num_inputs()));
  }
  const std::size_t m = transform_.num_outputs();
  std::vector<double> features(m);
  transform_.Apply(x, features);
  const Eigen::VectorXd* beta = &coefficients_[0];
  std::size_t offset = 0;
  if (policy_ == CovariatePolicy::kStratified || policy_ == CovariatePolicy::kAware) {
    if (a < 0 || a >= num_groups_) {
      return absl::InvalidArgumentError(absl::StrCat("subgroup code ", a, " has no ",
                                                      std::string(PolicyName(policy_)), " branch"));
    }
  }
  if (policy_ == CovariatePolicy::kStratified) beta = &coefficients_[a];
  double eta = (*beta)(0);
  for (std::size_t j = 0; j < m; ++j) eta += (*beta)(1 + j) * features[j];
  if (policy_ == CovariatePolicy::kAware && a > 0) {
    offset = (1 + m) * a;
    eta += (*beta)(offset);
    for (std::size_t j = 0; j < m; ++j) eta += (*beta)(offset + 1 + j) * features[j];
  }
  return Clip(Sigmoid(eta));
}

absl::StatusOr<std::vector<double>> FittedModel::Score(const Dataset& rows) const {
  if (rows.num_features != transform_.num_inputs()) {
    return absl::InvalidArgumentError(absl::StrCat("dataset has ", rows.num_features,
                                                   " covariates; model expects ",
                                                   transform_.num_inputs()));
  }
  std::vector<double> scores(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto score = ScoreRow(rows.Row(i), rows.a[i]);
    if (!score.ok()) return score.status();
    scores[i] = *score;
  }
  return scores;
}

nlohmann::json FittedModel::ToJson() const {
  nlohmann::json branches = nlohmann::json::array();
  for (std::size_t b = 0; b < coefficients_.size(); ++b) {
    branches.push_back({{"coefficients", VectorToJson(coefficients_[b])}, {"l2", l2_[b]}});
  }
  return {{"format", kModelFormat},
          {"policy", std::string(PolicyName(policy_))},
          {"num_groups", num_groups_},
          {"transform", transform_.ToJson()},
          {"branches", branches},
          {"seed", seed_}};
}

absl::StatusOr<FittedModel> FittedModel::FromJson(const nlohmann::json& value) {
  try {
    if (value.at("format").get<std::string>() != kModelFormat) {
      return absl::InvalidArgumentError("unsupported model format");
    }
    auto policy = ParsePolicy(value.at("policy").get<std::string>());
    if (!policy.ok()) return policy.status();
    auto transform = FeatureTransform::FromJson(value.at("transform"));
    if (!transform.ok()) return transform.status();
    std::vector<Eigen::VectorXd> coefficients;
    std::vector<double> l2;
    for (const auto& branch : value.at("branches")) {
      const auto beta = branch.at("coefficients").get<std::vector<double>>();
      coefficients.push_back(Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size()));
      l2.push_back(branch.at("l2").get<double>());
    }
    const int num_groups = value.at("num_groups").get<int>();
    const std::size_t m = transform->num_outputs();
    const std::size_t expected_branches =
        *policy == CovariatePolicy::kStratified ? static_cast<std::size_t>(num_groups) : 1;
    const std::size_t expected_size =
        *policy == CovariatePolicy::kAware ? (1 + m) * num_groups : 1 + m;
    if (coefficients.size() != expected_branches) {
      return absl::InvalidArgumentError("branch count does not match policy");
    }
    for (const auto& beta : coefficients) {
      if (static_cast<std::size_t>(beta.size()) != expected_size) {
        return absl::InvalidArgumentError("coefficient vector has the wrong length");
      }
    }
    return FittedModel(*policy, num_groups, *std::move(transform), std::move(coefficients),
                       std::move(l2), value.at("seed").get<uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed model JSON: ", e.what()));
  }
}

absl::StatusOr<FittedModel> Fit(const Dataset& train, CovariatePolicy policy,
                                const FitConfig& config) {
  if (train.empty()) return absl::InvalidArgumentError("training set is empty");
  if (auto status = train.Validate(); !status.ok()) return status;
  const int num_groups = train.num_groups();
  FeatureTransform transform =
      FeatureTransform::Fit(BasisKind::kQuadratic, train.x, train.num_features);

  std::vector<Eigen::VectorXd> coefficients;
  std::vector<double> l2;
  if (policy == CovariatePolicy::kStratified) {
    for (int g = 0; g < num_groups; ++g) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.a[i] == g) rows.push_back(i);
      }
      const Dataset branch = train.Subset(rows);
      if (!BothClassesPresent(branch.y)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "stratified branch for subgroup '", train.group_labels[g],
            "' does not contain both label classes"));
      }
      FitConfig branch_config = config;
      branch_config.seed = DeriveSeed(config.seed, kTagBranch, static_cast<uint32_t>(g));
      const Eigen::MatrixXd design = DesignFromRows(transform, branch.x, branch.size());
      auto fit = FitSoftmaxCv(design, branch.y, 2, branch_config);
      if (!fit.ok()) {
        return absl::Status(fit.status().code(),
                            absl::StrCat("branch '", train.group_labels[g], "': ",
                                         fit.status().message()));
      }
      coefficients.push_back(fit->coefficients.col(0));
      l2.push_back(fit->l2);
    }
  } else {
    if (!BothClassesPresent(train.y)) {
      return absl::InvalidArgumentError("training labels contain a single class");
    }
    const Eigen::MatrixXd design = policy == CovariatePolicy::kAware
                                       ? AwareDesign(transform, train, num_groups)
                                       : DesignFromRows(transform, train.x, train.size());
    auto fit = FitSoftmaxCv(design, train.y, 2, config);
    if (!fit.ok()) return fit.status();
    coefficients.push_back(fit->coefficients.col(0));
    l2.push_back(fit->l2);
  }
  return FittedModel(policy, num_groups, std::move(transform), std::move(coefficients),
                     std::move(l2), config.seed);
}

// ---------------------------------------------------------------------------
// GroupModel

namespace {

// Raw conditioning inputs for every row (one or more columns).
absl::StatusOr<std::pair<std::vector<double>, std::size_t>> ConditioningInputs(
    const Dataset& data, ControlVariable v, std::span<const double> scores) {
  switch (v) {
    case ControlVariable::kX:
      return std::make_pair(data.x, data.num_features);
    case ControlVariable::kY:
      return std::make_pair(std::vector<double>(data.y.begin(), data.y.end()), std::size_t{1});
    case ControlVariable::kR: {
      if (scores.size() != data.size()) {
        return absl::InvalidArgumentError(absl::StrCat("conditioning on R needs ", data.size(),
                                                       " scores, got ", scores.size()));
      }
      std::vector<double> logits(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) logits[i] = Logit(scores[i]);
      return std::make_pair(std::move(logits), std::size_t{1});
    }
  }
  return absl::InternalError("unhandled control variable");
}

BasisKind BasisFor(ControlVariable v) {
  return v == ControlVariable::kY ? BasisKind::kLinear : BasisKind::kSpline;
}

Eigen::MatrixXd SoftmaxProbabilities(const Eigen::MatrixXd& design,
                                     const Eigen::MatrixXd& coefficients) {
  const int num_free = static_cast<int>(coefficients.cols());
  const Eigen::MatrixXd logits = design * coefficients;
  Eigen::MatrixXd probabilities(design.rows(), num_free + 1);
  std::vector<double> z(num_free), log_probs(num_free + 1);
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    for (int k = 0; k < num_free; ++k) z[k] = logits(i, k);
    LogSoftmax(z.data(), num_free, log_probs.data());
    double total = 0.0;
    for (int k = 0; k <= num_free; ++k) total += probabilities(i, k) = std::exp(log_probs[k]);
    probabilities.row(i) /= total;
  }
  return probabilities;
}

}  // namespace

GroupModel::GroupModel(ControlVariable variable, int num_groups, FeatureTransform transform,
                       Eigen::MatrixXd coefficients, double l2)
    : variable_(variable),
      num_groups_(num_groups),
      transform_(std::move(transform)),
      coefficients_(std::move(coefficients)),
      l2_(l2) {}

GroupModel GroupModel::CrossFitted(ControlVariable variable, int num_groups,
                                   Eigen::MatrixXd out_of_fold, std::vector<int> fold_of_row) {
  GroupModel model;
  model.variable_ = variable;
  model.num_groups_ = num_groups;
  model.cross_fitted_ = true;
  model.out_of_fold_ = std::move(out_of_fold);
  model.fold_of_row_ = std::move(fold_of_row);
  return model;
}

absl::StatusOr<Eigen::MatrixXd> GroupModel::Predict(const Dataset& rows,
                                                    std::span<const double> scores) const {
  if (cross_fitted_) {
    return absl::FailedPreconditionError(
        "a cross-fitted group model only provides its out-of-fold probabilities");
  }
  auto inputs = ConditioningInputs(rows, variable_, scores);
  if (!inputs.ok()) return inputs.status();
  if (inputs->second != transform_.num_inputs()) {
    return absl::InvalidArgumentError("conditioning arity does not match the group model");
  }
  const Eigen::MatrixXd design = DesignFromRows(transform_, inputs->first, rows.size());
  return SoftmaxProbabilities(design, coefficients_);
}

absl::StatusOr<GroupModel> FitGroupModel(const Dataset& data, ControlVariable v,
                                         const FitConfig& config, std::span<const double> scores) {
  if (auto status = data.Validate(); !status.ok()) return status;
  const int num_groups = data.num_groups();
  const auto counts = data.GroupCounts();
  const int present = static_cast<int>(
      std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
  if (present < 2) {
    return absl::InvalidArgumentError("group model needs at least two subgroup categories");
  }
  if (present < num_groups) {
    return absl::InvalidArgumentError("every declared subgroup must appear in the group-model data");
  }
  auto inputs = ConditioningInputs(data, v, scores);
  if (!inputs.ok()) return inputs.status();
  FeatureTransform transform =
      FeatureTransform::Fit(BasisFor(v), inputs->first, inputs->second, config.spline_knots);
  const Eigen::MatrixXd design = DesignFromRows(transform, inputs->first, data.size());
  auto fit = FitSoftmaxCv(design, data.a, num_groups, config);
  if (!fit.ok()) return fit.status();
  return GroupModel(v, num_groups, std::move(transform), std::move(fit->coefficients), fit->l2);
}

absl::StatusOr<GroupModel> FitGroupModelCrossfit(const Dataset& test,
                                                 std::span<const double> scores, int folds,
                                                 const FitConfig& config) {
  return FitGroupModelCrossfit(test, ControlVariable::kR, scores, folds, config);
}

absl::StatusOr<GroupModel> FitGroupModelCrossfit(const Dataset& test, ControlVariable v,
                                                 std::span<const double> scores, int folds,
                                                 const FitConfig& config) {
  if (v == ControlVariable::kR && scores.size() != test.size()) {
    return absl::InvalidArgumentError("scores are not aligned with the evaluation rows");
  }
  if (auto status = test.Validate(); !status.ok()) return status;
  const int num_groups = test.num_groups();
  auto outer = StratifiedFolds(test.a, num_groups, folds,
                               DeriveSeed(config.seed, kTagOuterFolds));
  if (!outer.ok()) return outer.status();

  Eigen::MatrixXd out_of_fold(test.size(), num_groups);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, held_rows;
    for (std::size_t i = 0; i < test.size(); ++i) {
      ((*outer)[i] == f ? held_rows : train_rows).push_back(i);
    }
    std::vector<double> train_scores, held_scores;
    if (v == ControlVariable::kR) {
      for (std::size_t i : train_rows) train_scores.push_back(scores[i]);
      for (std::size_t i : held_rows) held_scores.push_back(scores[i]);
    }
    FitConfig inner = config;
    inner.seed = DeriveSeed(config.seed, kTagInnerFolds, static_cast<uint32_t>(f));
    auto model = FitGroupModel(test.Subset(train_rows), v, inner, train_scores);
    if (!model.ok()) return model.status();
    auto probabilities = model->Predict(test.Subset(held_rows), held_scores);
    if (!probabilities.ok()) return probabilities.status();
    for (std::size_t r = 0; r < held_rows.size(); ++r) {
      out_of_fold.row(held_rows[r]) = probabilities->row(r);
    }
  }
  return GroupModel::CrossFitted(v, num_groups, std::move(out_of_fold), *std::move(outer));
}

}  // namespace causal_eval
