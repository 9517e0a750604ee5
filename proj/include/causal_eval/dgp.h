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

// Synthetic data generating processes with subgroup heterogeneity.
//
// Causal direction (X -> Y), binary latent U:
//   U ~ Bernoulli(0.5),  X | U ~ N(mu_U, 1)
//   A = U with probability gamma, otherwise a fresh fair coin
//   Y | X, A=a ~ Bernoulli(sigmoid(beta_a * X + alpha_a))
//
// Anticausal direction (Y -> X):
//   A ~ Bernoulli(0.5)
//   Y | A ~ Bernoulli(A * pi_y0 + (1 - A) * pi_y1)
//   X | A, Y ~ N(mu_AY, 1)
//
// Optional selection S given parents in {X, Y, A}.

#ifndef CAUSAL_EVAL_DGP_H_
#define CAUSAL_EVAL_DGP_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "causal_eval/dataset.h"
#include "json.hpp"

namespace causal_eval {

enum class Family {
  kCovariateShift,
  kOutcomeShift,
  kComplexCausal,
  kSeparableComplexCausal,
  kLabelShift,
  kPresentationShift,
  kComplexAnticausal,
};

inline constexpr Family kAllFamilies[] = {
    Family::kCovariateShift,   Family::kOutcomeShift,
    Family::kComplexCausal,    Family::kSeparableComplexCausal,
    Family::kLabelShift,       Family::kPresentationShift,
    Family::kComplexAnticausal,
};

enum class Selection { kNone, kX, kY, kYA };

bool IsCausalDirection(Family family);
std::string_view FamilyName(Family family);
absl::StatusOr<Family> ParseFamily(std::string_view name);
std::string_view SelectionName(Selection selection);
absl::StatusOr<Selection> ParseSelection(std::string_view name);

struct CausalParams {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double gamma = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
};

// `pi_y0` is the prevalence of Y among A=1 and `pi_y1` among A=0, following
// the written prevalence expression A*pi_y0 + (1-A)*pi_y1.
struct AnticausalParams {
  double pi_y0 = 0.5;
  double pi_y1 = 0.5;
  double mu_a0y0 = 0.0;
  double mu_a0y1 = 0.0;
  double mu_a1y0 = 0.0;
  double mu_a1y1 = 0.0;

  double Prevalence(int a) const { return a == 1 ? pi_y0 : pi_y1; }
  double Mean(int a, int y) const {
    return a == 0 ? (y == 0 ? mu_a0y0 : mu_a0y1) : (y == 0 ? mu_a1y0 : mu_a1y1);
  }
};

struct DgpSpec {
  Family family = Family::kCovariateShift;
  std::optional<CausalParams> causal;
  std::optional<AnticausalParams> anticausal;
  Selection selection = Selection::kNone;

  absl::Status Validate() const;
};

// Published parameterization of each family, without selection.
DgpSpec Preset(Family family);

// Row-level simulation. Row i of the output depends only on (spec, seed, i).
absl::StatusOr<Dataset> Sample(const DgpSpec& spec, int64_t n, uint64_t seed);

// Bernoulli parameter of S, clamped into [0, 1].
absl::StatusOr<double> SelectionProbability(const DgpSpec& spec, double x, int y, int a);

// Rejection sampler over the full process, keeping S=1 rows.
absl::StatusOr<Dataset> SampleSelected(const DgpSpec& spec, int64_t n_selected, uint64_t seed);

enum class ScorePolicy { kAgnostic, kAware };

// Closed-form E[Y | X=x] (agnostic) or E[Y | X=x, A=a] (aware) in the full
// population.
double BayesScore(const DgpSpec& spec, double x, int a, ScorePolicy policy);

// P(A=a | X=x) in the full population.
double GroupPosterior(const DgpSpec& spec, double x, int a);

// Density of X given A=a in the full population.
double CovariateDensity(const DgpSpec& spec, double x, int a);

nlohmann::json SpecToJson(const DgpSpec& spec);
absl::StatusOr<DgpSpec> SpecFromJson(const nlohmann::json& value);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_DGP_H_
