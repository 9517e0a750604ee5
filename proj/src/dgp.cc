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

#include "causal_eval/dgp.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "causal_eval/rng.h"

namespace causal_eval {
namespace {

// Minimum number of candidates examined before the acceptance-rate guard of
// the rejection sampler can trigger.
constexpr int64_t kMinCandidatesForRateCheck = 10000;
constexpr double kMinAcceptanceRate = 1e-3;

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double NormalPdf(double x, double mean) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
}

struct FamilyEntry {
  Family family;
  std::string_view name;
};

constexpr FamilyEntry kFamilyNames[] = {
    {Family::kCovariateShift, "covariate_shift"},
    {Family::kOutcomeShift, "outcome_shift"},
    {Family::kComplexCausal, "complex_causal"},
    {Family::kSeparableComplexCausal, "separable_complex_causal"},
    {Family::kLabelShift, "label_shift"},
    {Family::kPresentationShift, "presentation_shift"},
    {Family::kComplexAnticausal, "complex_anticausal"},
};

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

// One row of the full (unselected) process.
struct RowDraw {
  double x;
  int a;
  int y;
};

class RowGenerator {
 public:
  RowGenerator(const DgpSpec& spec, uint64_t seed)
      : spec_(spec),
        latent_(seed, Stream::kLatent),
        group_(seed, Stream::kGroup),
        mixing_(seed, Stream::kGroupMixing),
        covariate_(seed, Stream::kCovariate),
        label_(seed, Stream::kLabel),
        selection_(seed, Stream::kSelection) {}

  RowDraw Draw(uint64_t i) const {
    RowDraw row;
    if (spec_.causal) {
      const CausalParams& p = *spec_.causal;
      const int u = latent_.Bernoulli(i, 0.5) ? 1 : 0;
      row.x = (u == 1 ? p.mu1 : p.mu0) + covariate_.Normal(i);
      row.a = mixing_.Bernoulli(i, p.gamma) ? u : (group_.Bernoulli(i, 0.5) ? 1 : 0);
      const double logit = row.a == 1 ? p.beta1 * row.x + p.alpha1 : p.beta0 * row.x + p.alpha0;
      row.y = label_.Bernoulli(i, Sigmoid(logit)) ? 1 : 0;
    } else {
      const AnticausalParams& p = *spec_.anticausal;
      row.a = group_.Bernoulli(i, 0.5) ? 1 : 0;
      row.y = label_.Bernoulli(i, p.Prevalence(row.a)) ? 1 : 0;
      row.x = p.Mean(row.a, row.y) + covariate_.Normal(i);
    }
    return row;
  }

  int DrawSelection(uint64_t i, const RowDraw& row) const {
    const double p = *SelectionProbability(spec_, row.x, row.y, row.a);
    return selection_.Bernoulli(i, p) ? 1 : 0;
  }

 private:
  const DgpSpec& spec_;
  CounterRng latent_, group_, mixing_, covariate_, label_, selection_;
};

void Append(Dataset& data, const RowDraw& row) {
  data.x.push_back(row.x);
  data.a.push_back(row.a);
  data.y.push_back(row.y);
}

}  // namespace

bool IsCausalDirection(Family family) {
  switch (family) {
    case Family::kCovariateShift:
    case Family::kOutcomeShift:
    case Family::kComplexCausal:
    case Family::kSeparableComplexCausal:
      return true;
    case Family::kLabelShift:
    case Family::kPresentationShift:
    case Family::kComplexAnticausal:
      return false;
  }
  return false;
}

std::string_view FamilyName(Family family) {
  for (const auto& entry : kFamilyNames) {
    if (entry.family == family) return entry.name;
  }
  return "unknown";
}

absl::StatusOr<Family> ParseFamily(std::string_view name) {
  for (const auto& entry : kFamilyNames) {
    if (entry.name == name) return entry.family;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown family '", std::string(name), "'"));
}

std::string_view SelectionName(Selection selection) {
  switch (selection) {
    case Selection::kNone:
      return "none";
    case Selection::kX:
      return "x";
    case Selection::kY:
      return "y";
    case Selection::kYA:
      return "ya";
  }
  return "unknown";
}

absl::StatusOr<Selection> ParseSelection(std::string_view name) {
  for (Selection s : {Selection::kNone, Selection::kX, Selection::kY, Selection::kYA}) {
    if (SelectionName(s) == name) return s;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown selection mechanism '", std::string(name), "'"));
}

absl::Status DgpSpec::Validate() const {
  const bool causal_family = IsCausalDirection(family);
  if (causal.has_value() == anticausal.has_value()) {
    return absl::InvalidArgumentError(
        "exactly one of causal / anticausal parameters must be present");
  }
  if (causal_family != causal.has_value()) {
    return absl::InvalidArgumentError(absl::StrCat("parameter block does not match family ",
                                                   std::string(FamilyName(family))));
  }
  if (causal) {
    if (!IsProbability(causal->gamma)) {
      return absl::InvalidArgumentError("gamma must lie in [0, 1]");
    }
    for (double v : {causal->mu0, causal->mu1, causal->beta0, causal->beta1, causal->alpha0,
                     causal->alpha1}) {
      if (!std::isfinite(v)) return absl::InvalidArgumentError("non-finite causal parameter");
    }
  } else {
    if (!IsProbability(anticausal->pi_y0) || !IsProbability(anticausal->pi_y1)) {
      return absl::InvalidArgumentError("prevalences must lie in [0, 1]");
    }
    for (double v : {anticausal->mu_a0y0, anticausal->mu_a0y1, anticausal->mu_a1y0,
                     anticausal->mu_a1y1}) {
      if (!std::isfinite(v)) return absl::InvalidArgumentError("non-finite anticausal mean");
    }
  }
  return absl::OkStatus();
}

DgpSpec Preset(Family family) {
  DgpSpec spec;
  spec.family = family;
  switch (family) {
    case Family::kCovariateShift:
      spec.causal = CausalParams{.mu0 = -2, .mu1 = 0, .gamma = 1, .beta0 = 0.5, .beta1 = 0.5,
                                 .alpha0 = 0, .alpha1 = 0};
      break;
    case Family::kOutcomeShift:
      spec.causal = CausalParams{.mu0 = -2, .mu1 = 0, .gamma = 0, .beta0 = 0.5, .beta1 = -1,
                                 .alpha0 = 0.1, .alpha1 = 0};
      break;
    case Family::kComplexCausal:
      spec.causal = CausalParams{.mu0 = -2, .mu1 = 0, .gamma = 1, .beta0 = 0.5, .beta1 = -1,
                                 .alpha0 = 0.1, .alpha1 = 0};
      break;
    case Family::kSeparableComplexCausal:
      spec.causal = CausalParams{.mu0 = -2, .mu1 = 2, .gamma = 1, .beta0 = 0.5, .beta1 = -1,
                                 .alpha0 = 0.1, .alpha1 = 0};
      break;
    case Family::kLabelShift:
      spec.anticausal = AnticausalParams{.pi_y0 = 0.5, .pi_y1 = 0.1, .mu_a0y0 = -1,
                                         .mu_a0y1 = 1, .mu_a1y0 = -1, .mu_a1y1 = 1};
      break;
    case Family::kPresentationShift:
      spec.anticausal = AnticausalParams{.pi_y0 = 0.5, .pi_y1 = 0.5, .mu_a0y0 = 1,
                                         .mu_a0y1 = 0, .mu_a1y0 = -1, .mu_a1y1 = 1};
      break;
    case Family::kComplexAnticausal:
      spec.anticausal = AnticausalParams{.pi_y0 = 0.5, .pi_y1 = 0.1, .mu_a0y0 = 1,
                                         .mu_a0y1 = 0, .mu_a1y0 = -1, .mu_a1y1 = 1};
      break;
  }
  return spec;
}

absl::StatusOr<Dataset> Sample(const DgpSpec& spec, int64_t n, uint64_t seed) {
  if (n <= 0) return absl::InvalidArgumentError(absl::StrCat("sample size must be positive, got ", n));
  if (auto status = spec.Validate(); !status.ok()) return status;
  Dataset data = MakeSyntheticSchema();
  data.x.reserve(n);
  data.a.reserve(n);
  data.y.reserve(n);
  const RowGenerator generator(spec, seed);
  const bool with_selection = spec.selection != Selection::kNone;
  if (with_selection) data.s.reserve(n);
  for (int64_t i = 0; i < n; ++i) {
    const RowDraw row = generator.Draw(i);
    Append(data, row);
    if (with_selection) data.s.push_back(generator.DrawSelection(i, row));
  }
  return data;
}

absl::StatusOr<double> SelectionProbability(const DgpSpec& spec, double x, int y, int a) {
  switch (spec.selection) {
    case Selection::kNone:
      return absl::FailedPreconditionError("spec has no selection mechanism");
    case Selection::kX:
      return std::clamp(-(4.0 / 25.0) * x * x + 1.0, 0.0, 1.0);
    case Selection::kY:
      return 0.8 * y + 0.4 * (1 - y);
    case Selection::kYA:
      return a == 0 ? 0.5 * y + 0.8 * (1 - y) : 0.25 * y + 0.8 * (1 - y);
  }
  return absl::InternalError("unhandled selection mechanism");
}

absl::StatusOr<Dataset> SampleSelected(const DgpSpec& spec, int64_t n_selected, uint64_t seed) {
  if (spec.selection == Selection::kNone) {
    return absl::FailedPreconditionError("SampleSelected requires a selection mechanism");
  }
  if (n_selected <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("selected sample size must be positive, got ", n_selected));
  }
  if (auto status = spec.Validate(); !status.ok()) return status;
  Dataset data = MakeSyntheticSchema();
  const RowGenerator generator(spec, seed);
  int64_t accepted = 0;
  for (uint64_t candidate = 0; accepted < n_selected; ++candidate) {
    const RowDraw row = generator.Draw(candidate);
    if (generator.DrawSelection(candidate, row) == 1) {
      Append(data, row);
      data.s.push_back(1);
      ++accepted;
    }
    const int64_t examined = static_cast<int64_t>(candidate) + 1;
    if (examined >= kMinCandidatesForRateCheck && examined % kMinCandidatesForRateCheck == 0 &&
        static_cast<double>(accepted) < kMinAcceptanceRate * static_cast<double>(examined)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "selection acceptance rate ", static_cast<double>(accepted) / examined,
          " after ", examined, " candidates is below ", kMinAcceptanceRate));
    }
  }
  return data;
}

double CovariateDensity(const DgpSpec& spec, double x, int a) {
  if (spec.causal) {
    const CausalParams& p = *spec.causal;
    // P(A=a)=1/2 for every gamma, so P(U=u | A=a) = P(A=a | U=u).
    const double p_u1 = p.gamma * (a == 1 ? 1.0 : 0.0) + (1.0 - p.gamma) * 0.5;
    return p_u1 * NormalPdf(x, p.mu1) + (1.0 - p_u1) * NormalPdf(x, p.mu0);
  }
  const AnticausalParams& p = *spec.anticausal;
  const double prevalence = p.Prevalence(a);
  return prevalence * NormalPdf(x, p.Mean(a, 1)) +
         (1.0 - prevalence) * NormalPdf(x, p.Mean(a, 0));
}

double GroupPosterior(const DgpSpec& spec, double x, int a) {
  const double d0 = CovariateDensity(spec, x, 0);
  const double d1 = CovariateDensity(spec, x, 1);
  const double total = d0 + d1;
  if (total <= 0.0) return 0.5;
  return (a == 1 ? d1 : d0) / total;
}

double BayesScore(const DgpSpec& spec, double x, int a, ScorePolicy policy) {
  if (policy == ScorePolicy::kAgnostic) {
    return GroupPosterior(spec, x, 0) * BayesScore(spec, x, 0, ScorePolicy::kAware) +
           GroupPosterior(spec, x, 1) * BayesScore(spec, x, 1, ScorePolicy::kAware);
  }
  if (spec.causal) {
    const CausalParams& p = *spec.causal;
    return Sigmoid(a == 1 ? p.beta1 * x + p.alpha1 : p.beta0 * x + p.alpha0);
  }
  const AnticausalParams& p = *spec.anticausal;
  const double positive = p.Prevalence(a) * NormalPdf(x, p.Mean(a, 1));
  const double negative = (1.0 - p.Prevalence(a)) * NormalPdf(x, p.Mean(a, 0));
  if (positive + negative <= 0.0) return p.Prevalence(a);
  return positive / (positive + negative);
}

nlohmann::json SpecToJson(const DgpSpec& spec) {
  nlohmann::json out;
  out["family"] = std::string(FamilyName(spec.family));
  out["selection"] = std::string(SelectionName(spec.selection));
  if (spec.causal) {
    const CausalParams& p = *spec.causal;
    out["causal"] = {{"mu0", p.mu0},       {"mu1", p.mu1},       {"gamma", p.gamma},
                     {"beta_a0", p.beta0}, {"beta_a1", p.beta1}, {"alpha_a0", p.alpha0},
                     {"alpha_a1", p.alpha1}};
  }
  if (spec.anticausal) {
    const AnticausalParams& p = *spec.anticausal;
    out["anticausal"] = {{"pi_y0", p.pi_y0},     {"pi_y1", p.pi_y1},
                         {"mu_a0y0", p.mu_a0y0}, {"mu_a0y1", p.mu_a0y1},
                         {"mu_a1y0", p.mu_a1y0}, {"mu_a1y1", p.mu_a1y1}};
  }
  return out;
}

absl::StatusOr<DgpSpec> SpecFromJson(const nlohmann::json& value) {
  if (!value.is_object() || !value.contains("family") || !value["family"].is_string()) {
    return absl::InvalidArgumentError("DGP spec must be an object with a string 'family'");
  }
  auto family = ParseFamily(value["family"].get<std::string>());
  if (!family.ok()) return family.status();
  DgpSpec spec = Preset(*family);
  if (value.contains("selection")) {
    if (!value["selection"].is_string()) return absl::InvalidArgumentError("'selection' must be a string");
    auto selection = ParseSelection(value["selection"].get<std::string>());
    if (!selection.ok()) return selection.status();
    spec.selection = *selection;
  }
  try {
    if (value.contains("causal")) {
      const auto& p = value["causal"];
      spec.anticausal.reset();
      spec.causal = CausalParams{.mu0 = p.at("mu0").get<double>(),
                                 .mu1 = p.at("mu1").get<double>(),
                                 .gamma = p.at("gamma").get<double>(),
                                 .beta0 = p.at("beta_a0").get<double>(),
                                 .beta1 = p.at("beta_a1").get<double>(),
                                 .alpha0 = p.at("alpha_a0").get<double>(),
                                 .alpha1 = p.at("alpha_a1").get<double>()};
    }
    if (value.contains("anticausal")) {
      const auto& p = value["anticausal"];
      spec.causal.reset();
      spec.anticausal = AnticausalParams{.pi_y0 = p.at("pi_y0").get<double>(),
                                         .pi_y1 = p.at("pi_y1").get<double>(),
                                         .mu_a0y0 = p.at("mu_a0y0").get<double>(),
                                         .mu_a0y1 = p.at("mu_a0y1").get<double>(),
                                         .mu_a1y0 = p.at("mu_a1y0").get<double>(),
                                         .mu_a1y1 = p.at("mu_a1y1").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed DGP parameters: ", e.what()));
  }
  if (auto status = spec.Validate(); !status.ok()) return status;
  return spec;
}

}  // namespace causal_eval
