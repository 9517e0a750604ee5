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

// Theoretical predictions implied by the causal graphs of the synthetic
// processes, in three tables:
//
//   kConditionalIndependence  sufficiency / separation of Bayes-optimal
//                             predictors, per shift family (24 entries)
//   kMetricStability          whether {R, Y} _||_ A | V, per setting group,
//                             predictor and control variable (48 entries)
//   kSelection                sufficiency / subgroup calibration / separation
//                             in the full population of predictors that are
//                             Bayes-optimal in a selected population
//                             (126 entries)

#ifndef CAUSAL_EVAL_PREDICTION_TABLE_H_
#define CAUSAL_EVAL_PREDICTION_TABLE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causal_eval/dgp.h"
#include "causal_eval/learner.h"
#include "json.hpp"

namespace causal_eval {

enum class PredictionSource { kConditionalIndependence, kMetricStability, kSelection };

enum class SettingGroup { kCovariateShift, kLabelShift, kOther };

// Rows of the stability table. Z = X for the population rows and Z = {X, A}
// for the subgroup rows.
enum class Predictor {
  kPopulationBayes,      // f*
  kPopulationArbitrary,  // f with Z = X
  kSubgroupBayes,        // f*_A
  kSubgroupArbitrary,    // f with Z = {X, A}
};

enum class Property { kSufficiency, kSeparation, kSubgroupCalibration, kStableGiven };

enum class Expectation { kHolds, kFails };

// Parents of the selection node, as a bit set.
inline constexpr int kParentX = 1;
inline constexpr int kParentA = 2;
inline constexpr int kParentY = 4;

struct Prediction {
  PredictionSource source = PredictionSource::kConditionalIndependence;
  // Shift family (conditional-independence table only).
  std::optional<Family> family;
  // Setting group (stability and selection tables).
  std::optional<SettingGroup> group;
  int selection_parents = 0;
  Predictor predictor = Predictor::kPopulationBayes;
  Property property = Property::kSufficiency;
  // Stability table only; nullopt is the empty control set.
  std::optional<ControlVariable> control;
  Expectation expected = Expectation::kFails;

  std::string Key() const;
  nlohmann::json ToJson() const;
};

std::string_view SourceName(PredictionSource source);
std::string_view SettingGroupName(SettingGroup group);
std::string_view PredictorName(Predictor predictor);
std::string_view PropertyName(Property property);
std::string_view ExpectationName(Expectation expected);
// "X", "A", "XA", "Y", "XY", "AY", "XYA"; empty for no selection.
std::string SelectionParentsName(int parents);

// Every transcribed entry, in table order.
const std::vector<Prediction>& PredictionTable();
std::size_t CountEntries(PredictionSource source);

// The separable configuration behaves like covariate shift: A is (nearly) a
// function of X, so Y _||_ A | X holds approximately.
SettingGroup SettingGroupOf(Family family);
int SelectionParentsOf(Selection selection);
// Fitted agnostic models stand in for f*, aware and stratified ones for f*_A.
Predictor BayesPredictorFor(CovariatePolicy policy);

// Stability of a metric for the controlled evaluation of `policy` with
// control `v` (nullopt: no control).
std::optional<Prediction> LookupStability(Family family, CovariatePolicy policy,
                                          std::optional<ControlVariable> v);

// Sufficiency, separation or subgroup calibration of `policy`. Without
// selection, sufficiency and separation come from the conditional
// independence table, and subgroup calibration follows sufficiency (a
// Bayes-optimal score is calibrated, so Y _||_ A | R makes it calibrated in
// every subgroup). With selection, all three come from the selection table.
std::optional<Prediction> LookupProperty(Family family, Selection selection,
                                         CovariatePolicy policy, Property property);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_PREDICTION_TABLE_H_
