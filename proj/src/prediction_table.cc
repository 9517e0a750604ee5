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

#include "causal_eval/prediction_table.h"

#include <algorithm>
#include <array>

namespace causal_eval {
namespace {

// '1' = holds, '0' = fails.

// Columns: sufficiency Z=X, Z={X,A}; separation Z=X, Z={X,A}.
constexpr std::pair<Family, const char*> kIndependenceRows[] = {
    {Family::kCovariateShift, "1100"},    {Family::kOutcomeShift, "0100"},
    {Family::kComplexCausal, "0100"},     {Family::kLabelShift, "0110"},
    {Family::kPresentationShift, "0100"}, {Family::kComplexAnticausal, "0100"},
};

// Per control V in {none, X, Y, R}: rows f*, f, f*_A, f_A.
struct StabilityRow {
  SettingGroup group;
  std::array<const char*, 4> by_control;
};
constexpr StabilityRow kStabilityRows[] = {
    {SettingGroup::kCovariateShift, {"0000", "1110", "0000", "1010"}},
    {SettingGroup::kLabelShift, {"0000", "0000", "1100", "0010"}},
    {SettingGroup::kOther, {"0000", "0000", "0000", "0010"}},
};

// Per column (sufficiency, calibration, separation) x (Z=X, Z={X,A}): the
// selection rows X, A, XA, Y, XY, AY, XYA.
constexpr int kSelectionRowParents[] = {
    kParentX,           kParentA,           kParentX | kParentA, kParentY,
    kParentX | kParentY, kParentA | kParentY, kParentX | kParentY | kParentA,
};
struct SelectionRow {
  SettingGroup group;
  std::array<const char*, 6> by_column;
};
constexpr SelectionRow kSelectionRows[] = {
    {SettingGroup::kCovariateShift,
     {"1111000", "1111000", "1110000", "1110000", "0000000", "0000000"}},
    {SettingGroup::kLabelShift,
     {"0000000", "1111000", "0000000", "1110000", "1001100", "0000000"}},
    {SettingGroup::kOther, {"0000000", "1111000", "0000000", "1110000", "0000000", "0000000"}},
};

Expectation FromMark(char mark) { return mark == '1' ? Expectation::kHolds : Expectation::kFails; }

std::vector<Prediction> BuildTable() {
  std::vector<Prediction> table;
  for (const auto& [family, marks] : kIndependenceRows) {
    const Property properties[] = {Property::kSufficiency, Property::kSufficiency,
                                   Property::kSeparation, Property::kSeparation};
    for (int c = 0; c < 4; ++c) {
      Prediction p;
      p.source = PredictionSource::kConditionalIndependence;
      p.family = family;
      p.predictor = c % 2 == 0 ? Predictor::kPopulationBayes : Predictor::kSubgroupBayes;
      p.property = properties[c];
      p.expected = FromMark(marks[c]);
      table.push_back(p);
    }
  }
  const std::optional<ControlVariable> controls[] = {std::nullopt, ControlVariable::kX,
                                                     ControlVariable::kY, ControlVariable::kR};
  const Predictor predictors[] = {Predictor::kPopulationBayes, Predictor::kPopulationArbitrary,
                                  Predictor::kSubgroupBayes, Predictor::kSubgroupArbitrary};
  for (const StabilityRow& row : kStabilityRows) {
    for (int m = 0; m < 4; ++m) {
      for (int c = 0; c < 4; ++c) {
        Prediction p;
        p.source = PredictionSource::kMetricStability;
        p.group = row.group;
        p.predictor = predictors[m];
        p.property = Property::kStableGiven;
        p.control = controls[c];
        p.expected = FromMark(row.by_control[c][m]);
        table.push_back(p);
      }
    }
  }
  const Property selection_properties[] = {Property::kSufficiency, Property::kSubgroupCalibration,
                                           Property::kSeparation};
  for (const SelectionRow& row : kSelectionRows) {
    for (int s = 0; s < 7; ++s) {
      for (int column = 0; column < 6; ++column) {
        Prediction p;
        p.source = PredictionSource::kSelection;
        p.group = row.group;
        p.selection_parents = kSelectionRowParents[s];
        p.predictor = column % 2 == 0 ? Predictor::kPopulationBayes : Predictor::kSubgroupBayes;
        p.property = selection_properties[column / 2];
        p.expected = FromMark(row.by_column[column][s]);
        table.push_back(p);
      }
    }
  }
  return table;
}

}  // namespace

std::string_view SourceName(PredictionSource source) {
  switch (source) {
    case PredictionSource::kConditionalIndependence:
      return "conditional_independence";
    case PredictionSource::kMetricStability:
      return "metric_stability";
    case PredictionSource::kSelection:
      return "selection";
  }
  return "unknown";
}

std::string_view SettingGroupName(SettingGroup group) {
  switch (group) {
    case SettingGroup::kCovariateShift:
      return "covariate_shift";
    case SettingGroup::kLabelShift:
      return "label_shift";
    case SettingGroup::kOther:
      return "other";
  }
  return "unknown";
}

std::string_view PredictorName(Predictor predictor) {
  switch (predictor) {
    case Predictor::kPopulationBayes:
      return "f*";
    case Predictor::kPopulationArbitrary:
      return "f";
    case Predictor::kSubgroupBayes:
      return "f*_A";
    case Predictor::kSubgroupArbitrary:
      return "f_A";
  }
  return "unknown";
}

std::string_view PropertyName(Property property) {
  switch (property) {
    case Property::kSufficiency:
      return "sufficiency";
    case Property::kSeparation:
      return "separation";
    case Property::kSubgroupCalibration:
      return "subgroup_calibration";
    case Property::kStableGiven:
      return "stable_given";
  }
  return "unknown";
}

std::string_view ExpectationName(Expectation expected) {
  return expected == Expectation::kHolds ? "holds" : "fails";
}

std::string SelectionParentsName(int parents) {
  std::string name;
  if (parents & kParentX) name += 'X';
  if (parents & kParentA) name += 'A';
  if (parents & kParentY) name += 'Y';
  // Table order spells {A, Y} as "AY" and {X, Y, A} as "XYA".
  if (parents == (kParentX | kParentA | kParentY)) name = "XYA";
  return name;
}

std::string Prediction::Key() const {
  std::string key(SourceName(source));
  key += '/';
  key += family ? std::string(FamilyName(*family)) : std::string(SettingGroupName(*group));
  if (selection_parents != 0) key += "/S<-" + SelectionParentsName(selection_parents);
  key += '/';
  key += PredictorName(predictor);
  key += '/';
  key += PropertyName(property);
  if (property == Property::kStableGiven) {
    key += '(';
    key += control ? std::string(ControlVariableName(*control)) : "";
    key += ')';
  }
  return key;
}

nlohmann::json Prediction::ToJson() const {
  nlohmann::json value = {
      {"source", std::string(SourceName(source))},
      {"predictor", std::string(PredictorName(predictor))},
      {"property", std::string(PropertyName(property))},
      {"expected", std::string(ExpectationName(expected))},
      {"key", Key()},
  };
  if (family) value["family"] = std::string(FamilyName(*family));
  if (group) value["setting_group"] = std::string(SettingGroupName(*group));
  if (selection_parents != 0) value["selection_parents"] = SelectionParentsName(selection_parents);
  if (property == Property::kStableGiven) {
    value["control"] = control ? std::string(ControlVariableName(*control)) : "none";
  }
  return value;
}

const std::vector<Prediction>& PredictionTable() {
  static const std::vector<Prediction>* const table = new std::vector<Prediction>(BuildTable());
  return *table;
}

std::size_t CountEntries(PredictionSource source) {
  const auto& table = PredictionTable();
  return static_cast<std::size_t>(std::count_if(
      table.begin(), table.end(), [&](const Prediction& p) { return p.source == source; }));
}

SettingGroup SettingGroupOf(Family family) {
  switch (family) {
    case Family::kCovariateShift:
    case Family::kSeparableComplexCausal:
      return SettingGroup::kCovariateShift;
    case Family::kLabelShift:
      return SettingGroup::kLabelShift;
    default:
      return SettingGroup::kOther;
  }
}

int SelectionParentsOf(Selection selection) {
  switch (selection) {
    case Selection::kNone:
      return 0;
    case Selection::kX:
      return kParentX;
    case Selection::kY:
      return kParentY;
    case Selection::kYA:
      return kParentA | kParentY;
  }
  return 0;
}

Predictor BayesPredictorFor(CovariatePolicy policy) {
  return policy == CovariatePolicy::kAgnostic ? Predictor::kPopulationBayes
                                              : Predictor::kSubgroupBayes;
}

std::optional<Prediction> LookupStability(Family family, CovariatePolicy policy,
                                          std::optional<ControlVariable> v) {
  const SettingGroup group = SettingGroupOf(family);
  const Predictor predictor = BayesPredictorFor(policy);
  for (const Prediction& p : PredictionTable()) {
    if (p.source == PredictionSource::kMetricStability && p.group == group &&
        p.predictor == predictor && p.control == v) {
      return p;
    }
  }
  return std::nullopt;
}

std::optional<Prediction> LookupProperty(Family family, Selection selection,
                                         CovariatePolicy policy, Property property) {
  const Predictor predictor = BayesPredictorFor(policy);
  if (property == Property::kStableGiven) return std::nullopt;
  if (selection == Selection::kNone) {
    const Property looked_up =
        property == Property::kSubgroupCalibration ? Property::kSufficiency : property;
    const Family row =
        family == Family::kSeparableComplexCausal ? Family::kCovariateShift : family;
    for (const Prediction& p : PredictionTable()) {
      if (p.source == PredictionSource::kConditionalIndependence && p.family == row &&
          p.predictor == predictor && p.property == looked_up) {
        return p;
      }
    }
    return std::nullopt;
  }
  const SettingGroup group = SettingGroupOf(family);
  const int parents = SelectionParentsOf(selection);
  for (const Prediction& p : PredictionTable()) {
    if (p.source == PredictionSource::kSelection && p.group == group &&
        p.selection_parents == parents && p.predictor == predictor && p.property == property) {
      return p;
    }
  }
  return std::nullopt;
}

}  // namespace causal_eval
