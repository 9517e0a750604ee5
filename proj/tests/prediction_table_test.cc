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

#include <map>
#include <set>
#include <string>

#include "gtest/gtest.h"

namespace causal_eval {
namespace {

// A second, independent transcription: one character per cell, 'v' for a
// check mark and 'x' for a cross, read left to right off each table row.
Expectation Mark(char c) { return c == 'v' ? Expectation::kHolds : Expectation::kFails; }

// Sufficiency Z=X, Z={X,A}, separation Z=X, Z={X,A}.
const std::map<Family, std::string>& CiRows() {
  static const auto* rows = new std::map<Family, std::string>{
      {Family::kCovariateShift, "vvxx"},   {Family::kOutcomeShift, "xvxx"},
      {Family::kComplexCausal, "xvxx"},    {Family::kLabelShift, "xvvx"},
      {Family::kPresentationShift, "xvxx"}, {Family::kComplexAnticausal, "xvxx"},
  };
  return *rows;
}

// Rows f*, f, f*_A, f; columns V = {}, X, Y, R.
const std::map<SettingGroup, std::vector<std::string>>& StabilityRows() {
  static const auto* rows = new std::map<SettingGroup, std::vector<std::string>>{
      {SettingGroup::kCovariateShift, {"xvxv", "xvxx", "xvxv", "xxxx"}},
      {SettingGroup::kLabelShift, {"xxvx", "xxvx", "xxxv", "xxxx"}},
      {SettingGroup::kOther, {"xxxx", "xxxx", "xxxv", "xxxx"}},
  };
  return *rows;
}

// Selection rows X, A, XA, Y, XY, AY, XYA; columns sufficiency, subgroup
// calibration and separation, each for Z=X then Z={X,A}.
const std::map<SettingGroup, std::vector<std::string>>& SelectionRows() {
  static const auto* rows = new std::map<SettingGroup, std::vector<std::string>>{
      {SettingGroup::kCovariateShift,
       {"vvvvxx", "vvvvxx", "vvvvxx", "vvxxxx", "xxxxxx", "xxxxxx", "xxxxxx"}},
      {SettingGroup::kLabelShift,
       {"xvxvvx", "xvxvxx", "xvxvxx", "xvxxvx", "xxxxvx", "xxxxxx", "xxxxxx"}},
      {SettingGroup::kOther,
       {"xvxvxx", "xvxvxx", "xvxvxx", "xvxxxx", "xxxxxx", "xxxxxx", "xxxxxx"}},
  };
  return *rows;
}

constexpr int kSelectionParents[] = {kParentX,
                                     kParentA,
                                     kParentX | kParentA,
                                     kParentY,
                                     kParentX | kParentY,
                                     kParentA | kParentY,
                                     kParentX | kParentY | kParentA};

TEST(PredictionTableTest, Cardinalities) {
  EXPECT_EQ(CountEntries(PredictionSource::kConditionalIndependence), 24u);
  EXPECT_EQ(CountEntries(PredictionSource::kMetricStability), 48u);
  EXPECT_EQ(CountEntries(PredictionSource::kSelection), 126u);
  EXPECT_EQ(PredictionTable().size(), 24u + 48u + 126u);
}

TEST(PredictionTableTest, KeysAreUnique) {
  std::set<std::string> keys;
  for (const Prediction& p : PredictionTable()) {
    EXPECT_TRUE(keys.insert(p.Key()).second) << p.Key();
  }
}

TEST(PredictionTableTest, ConditionalIndependenceMatchesTranscription) {
  int checked = 0;
  for (const Prediction& p : PredictionTable()) {
    if (p.source != PredictionSource::kConditionalIndependence) continue;
    ASSERT_TRUE(p.family.has_value());
    const std::string& row = CiRows().at(*p.family);
    const int column = (p.property == Property::kSeparation ? 2 : 0) +
                       (p.predictor == Predictor::kSubgroupBayes ? 1 : 0);
    EXPECT_EQ(p.expected, Mark(row[column])) << p.Key();
    ++checked;
  }
  EXPECT_EQ(checked, 24);
}

TEST(PredictionTableTest, StabilityMatchesTranscription) {
  int checked = 0;
  for (const Prediction& p : PredictionTable()) {
    if (p.source != PredictionSource::kMetricStability) continue;
    ASSERT_TRUE(p.group.has_value());
    const int row = static_cast<int>(p.predictor);
    const int column = p.control ? 1 + static_cast<int>(*p.control) : 0;
    EXPECT_EQ(p.expected, Mark(StabilityRows().at(*p.group)[row][column])) << p.Key();
    ++checked;
  }
  EXPECT_EQ(checked, 48);
}

TEST(PredictionTableTest, SelectionMatchesTranscription) {
  int checked = 0;
  for (const Prediction& p : PredictionTable()) {
    if (p.source != PredictionSource::kSelection) continue;
    ASSERT_TRUE(p.group.has_value());
    int row = -1;
    for (int i = 0; i < 7; ++i) {
      if (kSelectionParents[i] == p.selection_parents) row = i;
    }
    ASSERT_GE(row, 0) << p.Key();
    int block = 0;
    if (p.property == Property::kSubgroupCalibration) block = 1;
    if (p.property == Property::kSeparation) block = 2;
    const int column = 2 * block + (p.predictor == Predictor::kSubgroupBayes ? 1 : 0);
    EXPECT_EQ(p.expected, Mark(SelectionRows().at(*p.group)[row][column])) << p.Key();
    ++checked;
  }
  EXPECT_EQ(checked, 126);
}

TEST(LookupTest, Examples) {
  auto stable = LookupStability(Family::kCovariateShift, CovariatePolicy::kAgnostic,
                                ControlVariable::kX);
  ASSERT_TRUE(stable.has_value());
  EXPECT_EQ(stable->expected, Expectation::kHolds);

  auto separation = LookupProperty(Family::kLabelShift, Selection::kNone,
                                   CovariatePolicy::kAware, Property::kSeparation);
  ASSERT_TRUE(separation.has_value());
  EXPECT_EQ(separation->expected, Expectation::kFails);

  auto calibration = LookupProperty(Family::kComplexCausal, Selection::kYA,
                                    CovariatePolicy::kAware, Property::kSubgroupCalibration);
  ASSERT_TRUE(calibration.has_value());
  EXPECT_EQ(calibration->expected, Expectation::kFails);

  auto label = LookupStability(Family::kLabelShift, CovariatePolicy::kAgnostic,
                               ControlVariable::kY);
  ASSERT_TRUE(label.has_value());
  EXPECT_EQ(label->expected, Expectation::kHolds);
}

TEST(LookupTest, SelectionRows) {
  struct Case {
    Selection selection;
    Property property;
    Expectation expected;
  };
  for (const Case& c : {Case{Selection::kX, Property::kSubgroupCalibration, Expectation::kHolds},
                        Case{Selection::kY, Property::kSufficiency, Expectation::kHolds},
                        Case{Selection::kY, Property::kSubgroupCalibration, Expectation::kFails},
                        Case{Selection::kYA, Property::kSufficiency, Expectation::kFails}}) {
    auto p = LookupProperty(Family::kComplexCausal, c.selection, CovariatePolicy::kAware,
                            c.property);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(p->expected, c.expected) << p->Key();
  }
}

TEST(LookupTest, SeparableBehavesLikeCovariateShift) {
  EXPECT_EQ(SettingGroupOf(Family::kSeparableComplexCausal), SettingGroup::kCovariateShift);
  EXPECT_EQ(SettingGroupOf(Family::kPresentationShift), SettingGroup::kOther);
  auto p = LookupStability(Family::kSeparableComplexCausal, CovariatePolicy::kAgnostic,
                           ControlVariable::kX);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->expected, Expectation::kHolds);
}

TEST(LookupTest, UnselectedCalibrationFollowsSufficiency) {
  for (Family family : kAllFamilies) {
    for (CovariatePolicy policy : kAllPolicies) {
      auto sufficiency = LookupProperty(family, Selection::kNone, policy, Property::kSufficiency);
      auto calibration =
          LookupProperty(family, Selection::kNone, policy, Property::kSubgroupCalibration);
      ASSERT_EQ(sufficiency.has_value(), calibration.has_value());
      if (sufficiency) {
        EXPECT_EQ(sufficiency->expected, calibration->expected);
      }
    }
  }
}

TEST(PredictionTest, JsonCarriesExpectation) {
  const Prediction& first = PredictionTable().front();
  const nlohmann::json value = first.ToJson();
  EXPECT_EQ(value["expected"], std::string(ExpectationName(first.expected)));
  EXPECT_EQ(value["key"], first.Key());
}

TEST(NamesTest, SelectionParents) {
  EXPECT_EQ(SelectionParentsName(kParentX | kParentY | kParentA), "XYA");
  EXPECT_EQ(SelectionParentsName(kParentA | kParentY), "AY");
  EXPECT_EQ(SelectionParentsName(0), "");
  EXPECT_EQ(SelectionParentsOf(Selection::kYA), kParentA | kParentY);
  EXPECT_EQ(SelectionParentsOf(Selection::kNone), 0);
}

}  // namespace
}  // namespace causal_eval
