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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails. All runs use n_train = 50,000, n_test = 20,000,
// 1,000 bootstrap replicates and base seed 0.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "causal_eval/audit.h"
#include "causal_eval/dgp.h"
#include "causal_eval/inference.h"
#include "causal_eval/learner.h"
#include "causal_eval/manifest.h"
#include "causal_eval/metrics.h"
#include "causal_eval/prediction_table.h"
#include "causal_eval/report.h"
#include "causal_eval/rng.h"
#include "reference_metrics.h"

namespace causal_eval {
namespace {

constexpr int64_t kTrain = 50000;
constexpr int64_t kTest = 20000;
constexpr int kReplicates = 1000;
constexpr uint64_t kSeed = 0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool condition, const std::string& what) {
    if (!condition) pass = false;
    detail << "\n    " << (condition ? "ok   " : "MISS ") << what;
  }
};

int Threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string Ci(const CellEstimate& e) {
  if (!e.defined()) return "undefined (" + e.undefined_reason + ")";
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "%+.5f [%+.5f, %+.5f]", e.interval->point,
                e.interval->lower, e.interval->upper);
  return buffer;
}

bool Covers(const CellEstimate& e) { return e.defined() && e.interval->Covers(0.0); }
bool Excludes(const CellEstimate& e) { return e.defined() && !e.interval->Covers(0.0); }

ExperimentManifest Manifest(std::vector<DgpSpec> settings) {
  ExperimentManifest m;
  m.settings = std::move(settings);
  m.n_train = kTrain;
  m.n_test = kTest;
  m.replicates = kReplicates;
  m.seed = kSeed;
  return m;
}

std::vector<DgpSpec> AllPresets() {
  std::vector<DgpSpec> out;
  for (Family family : kAllFamilies) out.push_back(Preset(family));
  return out;
}

std::vector<const ControlledCell*> Cells(const AuditReport& report, const std::string& setting,
                                         CovariatePolicy policy, std::string_view metric,
                                         std::optional<ControlVariable> control) {
  std::vector<const ControlledCell*> out;
  for (const ControlledCell& cell : report.cells) {
    if (cell.setting == setting && cell.policy == policy && cell.metric.Name() == metric &&
        cell.control == control) {
      out.push_back(&cell);
    }
  }
  return out;
}

std::string Describe(const ControlledCell& cell) {
  return std::string(PolicyName(cell.policy)) + " " + cell.metric.Name() + " V=" +
         ControlName(cell.control) + " a=" + cell.subgroup_label + ": T " + Ci(cell.t_statistic);
}

std::string Describe(const CalibrationRecord& record) {
  std::ostringstream out;
  out << record.setting << " " << PolicyName(record.policy) << " a=" << record.subgroup_label
      << ": ";
  if (!record.curve) {
    out << "no curve (" << record.error << ")";
  } else {
    out << record.curve->PassingBins() << "/" << record.curve->bins.size() << " bins pass";
  }
  return out.str();
}

// 1. Covariate-shift null and runtime.
Outcome CovariateShiftNull() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  auto report = RunManifest(Manifest({Preset(Family::kCovariateShift)}), Threads());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!report.ok()) {
    o.Require(false, std::string(report.status().message()));
    return o;
  }
  const auto cells =
      Cells(*report, "covariate_shift", CovariatePolicy::kAgnostic, "log_loss", ControlVariable::kX);
  o.Require(cells.size() == 2, "two subgroup cells");
  for (const ControlledCell* cell : cells) o.Require(Covers(cell->t_statistic), Describe(*cell));
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "full default audit in %.1f s on %d thread(s) (limit 60 s)",
                seconds, Threads());
  o.Require(seconds <= 60.0, buffer);
  return o;
}

// Shared run over every preset for criteria 2 to 5.
const AuditReport& PresetReport() {
  static const AuditReport* report = [] {
    ExperimentManifest m = Manifest(AllPresets());
    m.metrics = {*ParseMetric("log_loss"), *ParseMetric("sensitivity"),
                 *ParseMetric("specificity")};
    m.controls = {ControlVariable::kX, ControlVariable::kY, ControlVariable::kR};
    auto result = RunManifest(m, Threads());
    if (!result.ok()) {
      std::cerr << "preset audit failed: " << result.status() << '\n';
      std::exit(2);
    }
    return new AuditReport(*std::move(result));
  }();
  return *report;
}

// 2. Outcome-shift alternative.
Outcome OutcomeShiftAlternative() {
  Outcome o;
  const AuditReport& report = PresetReport();
  const auto agnostic =
      Cells(report, "outcome_shift", CovariatePolicy::kAgnostic, "log_loss", ControlVariable::kX);
  bool any = false;
  for (const ControlledCell* cell : agnostic) {
    any = any || Excludes(cell->t_statistic);
    o.detail << "\n    " << Describe(*cell);
  }
  o.Require(agnostic.size() == 2 && any, "agnostic, V=X: some subgroup excludes 0");
  const auto aware =
      Cells(report, "outcome_shift", CovariatePolicy::kAware, "log_loss", ControlVariable::kR);
  o.Require(aware.size() == 2, "aware, V=R: two subgroup cells");
  for (const ControlledCell* cell : aware) o.Require(Covers(cell->t_statistic), Describe(*cell));
  return o;
}

// 3. Label-shift separation.
Outcome LabelShiftSeparation() {
  Outcome o;
  const AuditReport& report = PresetReport();
  bool aware_excludes = false;
  for (std::string_view metric : {"sensitivity", "specificity"}) {
    const auto agnostic =
        Cells(report, "label_shift", CovariatePolicy::kAgnostic, metric, ControlVariable::kY);
    o.Require(agnostic.size() == 2, "agnostic " + std::string(metric) + ": two cells");
    for (const ControlledCell* cell : agnostic) o.Require(Covers(cell->t_statistic), Describe(*cell));
    for (const ControlledCell* cell :
         Cells(report, "label_shift", CovariatePolicy::kAware, metric, ControlVariable::kY)) {
      aware_excludes = aware_excludes || Excludes(cell->t_statistic);
      o.detail << "\n    " << Describe(*cell);
    }
  }
  o.Require(aware_excludes, "aware, V=Y: some sensitivity/specificity cell excludes 0");
  return o;
}

// 4. Subgroup-aware benefit.
Outcome AwareBenefit() {
  Outcome o;
  for (Family family : kAllFamilies) {
    const std::string setting(FamilyName(family));
    const ComparisonRecord* found = nullptr;
    for (const ComparisonRecord& c : PresetReport().comparisons) {
      if (c.setting == setting && c.model_a == CovariatePolicy::kAware &&
          c.model_b == CovariatePolicy::kAgnostic && c.metric.Name() == "log_loss" &&
          c.subgroup == -1) {
        found = &c;
      }
    }
    const bool null_expected =
        family == Family::kCovariateShift || family == Family::kSeparableComplexCausal;
    if (found == nullptr) {
      o.Require(false, setting + ": no comparison");
      continue;
    }
    const bool ok = null_expected ? Covers(found->delta)
                                  : found->delta.defined() && found->delta.interval->upper < 0.0;
    o.Require(ok, setting + " aware - agnostic log loss " + Ci(found->delta) +
                      (null_expected ? " (covers 0)" : " (< 0)"));
  }
  return o;
}

// 5. Calibration.
Outcome Calibration() {
  Outcome o;
  ExperimentManifest oracle = Manifest(AllPresets());
  oracle.oracle_scores = true;
  oracle.policies = {CovariatePolicy::kAware};
  oracle.metrics = {*ParseMetric("log_loss")};
  oracle.controls = {std::nullopt};
  auto oracle_report = RunManifest(oracle, Threads());
  if (!oracle_report.ok()) {
    o.Require(false, std::string(oracle_report.status().message()));
    return o;
  }
  for (const AuditReport* source : {static_cast<const AuditReport*>(&*oracle_report), &PresetReport()}) {
    const std::string label = source == &PresetReport() ? "fitted " : "oracle ";
    int curves = 0;
    for (const CalibrationRecord& record : source->calibration) {
      if (record.policy != CovariatePolicy::kAware) continue;
      ++curves;
      o.Require(record.curve && record.curve->PassingBins() >= 9 && record.curve->bins.size() == 10,
                label + Describe(record));
    }
    o.Require(curves == 14, label + "aware: 14 curves");
  }
  bool agnostic_fails = false;
  for (const CalibrationRecord& record : PresetReport().calibration) {
    if (record.setting != "outcome_shift" || record.policy != CovariatePolicy::kAgnostic) continue;
    agnostic_fails = agnostic_fails || (record.curve && record.curve->FailingBins() >= 2);
    o.detail << "\n    fitted " << Describe(record);
  }
  o.Require(agnostic_fails, "outcome shift agnostic: some subgroup has >= 2 failing bins");
  return o;
}

// 6. Selection suite on the complex causal process.
Outcome SelectionSuite() {
  Outcome o;
  AuditConfig config;
  config.bootstrap.replicates = kReplicates;
  config.bootstrap.threads = Threads();
  config.policies = {CovariatePolicy::kAware};
  config.metrics = {*ParseMetric("log_loss")};
  for (Selection selection : {Selection::kX, Selection::kY, Selection::kYA}) {
    DgpSpec spec = Preset(Family::kComplexCausal);
    spec.selection = selection;
    auto report = SelectionAudit(spec, kTrain, kTest, kSeed, config);
    const std::string name = SettingName(spec);
    if (!report.ok()) {
      o.Require(false, name + ": " + std::string(report.status().message()));
      continue;
    }
    const auto cells = Cells(*report, name, CovariatePolicy::kAware, "log_loss", ControlVariable::kR);
    bool all_cover = cells.size() == 2, any_excludes = false;
    for (const ControlledCell* cell : cells) {
      all_cover = all_cover && Covers(cell->t_statistic);
      any_excludes = any_excludes || Excludes(cell->t_statistic);
    }
    bool all_calibrated = true, any_miscalibrated = false;
    for (const CalibrationRecord& record : report->calibration) {
      all_calibrated = all_calibrated && record.curve && record.curve->PassingBins() >= 9;
      any_miscalibrated = any_miscalibrated || (record.curve && record.curve->FailingBins() >= 2);
    }
    std::ostringstream seen;
    for (const ControlledCell* cell : cells) seen << "; " << Describe(*cell);
    for (const CalibrationRecord& record : report->calibration) seen << "; " << Describe(record);
    switch (selection) {
      case Selection::kX:
        o.Require(all_calibrated && report->calibration.size() == 2,
                  name + ": aware calibrated in target" + seen.str());
        break;
      case Selection::kY:
        o.Require(all_cover, name + ": sufficiency holds" + seen.str());
        o.Require(any_miscalibrated, name + ": calibration fails");
        break;
      default:
        o.Require(any_excludes, name + ": sufficiency fails" + seen.str());
        break;
    }
  }
  return o;
}

// 7. Oracle equivalence.
Outcome OracleEquivalence() {
  Outcome o;
  for (Family family : kAllFamilies) {
    const DgpSpec spec = Preset(family);
    auto rows = SampleTrainTest(spec, kTrain, kTest, DeriveSeed(kSeed, 41, static_cast<int>(family)));
    if (!rows.ok()) {
      o.Require(false, std::string(rows.status().message()));
      continue;
    }
    FitConfig fit;
    fit.seed = DeriveSeed(kSeed, 42, static_cast<int>(family));
    auto model = Fit(rows->train, CovariatePolicy::kAware, fit);
    if (!model.ok()) {
      o.Require(false, std::string(model.status().message()));
      continue;
    }
    const std::vector<double> scores = *model->Score(rows->test);
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      total += std::abs(scores[i] - BayesScore(spec, rows->test.x[i], rows->test.a[i],
                                               ScorePolicy::kAware));
    }
    const double mean = total / static_cast<double>(scores.size());
    char buffer[96];
    std::snprintf(buffer, sizeof(buffer), "%s: mean |aware - bayes| = %.5f (limit 0.01)",
                  std::string(FamilyName(family)).c_str(), mean);
    o.Require(mean <= 0.01, buffer);
  }
  return o;
}

// 8. Estimator oracles.
Outcome EstimatorOracles() {
  Outcome o;
  // Weighted metrics under uniform weights against the brute-force reference.
  const CounterRng rng(7, Stream::kLabel);
  std::vector<int> y(1000);
  std::vector<double> r(1000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    r[i] = std::round(rng.Uniform(2 * i) * 100.0) / 100.0;
    y[i] = rng.Uniform(2 * i + 1) < r[i] ? 1 : 0;
  }
  const std::vector<double> uniform(y.size(), 2.5);
  double worst = 0.0;
  for (const MetricId& metric : AllMetrics()) {
    const auto expected = reference::ReferenceMetric(metric.kind, y, r);
    auto got = Evaluate(metric, y, r, uniform);
    if (!expected || !got.ok() || !got->defined()) {
      o.Require(false, metric.Name() + " undefined");
      continue;
    }
    worst = std::max(worst, std::abs(got->value - *expected));
  }
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer), "uniform weights vs reference, max error %.2e (limit 1e-12)",
                worst);
  o.Require(worst <= 1e-12, buffer);

  // Wilson bounds frozen from tests/oracles/derive_oracles.py.
  struct Wilson {
    double k, n, lower, upper;
  };
  double wilson_error = 0.0;
  for (const Wilson& w : {Wilson{0, 10, 0.0, 0.2775328030260577},
                          Wilson{3, 10, 0.10779126655639398, 0.6032218546540291},
                          Wilson{50, 100, 0.40383152963549296, 0.596168470364507}}) {
    const WilsonBounds b = WilsonInterval(w.k, w.n);
    wilson_error = std::max({wilson_error, std::abs(b.lower - w.lower), std::abs(b.upper - w.upper)});
  }
  std::snprintf(buffer, sizeof(buffer), "Wilson vs closed form, max error %.2e (limit 5e-4)",
                wilson_error);
  o.Require(wilson_error <= 5e-4, buffer);

  // Percentile bootstrap coverage for a Bernoulli(0.3) mean.
  constexpr int kSimulations = 200;
  int covered = 0;
  for (int s = 0; s < kSimulations; ++s) {
    const CounterRng draws(DeriveSeed(2026, 1, s), Stream::kLabel);
    std::vector<double> data(200);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = draws.Bernoulli(i, 0.3) ? 1.0 : 0.0;
    BootstrapConfig config;
    config.replicates = kReplicates;
    config.seed = DeriveSeed(2026, 2, s);
    auto ci = BootstrapCi(
        data.size(),
        [&](std::span<const double> counts) {
          double num = 0, den = 0;
          for (std::size_t i = 0; i < counts.size(); ++i) {
            num += counts[i] * data[i];
            den += counts[i];
          }
          MetricResult out;
          out.value = num / den;
          return out;
        },
        config);
    covered += ci.ok() && ci->Covers(0.3);
  }
  const double coverage = static_cast<double>(covered) / kSimulations;
  std::snprintf(buffer, sizeof(buffer), "bootstrap coverage %.3f over %d simulations ([0.92, 0.98])",
                coverage, kSimulations);
  o.Require(coverage >= 0.92 && coverage <= 0.98, buffer);
  return o;
}

// 9. Prediction-table counts.
Outcome TableCounts() {
  Outcome o;
  const std::size_t ci = CountEntries(PredictionSource::kConditionalIndependence);
  const std::size_t stability = CountEntries(PredictionSource::kMetricStability);
  const std::size_t selection = CountEntries(PredictionSource::kSelection);
  o.Require(ci == 6 * 2 * 2, "conditional independence entries: " + std::to_string(ci) + " (24)");
  o.Require(stability == 3 * 4 * 4, "stability entries: " + std::to_string(stability) + " (48)");
  o.Require(selection == 3 * 7 * 3 * 2, "selection entries: " + std::to_string(selection) + " (126)");
  return o;
}

// 10. Thread-count independence of the report.
Outcome Determinism() {
  Outcome o;
  DgpSpec selected = Preset(Family::kLabelShift);
  selected.selection = Selection::kY;
  const ExperimentManifest m = Manifest({Preset(Family::kOutcomeShift), selected});
  std::string documents[2];
  const int threads[2] = {1, 8};
  for (int i = 0; i < 2; ++i) {
    auto report = RunManifest(m, threads[i]);
    if (!report.ok()) {
      o.Require(false, std::string(report.status().message()));
      return o;
    }
    documents[i] = SerializeReport(ReportToJson(*report, RunInfo(m)));
  }
  o.Require(!documents[0].empty() && documents[0] == documents[1],
            "report JSON identical at 1 and 8 threads (" + std::to_string(documents[0].size()) +
                " bytes)");
  return o;
}

int Main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"covariate-shift null", CovariateShiftNull},
      {"outcome-shift alternative", OutcomeShiftAlternative},
      {"label-shift separation", LabelShiftSeparation},
      {"subgroup-aware benefit", AwareBenefit},
      {"calibration", Calibration},
      {"selection suite", SelectionSuite},
      {"oracle equivalence", OracleEquivalence},
      {"estimator oracles", EstimatorOracles},
      {"prediction-table counts", TableCounts},
      {"determinism", Determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome = criteria[i].second();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !outcome.pass;
    std::printf("criterion %2zu %-26s %s  (%.1f s)%s\n", i + 1, criteria[i].first.c_str(),
                outcome.pass ? "PASS" : "FAIL", seconds, outcome.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace causal_eval

int main() { return causal_eval::Main(); }
