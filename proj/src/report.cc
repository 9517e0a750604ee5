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

#include "causal_eval/report.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "absl/strings/str_cat.h"

namespace causal_eval {
namespace {

using nlohmann::json;

json EstimateToJson(const CellEstimate& cell) {
  if (!cell.interval) return {{"undefined_reason", cell.undefined_reason}};
  const IntervalEstimate& e = *cell.interval;
  return {{"point", e.point},
          {"lower", e.lower},
          {"upper", e.upper},
          {"replicates", e.replicates},
          {"undefined_replicates", e.undefined_replicates}};
}

json MetricToJson(const MetricId& metric) {
  json value = {{"name", metric.Name()}};
  if (metric.thresholded()) value["threshold"] = metric.threshold;
  if (metric.kind == MetricKind::kNetBenefit) value["preference"] = metric.preference;
  return value;
}

json PredictionOrNull(const std::optional<Prediction>& prediction) {
  return prediction ? prediction->ToJson() : json(nullptr);
}

json CellToJson(const ControlledCell& c) {
  json value = {
      {"key", c.Key()},
      {"setting", c.setting},
      {"policy", std::string(PolicyName(c.policy))},
      {"metric", MetricToJson(c.metric)},
      {"subgroup", c.subgroup},
      {"subgroup_label", c.subgroup_label},
      {"control", ControlName(c.control)},
      {"scheme", c.scheme.Name()},
      {"reference", EstimateToJson(c.reference)},
      {"weighted", EstimateToJson(c.weighted)},
      {"t_statistic", EstimateToJson(c.t_statistic)},
      {"diagnostics",
       {{"effective_sample_size", c.diagnostics.effective_sample_size},
        {"max_weight_share", c.diagnostics.max_weight_share}}},
      {"prediction", PredictionOrNull(c.prediction)},
      {"verdict", std::string(VerdictName(c.verdict))},
  };
  if (c.other_subgroup >= 0) {
    value["other_subgroup"] = c.other_subgroup;
    value["other_label"] = c.other_label;
  }
  return value;
}

json CalibrationToJson(const CalibrationRecord& record) {
  json value = {
      {"key", record.Key()},
      {"setting", record.setting},
      {"policy", std::string(PolicyName(record.policy))},
      {"subgroup", record.subgroup},
      {"subgroup_label", record.subgroup_label},
      {"prediction", PredictionOrNull(record.prediction)},
      {"verdict", std::string(VerdictName(record.verdict))},
  };
  if (record.curve) {
    json bins = json::array();
    for (const CalibrationBin& bin : record.curve->bins) {
      bins.push_back({{"count", bin.count},
                      {"mean_score", bin.mean_score},
                      {"mean_outcome", bin.mean_outcome},
                      {"wilson_lower", bin.wilson_lower},
                      {"wilson_upper", bin.wilson_upper},
                      {"covers", bin.covers()}});
    }
    value["curve"] = {{"requested_bins", record.curve->requested_bins},
                      {"merged", record.curve->merged},
                      {"passing_bins", record.curve->PassingBins()},
                      {"failing_bins", record.curve->FailingBins()},
                      {"calibrated", record.curve->Calibrated()},
                      {"bins", std::move(bins)}};
  } else {
    value["curve"] = nullptr;
    value["error"] = record.error;
  }
  return value;
}

json ComparisonToJson(const ComparisonRecord& record) {
  return {{"key", record.Key()},
          {"setting", record.setting},
          {"model_a", std::string(PolicyName(record.model_a))},
          {"model_b", std::string(PolicyName(record.model_b))},
          {"metric", MetricToJson(record.metric)},
          {"subgroup", record.subgroup},
          {"subgroup_label", record.subgroup_label},
          {"delta", EstimateToJson(record.delta)}};
}

std::string Number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// CSV field, quoted when it holds a separator, quote or newline.
std::string Field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

// point, lower, upper; blank when undefined.
std::string EstimateFields(const json& estimate) {
  if (!estimate.contains("point")) return ",,";
  return absl::StrCat(Number(estimate["point"]), ",", Number(estimate["lower"]), ",",
                      Number(estimate["upper"]));
}

std::string Expected(const json& prediction) {
  return prediction.is_null() ? "none" : prediction["expected"].get<std::string>();
}

absl::Status Expect(bool condition, const std::string& what) {
  return condition ? absl::OkStatus()
                   : absl::InvalidArgumentError(absl::StrCat("invalid report: ", what));
}

bool IsVerdict(const json& value) {
  if (!value.is_string()) return false;
  const std::string name = value;
  return name == "consistent" || name == "inconsistent" || name == "inconclusive";
}

bool IsEstimate(const json& value) {
  if (!value.is_object()) return false;
  if (value.contains("undefined_reason")) return value["undefined_reason"].is_string();
  for (const char* field : {"point", "lower", "upper"}) {
    if (!value.contains(field) || !value[field].is_number()) return false;
  }
  return value.contains("replicates") && value["replicates"].is_number_integer();
}

}  // namespace

json ReportToJson(const AuditReport& report, const json& run) {
  json settings = json::array();
  for (const SettingRecord& s : report.settings) {
    settings.push_back({{"name", s.name},
                        {"source", s.source.is_null() ? json::object() : s.source},
                        {"seed", s.seed},
                        {"n_train", s.n_train},
                        {"n_test", s.n_test},
                        {"group_labels", s.group_labels},
                        {"errors", s.errors}});
  }
  json models = json::array();
  for (const ModelRecord& m : report.models) {
    models.push_back({{"setting", m.setting},
                      {"policy", std::string(PolicyName(m.policy))},
                      {"oracle", m.oracle},
                      {"l2", m.l2},
                      {"test_log_loss", m.test_log_loss}});
  }
  json cells = json::array();
  for (const ControlledCell& c : report.cells) cells.push_back(CellToJson(c));
  json calibration = json::array();
  for (const CalibrationRecord& r : report.calibration) calibration.push_back(CalibrationToJson(r));
  json comparisons = json::array();
  for (const ComparisonRecord& r : report.comparisons) comparisons.push_back(ComparisonToJson(r));
  return {{"format", kReportFormat},
          {"schema_version", kReportSchemaVersion},
          {"run", run.is_null() ? json::object() : run},
          {"settings", std::move(settings)},
          {"models", std::move(models)},
          {"cells", std::move(cells)},
          {"calibration", std::move(calibration)},
          {"comparisons", std::move(comparisons)},
          {"holds_violations", report.HoldsViolations()}};
}

std::string SerializeReport(const json& report) { return report.dump(2) + "\n"; }

absl::Status ValidateReportJson(const json& report) {
  if (auto s = Expect(report.is_object(), "not an object"); !s.ok()) return s;
  if (auto s = Expect(report.value("format", "") == kReportFormat, "wrong format tag"); !s.ok()) {
    return s;
  }
  if (!report.contains("schema_version") || report["schema_version"] != kReportSchemaVersion) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid report: schema_version must be ", kReportSchemaVersion));
  }
  for (const char* section : {"settings", "models", "cells", "calibration", "comparisons"}) {
    if (auto s = Expect(report.contains(section) && report[section].is_array(),
                        absl::StrCat("missing section '", section, "'"));
        !s.ok()) {
      return s;
    }
  }
  for (std::size_t i = 0; i < report["cells"].size(); ++i) {
    const json& cell = report["cells"][i];
    const std::string where = absl::StrCat("cells[", i, "]");
    bool ok = cell.is_object() && cell.contains("key") && cell["key"].is_string() &&
              cell.contains("metric") && cell["metric"].contains("name") &&
              cell.contains("control") && cell.contains("subgroup_label") &&
              cell.contains("prediction") && IsVerdict(cell.value("verdict", json()));
    for (const char* field : {"reference", "weighted", "t_statistic"}) {
      ok = ok && cell.contains(field) && IsEstimate(cell[field]);
    }
    if (auto s = Expect(ok, where); !s.ok()) return s;
  }
  for (std::size_t i = 0; i < report["calibration"].size(); ++i) {
    const json& record = report["calibration"][i];
    const bool ok = record.is_object() && record.contains("curve") &&
                    (record["curve"].is_null() ||
                     (record["curve"].contains("bins") && record["curve"]["bins"].is_array())) &&
                    IsVerdict(record.value("verdict", json()));
    if (auto s = Expect(ok, absl::StrCat("calibration[", i, "]")); !s.ok()) return s;
  }
  for (std::size_t i = 0; i < report["comparisons"].size(); ++i) {
    const json& record = report["comparisons"][i];
    const bool ok = record.is_object() && record.contains("delta") && IsEstimate(record["delta"]);
    if (auto s = Expect(ok, absl::StrCat("comparisons[", i, "]")); !s.ok()) return s;
  }
  return absl::OkStatus();
}

void WriteControlledCsv(const json& report, std::ostream& out) {
  out << "setting,policy,metric,control,scheme,subgroup,series,reference,reference_lower,"
         "reference_upper,weighted,weighted_lower,weighted_upper,t,t_lower,t_upper,"
         "effective_sample_size,expected,verdict\n";
  for (const json& c : report["cells"]) {
    const std::string label = c["subgroup_label"];
    const std::string control = c["control"];
    out << Field(c["setting"]) << ',' << c["policy"].get<std::string>() << ','
        << c["metric"]["name"].get<std::string>() << ',' << control << ','
        << c["scheme"].get<std::string>() << ',' << Field(label) << ','
        << Field(absl::StrCat(label, " | V=", control)) << ',' << EstimateFields(c["reference"])
        << ',' << EstimateFields(c["weighted"]) << ',' << EstimateFields(c["t_statistic"]) << ','
        << Number(c["diagnostics"]["effective_sample_size"]) << ',' << Expected(c["prediction"])
        << ',' << c["verdict"].get<std::string>() << '\n';
  }
}

void WriteCalibrationCsv(const json& report, std::ostream& out) {
  out << "setting,policy,subgroup,bin,count,mean_score,mean_outcome,wilson_lower,wilson_upper,"
         "covers\n";
  for (const json& r : report["calibration"]) {
    if (r["curve"].is_null()) continue;
    int index = 0;
    for (const json& bin : r["curve"]["bins"]) {
      out << Field(r["setting"]) << ',' << r["policy"].get<std::string>() << ','
          << Field(r["subgroup_label"]) << ',' << index++ << ',' << bin["count"].get<uint64_t>()
          << ',' << Number(bin["mean_score"]) << ',' << Number(bin["mean_outcome"]) << ','
          << Number(bin["wilson_lower"]) << ',' << Number(bin["wilson_upper"]) << ','
          << (bin["covers"].get<bool>() ? 1 : 0) << '\n';
    }
  }
}

void WriteComparisonCsv(const json& report, std::ostream& out) {
  out << "setting,model_a,model_b,metric,subgroup,delta,delta_lower,delta_upper\n";
  for (const json& r : report["comparisons"]) {
    out << Field(r["setting"]) << ',' << r["model_a"].get<std::string>() << ','
        << r["model_b"].get<std::string>() << ',' << r["metric"]["name"].get<std::string>() << ','
        << Field(r["subgroup_label"]) << ',' << EstimateFields(r["delta"]) << '\n';
  }
}

absl::Status WriteFigureCsvs(const json& report, const std::string& dir) {
  std::error_code error;
  std::filesystem::create_directories(dir, error);
  if (error) return absl::InternalError(absl::StrCat("cannot create ", dir, ": ", error.message()));
  const std::pair<const char*, void (*)(const json&, std::ostream&)> files[] = {
      {"controlled.csv", WriteControlledCsv},
      {"calibration.csv", WriteCalibrationCsv},
      {"comparison.csv", WriteComparisonCsv},
  };
  for (const auto& [name, write] : files) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) return absl::InternalError(absl::StrCat("cannot write ", path));
    write(report, out);
    if (!out) return absl::InternalError(absl::StrCat("write failed: ", path));
  }
  return absl::OkStatus();
}

void RenderSummary(const json& report, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-34s %-10s %-20s %-4s %-8s %12s %26s %-6s %s\n", "setting",
                "policy", "metric", "V", "subgroup", "T", "interval", "expect", "verdict");
  out << line;
  std::map<std::string, int> counts = {{"consistent", 0}, {"inconsistent", 0}, {"inconclusive", 0}};
  for (const json& c : report["cells"]) {
    const json& t = c["t_statistic"];
    std::string point = "undefined", interval = "-";
    if (t.contains("point")) {
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "%.5f", t["point"].get<double>());
      point = buffer;
      std::snprintf(buffer, sizeof(buffer), "[%.5f, %.5f]", t["lower"].get<double>(),
                    t["upper"].get<double>());
      interval = buffer;
    }
    const std::string verdict = c["verdict"];
    ++counts[verdict];
    std::snprintf(line, sizeof(line), "%-34s %-10s %-20s %-4s %-8s %12s %26s %-6s %s\n",
                  c["setting"].get<std::string>().c_str(), c["policy"].get<std::string>().c_str(),
                  c["metric"]["name"].get<std::string>().c_str(),
                  c["control"].get<std::string>().c_str(),
                  c["subgroup_label"].get<std::string>().c_str(), point.c_str(), interval.c_str(),
                  Expected(c["prediction"]).c_str(), verdict.c_str());
    out << line;
  }
  out << "\ncells: " << report["cells"].size() << "  consistent: " << counts["consistent"]
      << "  inconsistent: " << counts["inconsistent"]
      << "  inconclusive: " << counts["inconclusive"] << '\n';
  int holds_violations = 0;
  for (const json& c : report["cells"]) {
    if (Expected(c["prediction"]) == "holds" && c["verdict"] == "inconsistent") ++holds_violations;
  }
  out << "holds-predicted cells found inconsistent: " << holds_violations << '\n';
}

}  // namespace causal_eval
