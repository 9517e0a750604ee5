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

// Audit report serialization, plot-data CSVs and the text summary.
//
// The JSON layout is published in docs/audit_report.schema.json. Undefined
// estimates are objects with an `undefined_reason` instead of numbers, so the
// document never contains NaN. Everything downstream of the JSON (CSVs and the
// summary) is rendered from the JSON itself, so `report` reproduces exactly
// what `audit` wrote.

#ifndef CAUSAL_EVAL_REPORT_H_
#define CAUSAL_EVAL_REPORT_H_

#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "causal_eval/audit.h"
#include "json.hpp"

namespace causal_eval {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr char kReportFormat[] = "causal_eval.audit_report";

// `run` records the run parameters (seed, replicates, ...). It must not hold
// anything that varies with the thread count.
nlohmann::json ReportToJson(const AuditReport& report, const nlohmann::json& run);

// Two-space indented dump with a trailing newline.
std::string SerializeReport(const nlohmann::json& report);

// Structural check of a parsed report: format tag, schema version, required
// sections and field types.
absl::Status ValidateReportJson(const nlohmann::json& report);

// One row per controlled cell, laid out for plotting: one panel row per
// policy, one column per setting, one series per subgroup x control.
void WriteControlledCsv(const nlohmann::json& report, std::ostream& out);
// One row per calibration bin.
void WriteCalibrationCsv(const nlohmann::json& report, std::ostream& out);
// One row per model-comparison delta.
void WriteComparisonCsv(const nlohmann::json& report, std::ostream& out);

// Writes controlled.csv, calibration.csv and comparison.csv into `dir`.
absl::Status WriteFigureCsvs(const nlohmann::json& report, const std::string& dir);

// Text table of the controlled cells followed by verdict counts. An empty
// report renders the header and zero counts only.
void RenderSummary(const nlohmann::json& report, std::ostream& out);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_REPORT_H_
