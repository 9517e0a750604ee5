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

#include "commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "absl/strings/str_cat.h"
#include "causal_eval/audit.h"
#include "causal_eval/manifest.h"
#include "causal_eval/report.h"
#include "json.hpp"

namespace causal_eval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

absl::StatusOr<ExperimentManifest> LoadManifest(const CommandOptions& options) {
  if (options.manifest.empty()) return absl::InvalidArgumentError("--manifest is required");
  auto manifest = ReadManifestFile(options.manifest);
  if (!manifest.ok()) return manifest.status();
  if (options.out) manifest->out = *options.out;
  if (options.seed) manifest->seed = *options.seed;
  if (options.replicates) {
    if (*options.replicates < 100) {
      return absl::InvalidArgumentError("--replicates must be at least 100");
    }
    manifest->replicates = *options.replicates;
  }
  return manifest;
}

absl::Status WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::InternalError(absl::StrCat("cannot write ", path.string()));
  out << text;
  out.close();
  if (!out) return absl::InternalError(absl::StrCat("write failed: ", path.string()));
  return absl::OkStatus();
}

absl::Status MakeDirectory(const fs::path& dir) {
  std::error_code error;
  fs::create_directories(dir, error);
  if (error) {
    return absl::InternalError(absl::StrCat("cannot create ", dir.string(), ": ", error.message()));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status Simulate(const CommandOptions& options, std::ostream& log) {
  auto manifest = LoadManifest(options);
  if (!manifest.ok()) return manifest.status();
  if (manifest->external) {
    return absl::InvalidArgumentError("simulate needs synthetic settings ('dgp'), not external data");
  }
  for (std::size_t i = 0; i < manifest->settings.size(); ++i) {
    const DgpSpec& spec = manifest->settings[i];
    const uint64_t seed = SettingSeed(manifest->seed, i);
    auto rows = SampleTrainTest(spec, manifest->n_train, manifest->n_test, seed);
    if (!rows.ok()) {
      return absl::Status(rows.status().code(), absl::StrCat("setting ", SettingName(spec), ": ",
                                                             rows.status().message()));
    }
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "%02zu_", i);
    const fs::path dir = fs::path(manifest->out) / (prefix + SettingName(spec));
    if (auto s = MakeDirectory(dir); !s.ok()) return s;
    if (auto s = WriteCsvFile(rows->train, (dir / "train.csv").string()); !s.ok()) return s;
    if (auto s = WriteCsvFile(rows->test, (dir / "test.csv").string()); !s.ok()) return s;
    const json sidecar = {{"format", "causal_eval.simulated_dataset"},
                          {"schema_version", 1},
                          {"setting", SettingName(spec)},
                          {"index", i},
                          {"dgp", SpecToJson(spec)},
                          {"manifest_seed", manifest->seed},
                          {"seed", seed},
                          {"n_train", rows->train.size()},
                          {"n_test", rows->test.size()},
                          {"train_selected", spec.selection != Selection::kNone}};
    if (auto s = WriteText(dir / "dataset.json", sidecar.dump(2) + "\n"); !s.ok()) return s;
    log << "wrote " << dir.string() << " (" << rows->train.size() << " train, "
        << rows->test.size() << " test rows)\n";
  }
  return absl::OkStatus();
}

absl::StatusOr<int> Audit(const CommandOptions& options, std::ostream& log) {
  auto manifest = LoadManifest(options);
  if (!manifest.ok()) return manifest.status();
  auto report = RunManifest(*manifest, options.threads);
  if (!report.ok()) return report.status();
  const json document = ReportToJson(*report, RunInfo(*manifest));
  const fs::path out(manifest->out);
  if (auto s = MakeDirectory(out); !s.ok()) return s;
  if (auto s = WriteText(out / "report.json", SerializeReport(document)); !s.ok()) return s;
  if (auto s = WriteText(out / "manifest.json", ManifestToJson(*manifest).dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  if (auto s = WriteFigureCsvs(document, out.string()); !s.ok()) return s;
  for (const SettingRecord& setting : report->settings) {
    for (const std::string& error : setting.errors) {
      log << "warning: " << setting.name << ": " << error << '\n';
    }
  }
  const int violations = report->HoldsViolations();
  log << "audited " << report->settings.size() << " setting(s), " << report->cells.size()
      << " controlled cells; holds-predicted cells found inconsistent: " << violations << '\n'
      << "report: " << (out / "report.json").string() << '\n';
  return violations;
}

absl::Status Report(const std::string& report_path, const std::optional<std::string>& out_dir,
                    std::ostream& out) {
  std::ifstream in(report_path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open report ", report_path));
  const json document = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (document.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(report_path, " is not valid JSON"));
  }
  if (auto s = ValidateReportJson(document); !s.ok()) return s;
  RenderSummary(document, out);
  if (out_dir) return WriteFigureCsvs(document, *out_dir);
  return absl::OkStatus();
}

}  // namespace causal_eval
