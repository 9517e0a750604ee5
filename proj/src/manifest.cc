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

#include "causal_eval/manifest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"
#include "causal_eval/rng.h"

namespace causal_eval {
namespace {

using nlohmann::json;

constexpr uint32_t kTagSetting = 31;
constexpr uint32_t kTagSplit = 32;
constexpr uint32_t kTagExternalFit = 33;
constexpr uint32_t kTagExternalBootstrap = 34;

absl::Status Invalid(const std::string& message) {
  return absl::InvalidArgumentError(absl::StrCat("manifest: ", message));
}

absl::Status CheckKeys(const json& object, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) return Invalid(absl::StrCat("unknown key '", key, "' in ", where));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<std::string>> StringList(const json& value, const std::string& name) {
  if (!value.is_array()) return Invalid(absl::StrCat("'", name, "' must be a list of strings"));
  std::vector<std::string> out;
  for (const json& item : value) {
    if (!item.is_string()) return Invalid(absl::StrCat("'", name, "' must be a list of strings"));
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

absl::StatusOr<std::vector<DgpSpec>> ParseSettings(const json& value) {
  std::vector<DgpSpec> specs;
  if (value.is_string()) {
    if (value.get<std::string>() == "all") {
      for (Family family : kAllFamilies) specs.push_back(Preset(family));
      return specs;
    }
    auto family = ParseFamily(value.get<std::string>());
    if (!family.ok()) return family.status();
    specs.push_back(Preset(*family));
    return specs;
  }
  const json list = value.is_array() ? value : json::array({value});
  if (list.empty()) return Invalid("'dgp' lists no settings");
  for (const json& item : list) {
    auto spec = item.is_string() ? SpecFromJson({{"family", item}}) : SpecFromJson(item);
    if (!spec.ok()) return Invalid(std::string(spec.status().message()));
    specs.push_back(*spec);
  }
  return specs;
}

absl::StatusOr<ExternalData> ParseExternal(const json& value, const std::string& base_dir) {
  if (!value.is_object()) return Invalid("'external' must be an object");
  if (auto s = CheckKeys(value, {"train", "test", "covariates", "group", "label", "group_order",
                                 "selection", "test_fraction"},
                         "external");
      !s.ok()) {
    return s;
  }
  for (const char* required : {"train", "covariates", "group", "label"}) {
    if (!value.contains(required)) {
      return Invalid(absl::StrCat("external data needs a '", required, "' column mapping entry"));
    }
  }
  ExternalData external;
  if (!value["train"].is_string()) return Invalid("'external.train' must be a path");
  external.train_path = Resolve(value["train"].get<std::string>(), base_dir);
  if (value.contains("test")) {
    if (!value["test"].is_string()) return Invalid("'external.test' must be a path");
    external.test_path = Resolve(value["test"].get<std::string>(), base_dir);
  }
  auto covariates = StringList(value["covariates"], "external.covariates");
  if (!covariates.ok()) return covariates.status();
  if (covariates->empty()) return Invalid("'external.covariates' is empty");
  external.mapping.covariates = *covariates;
  if (!value["group"].is_string() || !value["label"].is_string()) {
    return Invalid("'external.group' and 'external.label' must be column names");
  }
  external.mapping.group = value["group"].get<std::string>();
  external.mapping.label = value["label"].get<std::string>();
  if (value.contains("selection")) {
    if (!value["selection"].is_string()) return Invalid("'external.selection' must be a column");
    external.mapping.selection = value["selection"].get<std::string>();
  }
  if (value.contains("group_order")) {
    auto order = StringList(value["group_order"], "external.group_order");
    if (!order.ok()) return order.status();
    external.mapping.group_order = *order;
  }
  if (value.contains("test_fraction")) {
    if (!value["test_fraction"].is_number()) return Invalid("'test_fraction' must be a number");
    external.test_fraction = value["test_fraction"].get<double>();
    if (!(external.test_fraction > 0.0 && external.test_fraction < 1.0)) {
      return Invalid("'test_fraction' must lie in (0, 1)");
    }
  }
  return external;
}

absl::StatusOr<int64_t> PositiveSize(const json& value, const std::string& name) {
  if (!value.is_number_integer() || value.get<int64_t>() <= 0) {
    return Invalid(absl::StrCat("'", name, "' must be a positive integer"));
  }
  return value.get<int64_t>();
}

}  // namespace

AuditConfig ExperimentManifest::ToAuditConfig(int threads) const {
  AuditConfig config;
  config.policies = policies;
  config.metrics = metrics;
  config.controls = controls;
  config.scheme = scheme;
  config.bootstrap.replicates = replicates;
  config.bootstrap.ci_level = ci_level;
  config.bootstrap.threads = std::max(1, threads);
  config.oracle_scores = oracle_scores;
  return config;
}

absl::StatusOr<ExperimentManifest> ManifestFromJson(const json& value,
                                                    const std::string& base_dir) {
  if (!value.is_object()) return Invalid("top level must be an object");
  if (auto s = CheckKeys(value, {"schema_version", "dgp", "external", "n_train", "n_test",
                                 "policies", "metrics", "control_vars", "weight_scheme",
                                 "bootstrap", "seed", "out", "oracle_scores"},
                         "manifest");
      !s.ok()) {
    return s;
  }
  if (!value.contains("schema_version") || value["schema_version"] != kManifestSchemaVersion) {
    return Invalid(absl::StrCat("'schema_version' must be ", kManifestSchemaVersion));
  }
  ExperimentManifest m;
  if (value.contains("dgp") == value.contains("external")) {
    return Invalid("exactly one of 'dgp' and 'external' is required");
  }
  if (value.contains("dgp")) {
    auto settings = ParseSettings(value["dgp"]);
    if (!settings.ok()) return settings.status();
    m.settings = *std::move(settings);
  } else {
    auto external = ParseExternal(value["external"], base_dir);
    if (!external.ok()) return external.status();
    m.external = *std::move(external);
  }
  if (value.contains("n_train")) {
    auto n = PositiveSize(value["n_train"], "n_train");
    if (!n.ok()) return n.status();
    m.n_train = *n;
  }
  if (value.contains("n_test")) {
    auto n = PositiveSize(value["n_test"], "n_test");
    if (!n.ok()) return n.status();
    m.n_test = *n;
  }
  if (value.contains("policies")) {
    auto names = StringList(value["policies"], "policies");
    if (!names.ok()) return names.status();
    m.policies.clear();
    for (const std::string& name : *names) {
      auto policy = ParsePolicy(name);
      if (!policy.ok()) return Invalid(std::string(policy.status().message()));
      m.policies.push_back(*policy);
    }
  }
  if (value.contains("metrics")) {
    auto names = StringList(value["metrics"], "metrics");
    if (!names.ok()) return names.status();
    m.metrics.clear();
    for (const std::string& name : *names) {
      auto metric = ParseMetric(name);
      if (!metric.ok()) return Invalid(std::string(metric.status().message()));
      m.metrics.push_back(*metric);
    }
  }
  if (value.contains("control_vars")) {
    auto names = StringList(value["control_vars"], "control_vars");
    if (!names.ok()) return names.status();
    m.controls.clear();
    for (const std::string& name : *names) {
      auto control = ParseControl(name);
      if (!control.ok()) return Invalid(std::string(control.status().message()));
      m.controls.push_back(*control);
    }
  }
  if (value.contains("weight_scheme")) {
    if (!value["weight_scheme"].is_string()) return Invalid("'weight_scheme' must be a string");
    auto scheme = ParseWeightScheme(value["weight_scheme"].get<std::string>());
    if (!scheme.ok()) return Invalid(std::string(scheme.status().message()));
    m.scheme = *scheme;
  }
  if (value.contains("bootstrap")) {
    const json& b = value["bootstrap"];
    if (!b.is_object()) return Invalid("'bootstrap' must be an object");
    if (auto s = CheckKeys(b, {"replicates", "ci_level"}, "bootstrap"); !s.ok()) return s;
    if (b.contains("replicates")) {
      if (!b["replicates"].is_number_integer() || b["replicates"].get<int64_t>() < 100) {
        return Invalid("'bootstrap.replicates' must be an integer >= 100");
      }
      m.replicates = b["replicates"].get<int>();
    }
    if (b.contains("ci_level")) {
      if (!b["ci_level"].is_number()) return Invalid("'bootstrap.ci_level' must be a number");
      m.ci_level = b["ci_level"].get<double>();
      if (!(m.ci_level > 0.0 && m.ci_level < 1.0)) return Invalid("'ci_level' must lie in (0, 1)");
    }
  }
  if (value.contains("seed")) {
    if (!value["seed"].is_number_unsigned()) return Invalid("'seed' must be a non-negative integer");
    m.seed = value["seed"].get<uint64_t>();
  }
  if (value.contains("out")) {
    if (!value["out"].is_string()) return Invalid("'out' must be a path");
    m.out = value["out"].get<std::string>();
  }
  if (value.contains("oracle_scores")) {
    if (!value["oracle_scores"].is_boolean()) return Invalid("'oracle_scores' must be a boolean");
    m.oracle_scores = value["oracle_scores"].get<bool>();
    if (m.oracle_scores && m.external) return Invalid("oracle scores need synthetic settings");
  }
  return m;
}

absl::StatusOr<ExperimentManifest> ReadManifestFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open manifest ", path));
  json value = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) return Invalid(absl::StrCat(path, " is not valid JSON"));
  return ManifestFromJson(value, std::filesystem::path(path).parent_path().string());
}

json ManifestToJson(const ExperimentManifest& m) {
  json value = {{"schema_version", kManifestSchemaVersion},
                {"n_train", m.n_train},
                {"n_test", m.n_test},
                {"seed", m.seed},
                {"out", m.out},
                {"oracle_scores", m.oracle_scores},
                {"weight_scheme", m.scheme.Name()},
                {"bootstrap", {{"replicates", m.replicates}, {"ci_level", m.ci_level}}}};
  json policies = json::array(), metrics = json::array(), controls = json::array();
  for (CovariatePolicy p : m.policies) policies.push_back(std::string(PolicyName(p)));
  for (const MetricId& metric : m.metrics) metrics.push_back(metric.Name());
  for (const auto& control : m.controls) controls.push_back(ControlName(control));
  value["policies"] = std::move(policies);
  value["metrics"] = std::move(metrics);
  value["control_vars"] = std::move(controls);
  if (m.external) {
    const ExternalData& e = *m.external;
    json external = {{"train", e.train_path},
                     {"covariates", e.mapping.covariates},
                     {"group", e.mapping.group},
                     {"label", e.mapping.label},
                     {"test_fraction", e.test_fraction}};
    if (e.test_path) external["test"] = *e.test_path;
    if (!e.mapping.selection.empty()) external["selection"] = e.mapping.selection;
    if (!e.mapping.group_order.empty()) external["group_order"] = e.mapping.group_order;
    value["external"] = std::move(external);
  } else {
    json dgp = json::array();
    for (const DgpSpec& spec : m.settings) dgp.push_back(SpecToJson(spec));
    value["dgp"] = std::move(dgp);
  }
  return value;
}

uint64_t SettingSeed(uint64_t seed, std::size_t index) {
  return DeriveSeed(seed, kTagSetting, static_cast<uint32_t>(index));
}

absl::StatusOr<ExternalSplit> LoadExternal(const ExternalData& external, uint64_t seed) {
  auto train = ReadCsvFile(external.train_path, external.mapping);
  if (!train.ok()) return train.status();
  ExternalSplit split;
  if (external.test_path) {
    // Code the test groups exactly as the training groups.
    ColumnMapping mapping = external.mapping;
    mapping.group_order = train->group_labels;
    auto test = ReadCsvFile(*external.test_path, mapping);
    if (!test.ok()) return test.status();
    split.train = *std::move(train);
    split.test = *std::move(test);
    return split;
  }
  const std::size_t n = train->size();
  const auto n_test = static_cast<std::size_t>(std::llround(external.test_fraction * n));
  if (n_test == 0 || n_test >= n) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot split ", n, " rows with test fraction ", external.test_fraction));
  }
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Shuffle(rows, CounterRng(DeriveSeed(seed, kTagSplit), Stream::kFolds));
  std::vector<std::size_t> test_rows(rows.begin(), rows.begin() + n_test);
  std::vector<std::size_t> train_rows(rows.begin() + n_test, rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  split.test = train->Subset(test_rows);
  split.train = train->Subset(train_rows);
  return split;
}

absl::StatusOr<AuditReport> RunManifest(const ExperimentManifest& manifest, int threads) {
  const AuditConfig config = manifest.ToAuditConfig(threads);
  AuditReport report;
  if (manifest.external) {
    auto split = LoadExternal(*manifest.external, manifest.seed);
    if (!split.ok()) return split.status();
    AuditConfig derived = config;
    derived.fit.seed = DeriveSeed(manifest.seed, kTagExternalFit);
    derived.bootstrap.seed = DeriveSeed(manifest.seed, kTagExternalBootstrap);
    auto part = AuditDatasets("external", split->train, split->test, std::nullopt, derived);
    if (!part.ok()) return part.status();
    for (SettingRecord& s : part->settings) {
      s.seed = manifest.seed;
      s.source = {{"external", ManifestToJson(manifest)["external"]}};
    }
    report.Merge(*std::move(part));
  } else {
    for (std::size_t i = 0; i < manifest.settings.size(); ++i) {
      auto part = AuditSynthetic(manifest.settings[i], manifest.n_train, manifest.n_test,
                                 SettingSeed(manifest.seed, i), config);
      if (!part.ok()) return part.status();
      report.Merge(*std::move(part));
    }
  }
  report.Finalize();
  return report;
}

json RunInfo(const ExperimentManifest& manifest) {
  return {{"seed", manifest.seed},
          {"replicates", manifest.replicates},
          {"ci_level", manifest.ci_level},
          {"n_train", manifest.n_train},
          {"n_test", manifest.n_test},
          {"weight_scheme", manifest.scheme.Name()},
          {"oracle_scores", manifest.oracle_scores}};
}

}  // namespace causal_eval
