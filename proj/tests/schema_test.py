# Copyright 2026 The causal-eval Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs the audit command and validates report.json against the published schema.

usage: schema_test.py CLI SCHEMA DATA_DIR
"""

import copy
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def audit(cli, manifest, workdir):
    path = workdir / "manifest.json"
    path.write_text(json.dumps(manifest))
    out = workdir / "out"
    done = subprocess.run([cli, "audit", "--manifest", str(path), "--out", str(out), "--threads", "2"],
                          capture_output=True, text=True)
    if done.returncode not in (0, 1):
        sys.exit(f"audit failed ({done.returncode}): {done.stderr}")
    return json.loads((out / "report.json").read_text())


def main():
    cli, schema_path, data_dir = sys.argv[1:4]
    schema = json.loads(pathlib.Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    manifests = [
        {"schema_version": 1,
         "dgp": [{"family": "label_shift"}, {"family": "complex_causal", "selection": "ya"}],
         "n_train": 3000, "n_test": 2000,
         "bootstrap": {"replicates": 200, "ci_level": 0.9}, "seed": 5},
        {"schema_version": 1,
         "external": {"train": str(pathlib.Path(data_dir) / "external_1000.csv"),
                      "covariates": ["income", "age"], "group": "region", "label": "outcome"},
         "weight_scheme": "shared_space",
         "bootstrap": {"replicates": 200, "ci_level": 0.95}, "seed": 1},
    ]
    for i, manifest in enumerate(manifests):
        with tempfile.TemporaryDirectory() as tmp:
            report = audit(cli, manifest, pathlib.Path(tmp))
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for error in errors[:10]:
            print(f"manifest {i}: {list(error.path)}: {error.message}")
        if errors:
            sys.exit(1)
        print(f"manifest {i}: {len(report['cells'])} cells valid")

        broken = copy.deepcopy(report)
        broken["cells"][0]["verdict"] = "maybe"
        if validator.is_valid(broken):
            sys.exit("schema accepted an unknown verdict")


if __name__ == "__main__":
    main()
