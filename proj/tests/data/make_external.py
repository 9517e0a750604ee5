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

"""Writes external_1000.csv: two covariates, a string-coded region and a label."""

import csv
import pathlib

import numpy as np

rng = np.random.default_rng(20261016)
n = 1000
region = np.where(rng.random(n) < 0.4, "north", "south")
shift = np.where(region == "north", 0.5, -0.5)
income = rng.normal(shift, 1.0)
age = rng.normal(0.0, 1.0, n)
logit = 0.8 * income - 0.4 * age + np.where(region == "north", 0.3, 0.0)
outcome = (rng.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(int)

path = pathlib.Path(__file__).with_name("external_1000.csv")
with path.open("w", newline="") as f:
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(["income", "age", "region", "outcome"])
    for row in zip(income, age, region, outcome):
        writer.writerow([f"{row[0]:.6f}", f"{row[1]:.6f}", row[2], int(row[3])])
