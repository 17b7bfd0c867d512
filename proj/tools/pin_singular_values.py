#!/usr/bin/env python3
# Copyright 2026 The qdea Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Pins singular values of an exported history with numpy.

Usage: pin_singular_values.py HISTORY_CSV OUTPUT_JSON
"""

import csv
import json
import sys

import numpy as np


def main() -> None:
    src, dst = sys.argv[1], sys.argv[2]
    with open(src, newline="") as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
    x = np.array([[float(v) for v in r[2:]] for r in rows[1:]])
    sigma = np.linalg.svd(x, compute_uv=False)
    energy = np.cumsum(sigma**2) / np.sum(sigma**2)
    out = {
        "source": "seven_node_sis analysis window, 1028 columns",
        "shape": list(x.shape),
        "singular_values": [float(s) for s in sigma[:10]],
        "rank_for_energy_0.9999": int(np.searchsorted(energy, 0.9999) + 1),
        "energy_at_rank_10": float(energy[min(9, len(energy) - 1)]),
    }
    with open(dst, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
