#!/usr/bin/env python3
# Copyright 2026 The ebus-dispatch Authors
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

"""Solve an MPS file with scipy's HiGHS bindings and print the objective.

Reads the subset written by `ebus export-mps`: ROWS, COLUMNS with MARKER
lines, RHS and BOUNDS. Prints `optimal <objective>` or `infeasible`.
"""

import argparse
import math
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix


def read_mps(path):
    rows = {}
    senses = []
    obj_row = None
    cols = {}
    integer = []
    entries = []
    cost = {}
    rhs = {}
    lower = {}
    upper = {}
    section = None
    in_int = False
    with open(path) as fh:
        for line in fh:
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            tok = line.split()
            if section == "ROWS":
                kind, name = tok
                if kind == "N":
                    if obj_row is None:
                        obj_row = name
                    continue
                rows[name] = len(senses)
                senses.append(kind)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                col = tok[0]
                if col not in cols:
                    cols[col] = len(cols)
                    integer.append(in_int)
                for r, v in zip(tok[1::2], tok[2::2]):
                    if r == obj_row:
                        cost[cols[col]] = float(v)
                    else:
                        entries.append((rows[r], cols[col], float(v)))
            elif section == "RHS":
                for r, v in zip(tok[1::2], tok[2::2]):
                    if r in rows:
                        rhs[rows[r]] = float(v)
            elif section == "BOUNDS":
                kind, col = tok[0], cols[tok[2]]
                val = float(tok[3]) if len(tok) > 3 else None
                if kind == "UP":
                    upper[col] = val
                elif kind == "LO":
                    lower[col] = val
                elif kind == "FX":
                    lower[col] = upper[col] = val
                elif kind == "FR":
                    lower[col], upper[col] = -math.inf, math.inf
                elif kind == "MI":
                    lower[col] = -math.inf
                elif kind == "PL":
                    upper[col] = math.inf
                elif kind == "BV":
                    lower[col], upper[col] = 0.0, 1.0
                else:
                    raise ValueError(f"unsupported bound type {kind}")
            elif section == "RANGES":
                raise ValueError("RANGES not supported")
    m, n = len(senses), len(cols)
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    if entries:
        r, j, v = zip(*entries)
    else:
        r, j, v = (), (), ()
    a = coo_matrix((v, (r, j)), shape=(m, n)).tocsr()
    lo_row = np.full(m, -np.inf)
    hi_row = np.full(m, np.inf)
    for i, s in enumerate(senses):
        b = rhs.get(i, 0.0)
        if s in ("E", "G"):
            lo_row[i] = b
        if s in ("E", "L"):
            hi_row[i] = b
    lb = np.array([lower.get(j, 0.0) for j in range(n)])
    ub = np.array([upper.get(j, math.inf) for j in range(n)])
    return c, a, lo_row, hi_row, lb, ub, np.array(integer, dtype=int)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("mps")
    ap.add_argument("--relax", action="store_true",
                    help="drop integrality and solve the LP relaxation")
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()
    c, a, lo_row, hi_row, lb, ub, integ = read_mps(args.mps)
    if args.relax:
        integ = np.zeros_like(integ)
    cons = [LinearConstraint(a, lo_row, hi_row)] if a.shape[0] else []
    res = milp(c, constraints=cons, integrality=integ, bounds=Bounds(lb, ub),
               options={"time_limit": args.time_limit,
                        "mip_rel_gap": 1e-9})
    if res.status == 0:
        print(f"optimal {res.fun:.10f}")
    elif res.status == 2:
        print("infeasible")
    else:
        print(f"status {res.status} {res.message}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
