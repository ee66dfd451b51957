"""Bundled MILP solver CLI: LP file in, solution file and log out.

Runs HiGHS branch-and-cut through scipy in a standalone process so the
adapter layer can treat it exactly like any external solver binary.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from .lpread import LpProblem, parse_lp_file

_STATUS = {0: "Optimal", 1: "Stopped", 2: "Infeasible", 3: "Unbounded", 4: "Error"}


def build_arrays(prob: LpProblem):
    order = list(prob.variable_order)
    index = {name: i for i, name in enumerate(order)}
    n = len(order)
    c = np.zeros(n)
    for name, coef in prob.objective.items():
        c[index[name]] = coef if prob.minimize else -coef
    lo = np.array([prob.bounds[v][0] for v in order])
    hi = np.array([prob.bounds[v][1] for v in order])
    integrality = np.zeros(n)
    for name in prob.binaries | prob.integers:
        integrality[index[name]] = 1

    rows, cols, vals = [], [], []
    c_lo, c_hi = [], []
    for r, (_, coefs, sense, rhs) in enumerate(prob.rows):
        for name, coef in coefs.items():
            rows.append(r)
            cols.append(index[name])
            vals.append(coef)
        if sense == "<=":
            c_lo.append(-np.inf)
            c_hi.append(rhs)
        elif sense == ">=":
            c_lo.append(rhs)
            c_hi.append(np.inf)
        else:
            c_lo.append(rhs)
            c_hi.append(rhs)
    a = sparse.csc_array((vals, (rows, cols)), shape=(len(prob.rows), n))
    return order, c, Bounds(lo, hi), integrality, LinearConstraint(a, c_lo, c_hi)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hens-milp-solve", description=__doc__)
    ap.add_argument("model", help="LP file to solve")
    ap.add_argument("--solution-file", required=True)
    ap.add_argument("--rel-gap", type=float, default=1e-4)
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)

    prob = parse_lp_file(args.model)
    order, c, bounds, integrality, constraint = build_arrays(prob)
    options = {"disp": not args.quiet, "mip_rel_gap": args.rel_gap, "presolve": True}
    if args.time_limit:
        options["time_limit"] = args.time_limit
    res = milp(c, constraints=constraint, integrality=integrality, bounds=bounds, options=options)

    status = _STATUS.get(res.status, "Error")
    lines = [f"Status {status}"]
    objective = float(res.fun) if res.fun is not None else float("nan")
    if not prob.minimize and res.fun is not None:
        objective = -objective
    bound = getattr(res, "mip_dual_bound", None)
    gap = getattr(res, "mip_gap", None)
    lines.append(f"Objective {objective!r}")
    if bound is not None:
        lines.append(f"Bound {float(bound)!r}")
    if gap is not None:
        lines.append(f"Gap {float(gap)!r}")
    if res.x is not None:
        lines.append(f"Columns {len(order)}")
        for name, value in zip(order, res.x):
            lines.append(f"{name} {float(value)!r}")
    Path(args.solution_file).write_text("\n".join(lines) + "\n")
    print(f"backend status: {status}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
