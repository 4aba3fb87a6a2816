"""Deviation of each family from its t = 0 fiber on a dyadic grid.

Writes one CSV with the per-t deviation rows of every (group, family) pair
and prints the fitted log-log slopes.

    python3 scripts/convergence_study.py --out convergence.csv
"""
import argparse
import csv

import numpy as np

from qhdef import families as fa
from qhdef import liegroup as lg
from qhdef.axioms import CheckConfig, check_family

ELEMENTS = {"su2": [0.7, 0.3, 0.2], "so3": [0.7, 0.3, 0.2], "t2": [0.7, 0.3], "sl2r": [0.3, 0.2, 0.1]}


def build(kind, m):
    if kind == "double":
        return fa.double_family(m)
    if kind == "conjugacy":
        return fa.conj_family(m, m.matrix(np.array(ELEMENTS[m.name])))
    if kind == "fused-double":
        return fa.fuse_family(fa.double_family(m), (0, 1))
    return fa.moduli_family(m, 1, 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="convergence.csv")
    ap.add_argument("--levels", type=int, default=10, help="grid is 1, 1/2, ..., 2^-levels, 0")
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--groups", default="su2,so3,t2,sl2r")
    args = ap.parse_args()

    grid = [2.0**-k for k in range(args.levels + 1)] + [0.0]
    cfg = CheckConfig(samples=args.samples)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "family", "t", "form_vs_limit", "moment_continuity"])
        for name in args.groups.split(","):
            m = lg.get_model(name)
            for kind in ("double", "conjugacy", "fused-double", "moduli(1,1)"):
                rep = check_family(build(kind, m), grid, cfg)
                by_t = {}
                for row in rep.convergence:
                    by_t.setdefault(row["t"], {})[row["metric"]] = row["max_residual"]
                for t in grid:
                    w.writerow([name, kind, t, by_t[t]["form_vs_limit"], by_t[t]["moment_continuity"]])
                s = rep.slopes["form_vs_limit"]
                label = "exact" if s["exact"] else f"{s['slope']:.3f}"
                print(f"{name:5s} {kind:13s} form slope {label:>7s}  suites {'pass' if rep.passed else 'FAIL'}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
