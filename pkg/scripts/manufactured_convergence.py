"""Mesh refinement study for p = 2 against the manufactured sine solutions.

    python3 scripts/manufactured_convergence.py --dim 2 --out results/convergence
"""
import argparse
from pathlib import Path

import numpy as np

from pdelta import reports
from pdelta.grid import Mesh, l2_norm_sq
from pdelta.nfunc import PDeltaParams
from pdelta.operator import build_a_approx
from pdelta.solver import manufactured_load_p2, solve_steady


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, choices=(2, 3), default=2)
    ap.add_argument("--ns", type=int, nargs="+", default=None)
    ap.add_argument("--out", type=Path, default=Path("results/convergence"))
    args = ap.parse_args()
    ns = args.ns or ([8, 16, 32, 64] if args.dim == 2 else [4, 8, 12])
    name = "sine2d" if args.dim == 2 else "sine3d"

    rows = []
    for n in ns:
        mesh = Mesh(args.dim, n)
        exact, f = manufactured_load_p2(mesh, name)
        sol = solve_steady(mesh, build_a_approx(PDeltaParams(2.0, 0.1, args.dim), 1e6), f)
        err = float(np.sqrt(l2_norm_sq(mesh, sol.u.values - exact.values)))
        rows.append({"n": n, "h": mesh.h, "l2_error": err})
    for prev, cur in zip(rows, rows[1:]):
        cur["rate"] = float(np.log(prev["l2_error"] / cur["l2_error"])
                            / np.log(prev["h"] / cur["h"]))
    for r in rows:
        print(f"n={r['n']:<4d} h={r['h']:<10.4g} err={r['l2_error']:<12.4e} "
              f"rate={r.get('rate', float('nan')):.3f}")
    reports.write_json(args.out / "convergence.json", {"dim": args.dim, "rows": rows})


if __name__ == "__main__":
    main()
