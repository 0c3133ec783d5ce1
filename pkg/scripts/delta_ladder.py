"""delta-ladder with a fixed or inverse A policy; reports growth flags.

    python3 scripts/delta_ladder.py --p 1.5 --policy inverse --value 4 --out results/delta_ladder
"""
import argparse
from pathlib import Path

import numpy as np

from pdelta import reports
from pdelta.continuation import run_delta_ladder
from pdelta.grid import Mesh
from pdelta.solver import builtin_load


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=1.5)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--deltas", type=float, nargs="+",
                    default=list(np.logspace(0, -4, 9)))
    ap.add_argument("--policy", choices=("fixed", "inverse"), default="fixed")
    ap.add_argument("--value", type=float, default=1e6)
    ap.add_argument("--out", type=Path, default=Path("results/delta_ladder"))
    args = ap.parse_args()

    mesh = Mesh(2, args.n)
    f = builtin_load(mesh, "smooth")
    report = run_delta_ladder(mesh, args.p, f, args.deltas, (args.policy, args.value))
    reports.write_csv(args.out / "ladder.csv", "ladder", reports.ladder_rows(report))
    reports.write_json(args.out / "ladder.json", reports.ladder_summary(report))
    for d, diag in zip(report.schedule, report.diagnostics):
        print(f"delta={d:<10.3g} F_sq={diag.F_sq:<12.6g} Du_p={diag.Du_p:<12.6g} "
              f"dual_force={diag.dual_force:.6g}")
    for flag in report.growth_flags or ["no growth flags"]:
        print(flag)


if __name__ == "__main__":
    main()
