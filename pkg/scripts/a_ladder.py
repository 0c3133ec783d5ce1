"""A-ladder on a 2D mesh: stabilization index and uniform-bound verdict.

    python3 scripts/a_ladder.py --p 1.5 --delta 0.01 --n 16 --out results/a_ladder
"""
import argparse
from pathlib import Path

from pdelta import reports
from pdelta.continuation import check_uniform_bounds, run_a_ladder
from pdelta.grid import Mesh
from pdelta.nfunc import PDeltaParams
from pdelta.solver import builtin_load


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=1.5)
    ap.add_argument("--delta", type=float, default=0.01)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--kmax", type=int, default=10, help="schedule is 2^0 .. 2^kmax")
    ap.add_argument("--load", default="smooth")
    ap.add_argument("--out", type=Path, default=Path("results/a_ladder"))
    args = ap.parse_args()

    mesh = Mesh(2, args.n)
    f = builtin_load(mesh, args.load)
    sched = [2.0 ** k for k in range(args.kmax + 1)]
    report = run_a_ladder(mesh, PDeltaParams(args.p, args.delta), f, sched)
    verdict = check_uniform_bounds(report)
    reports.write_csv(args.out / "ladder.csv", "ladder", reports.ladder_rows(report))
    reports.write_json(args.out / "ladder.json", reports.ladder_summary(report, verdict))
    print(f"stabilization index: {report.stabilization_index}")
    print(verdict.table())


if __name__ == "__main__":
    main()
