"""Parameter ladders in the threshold A and the regularization delta."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, SolverError
from .grid import Diagnostics, Field, Mesh
from .nfunc import PDeltaParams
from .operator import build_a_approx
from .solver import SolverOptions, solve_steady

log = logging.getLogger(__name__)

UNIFORM_QUANTITIES = ("F_A_sq", "F_sq", "grad_F_sq", "grad_F_A_sq")
GROWTH_QUANTITIES = ("F_sq", "grad_F_sq", "Du_p")


@dataclass
class StepSummary:
    value: float            # A or delta of this step
    A: float
    delta: float
    newton_iters: int
    final_gradient_norm: float
    energy: float
    energy_decrements: List[float]


@dataclass
class LadderReport:
    kind: str                                   # "A" or "delta"
    schedule: List[float]
    diagnostics: List[Diagnostics]
    steps: List[StepSummary]
    consecutive_delta: List[float]
    stabilization_index: Optional[int] = None
    growth_flags: List[str] = field(default_factory=list)
    solutions: List[Field] = field(default_factory=list, repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(d, name) for d in self.diagnostics])


def _strictly(seq, increasing):
    d = np.diff(np.asarray(seq, dtype=float))
    return bool(np.all(d > 0) if increasing else np.all(d < 0))


def run_a_ladder(mesh: Mesh, params: PDeltaParams, f: Field,
                 A_schedule: Sequence[float] = tuple(2.0 ** k for k in range(11)),
                 opts: SolverOptions = None, stabilization_tol: float = 1e-8,
                 warm_start: bool = True, keep_solutions: bool = False) -> LadderReport:
    """Solve for every A of an increasing schedule.

    Once the solution of step k has max |Du| <= A_k it also solves every later
    problem, since S^A and S coincide below the threshold; the stabilization
    index records the first such step after which the solutions stop moving.
    """
    params.require_solver_delta()
    sched = [float(a) for a in A_schedule]
    if not sched or not _strictly(sched, True) or sched[0] < 1.0:
        raise DomainError("A schedule must be strictly increasing with min >= 1")
    return _run(mesh, f, "A", sched,
                [build_a_approx(params, A) for A in sched],
                opts, warm_start, keep_solutions, stabilization_tol)


def run_delta_ladder(mesh: Mesh, p: float, f: Field, delta_schedule: Sequence[float],
                     A_policy=("fixed", 1e6), opts: SolverOptions = None,
                     growth_tol: float = 10.0, warm_start: bool = True,
                     dim: Optional[int] = None, keep_solutions: bool = False) -> LadderReport:
    """Solve for every delta of a decreasing schedule.

    ``A_policy`` is ``("fixed", A)`` or ``("inverse", c)`` for A = max(1, c/delta).
    Quantities in GROWTH_QUANTITIES that grow by more than ``growth_tol``
    between consecutive steps are flagged.
    """
    sched = [float(d) for d in delta_schedule]
    if not sched or not _strictly(sched, False):
        raise DomainError("delta schedule must be strictly decreasing")
    kind, val = A_policy
    if kind == "fixed":
        As = [float(val)] * len(sched)
    elif kind == "inverse":
        As = [max(1.0, float(val) / d) for d in sched]
    else:
        raise DomainError(f"unknown A policy {kind!r}")
    dim = dim or mesh.dim
    aps = [build_a_approx(PDeltaParams(p, d, dim).require_solver_delta(), A)
           for d, A in zip(sched, As)]
    report = _run(mesh, f, "delta", sched, aps, opts, warm_start, keep_solutions, None)
    for k in range(1, len(report.diagnostics)):
        for name in GROWTH_QUANTITIES:
            prev = getattr(report.diagnostics[k - 1], name)
            cur = getattr(report.diagnostics[k], name)
            if not np.isfinite(cur) or (prev > 0 and cur > growth_tol * prev):
                report.growth_flags.append(
                    f"{name} grew from {prev:.6g} to {cur:.6g} at delta={sched[k]:g}")
    return report


def _run(mesh, f, kind, sched, aps, opts, warm_start, keep, stab_tol):
    opts = opts or SolverOptions()
    diags, steps, sols = [], [], []
    prev = None
    for value, ap in zip(sched, aps):
        try:
            sol = solve_steady(mesh, ap, f, opts, u0=prev if warm_start else None)
        except SolverError as exc:
            raise exc.tagged(f"{kind}={value:g}") from exc
        log.info("%s=%g: %d Newton steps, max|Du|=%.4g", kind, value,
                 sol.newton_iters, sol.diagnostics.max_Du)
        diags.append(sol.diagnostics)
        steps.append(StepSummary(value, ap.A, ap.params.delta, sol.newton_iters,
                                 sol.final_gradient_norm, sol.energy_history[-1],
                                 list(sol.energy_decrements)))
        sols.append(sol.u)
        prev = sol.u
    cons = [float(np.max(np.abs(b.values - a.values))) for a, b in zip(sols, sols[1:])]
    report = LadderReport(kind, list(sched), diags, steps, cons,
                          solutions=sols if keep else [])
    if stab_tol is not None:
        for k in range(len(sched)):
            if diags[k].max_Du <= sched[k] and all(c <= stab_tol for c in cons[k:]):
                report.stabilization_index = k
                break
    return report


@dataclass
class UniformVerdict:
    ratio_tol: float
    first_step: int
    ratios: dict
    passed: dict

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def table(self) -> str:
        lines = [f"{'quantity':<14}{'max/min':>14}  verdict",
                 "-" * 36]
        for name in self.ratios:
            verdict = "PASS" if self.passed[name] else "FAIL"
            lines.append(f"{name:<14}{self.ratios[name]:>14.6f}  {verdict}")
        return "\n".join(lines)


def check_uniform_bounds(report: LadderReport, ratio_tol: float = 2.0,
                         quantities: Sequence[str] = UNIFORM_QUANTITIES) -> UniformVerdict:
    """max/min of each quantity over the post-stabilization steps.

    Ladders without a stabilization index are judged over all steps.
    """
    if len(report.diagnostics) < 3:
        raise DomainError("uniform-bound check needs at least 3 ladder steps")
    start = report.stabilization_index or 0
    ratios, passed = {}, {}
    for name in quantities:
        vals = report.column(name)[start:]
        lo, hi = float(vals.min()), float(vals.max())
        if hi == 0.0:
            r = 1.0
        elif lo <= 0.0:
            r = float("inf")
        else:
            r = hi / lo
        ratios[name] = r
        passed[name] = bool(r <= ratio_tol)
    return UniformVerdict(ratio_tol, start, ratios, passed)
