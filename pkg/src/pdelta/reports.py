"""Deterministic CSV/JSON report writers with all-or-nothing file creation."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Mapping

from .continuation import LadderReport
from .grid import DIAGNOSTIC_NAMES
from .parabolic import ParabolicRun


@lru_cache(maxsize=None)
def csv_schema() -> dict:
    """The shipped column schema (src/pdelta/data/csv_schema.json)."""
    text = resources.files("pdelta").joinpath("data/csv_schema.json").read_text()
    return json.loads(text)


def columns(table: str) -> List[str]:
    return list(csv_schema()["tables"][table])


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def atomic_write_text(path, text: str) -> Path:
    """Write to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(table: str, rows: Iterable[Mapping]) -> str:
    cols = columns(table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        extra = set(row) - set(cols)
        if extra:
            raise KeyError(f"columns {sorted(extra)} not in the {table} schema")
        w.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def write_csv(path, table: str, rows: Iterable[Mapping]) -> Path:
    return atomic_write_text(path, csv_text(table, rows))


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):     # numpy scalars
        return _jsonable(obj.item())
    return obj


def write_json(path, data) -> Path:
    return atomic_write_text(path, json.dumps(_jsonable(data), indent=2) + "\n")


# -- row builders ----------------------------------------------------------

def ladder_rows(report: LadderReport) -> List[dict]:
    rows = []
    for k, (st, diag) in enumerate(zip(report.steps, report.diagnostics)):
        row = {"step": k, "kind": report.kind, "value": st.value, "A": st.A,
               "delta": st.delta, "newton_iters": st.newton_iters,
               "final_gradient_norm": st.final_gradient_norm, "energy": st.energy,
               "consecutive_delta": report.consecutive_delta[k - 1] if k else None}
        row.update(diag.as_dict())
        rows.append(row)
    return rows


def ladder_summary(report: LadderReport, verdict=None) -> dict:
    out = {"kind": report.kind, "schedule": report.schedule,
           "stabilization_index": report.stabilization_index,
           "consecutive_delta": report.consecutive_delta,
           "growth_flags": report.growth_flags,
           "steps": [{"value": s.value, "A": s.A, "delta": s.delta,
                      "newton_iters": s.newton_iters,
                      "final_gradient_norm": s.final_gradient_norm,
                      "energy": s.energy, "energy_decrements": s.energy_decrements,
                      "diagnostics": d.as_dict()}
                     for s, d in zip(report.steps, report.diagnostics)]}
    if verdict is not None:
        out["verdict"] = {"ratio_tol": verdict.ratio_tol, "first_step": verdict.first_step,
                          "ratios": verdict.ratios, "passed": verdict.passed,
                          "ok": verdict.ok}
    return out


def parabolic_rows(run: ParabolicRun) -> List[dict]:
    rows = []
    for k, diag in enumerate(run.diagnostics):
        row = {"step": k, "t": run.times[k], "energy": run.energies[k],
               "increment_norm": run.increment_norms[k] if k else None,
               "dissipation_gap": run.dissipation_gaps[k] if k else None,
               "newton_iters": run.newton_iters[k]}
        row.update(diag.as_dict())
        rows.append(row)
    return rows


def parabolic_summary(run: ParabolicRun) -> dict:
    out = {"dt": run.dt, "T": run.T, "steps": run.steps, "A": run.A,
           "sup_u_sq": run.sup_u_sq, "sup_F_A_sq": run.sup_F_A_sq,
           "time_derivative_sq": run.time_derivative_sq,
           "data_quantity": run.data_quantity, "bound_ratio": run.bound_ratio,
           "max_dissipation_gap": max(run.dissipation_gaps[1:])}
    if run.mollify is not None:
        out["mollify"] = {"band": run.mollify.band, "passes": run.mollify.passes,
                          "max_Du": run.mollify.max_Du}
    return out


__all__ = ["DIAGNOSTIC_NAMES", "atomic_write_text", "columns", "csv_schema", "csv_text",
           "ladder_rows", "ladder_summary", "parabolic_rows", "parabolic_summary",
           "write_csv", "write_json"]
