"""JSON run configuration with defaults and field-addressed validation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import ConfigError, PDeltaError
from .grid import Field, Mesh
from .nfunc import DELTA_MIN, PDeltaParams
from .parabolic import BUILTIN_INITIAL, TIME_PROFILES
from .solver import BUILTIN_LOADS, LINEAR_SOLVERS, SolverOptions

DEFAULT_A = 1e6
DEFAULT_A_SCHEDULE = tuple(2.0 ** k for k in range(11))


@dataclass(frozen=True)
class MeshSpec:
    dim: int = 2
    n: int = 16
    L: float = 1.0


@dataclass(frozen=True)
class DataSpec:
    """A builtin id or a field file; ``amplitude`` scales builtin initial data."""
    builtin: Optional[str] = None
    file: Optional[str] = None
    amplitude: float = 1.0


@dataclass(frozen=True)
class TimeSpec:
    T: float = 0.5
    dt: float = 0.01
    profile: str = "constant"


@dataclass(frozen=True)
class LadderSpec:
    stabilization_tol: float = 1e-8
    ratio_tol: float = 2.0
    growth_tol: float = 10.0
    warm_start: bool = True
    A_policy: Tuple[str, float] = ("fixed", DEFAULT_A)


@dataclass(frozen=True)
class Config:
    problem: str
    params: PDeltaParams
    mesh: MeshSpec
    A: float = DEFAULT_A
    A_schedule: Optional[Tuple[float, ...]] = None
    delta_schedule: Optional[Tuple[float, ...]] = None
    load: DataSpec = DataSpec(builtin="smooth")
    initial: DataSpec = DataSpec(builtin="zero")
    time: TimeSpec = TimeSpec()
    solver: SolverOptions = SolverOptions()
    ladder: LadderSpec = LadderSpec()
    seed: int = 0
    output: str = "pdelta_out"
    base_dir: str = field(default=".", compare=False)

    def build_mesh(self) -> Mesh:
        return Mesh(self.mesh.dim, self.mesh.n, self.mesh.L)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def as_dict(self) -> dict:
        return {
            "problem": self.problem,
            "params": {"p": self.params.p, "delta": self.params.delta,
                       "dim": self.params.dim},
            "mesh": {"dim": self.mesh.dim, "n": self.mesh.n, "L": self.mesh.L},
            "A": self.A,
            "A_schedule": None if self.A_schedule is None else list(self.A_schedule),
            "delta_schedule": (None if self.delta_schedule is None
                               else list(self.delta_schedule)),
            "load": _data_dict(self.load), "initial": _data_dict(self.initial),
            "time": {"T": self.time.T, "dt": self.time.dt, "profile": self.time.profile},
            "solver": {f.name: getattr(self.solver, f.name) for f in fields(self.solver)},
            "ladder": {"stabilization_tol": self.ladder.stabilization_tol,
                       "ratio_tol": self.ladder.ratio_tol,
                       "growth_tol": self.ladder.growth_tol,
                       "warm_start": self.ladder.warm_start,
                       "A_policy": {"kind": self.ladder.A_policy[0],
                                    "value": self.ladder.A_policy[1]}},
            "seed": self.seed, "output": self.output,
        }


def _data_dict(d: DataSpec) -> dict:
    out = {"builtin": d.builtin} if d.builtin is not None else {"file": d.file}
    if d.amplitude != 1.0:
        out["amplitude"] = d.amplitude
    return out


class _Collector:
    def __init__(self):
        self.errors: List[Tuple[str, str]] = []

    def add(self, name, msg):
        self.errors.append((name, msg))

    def number(self, obj, key, prefix, default, cast=float, positive=False):
        name = f"{prefix}{key}"
        if key not in obj:
            return default
        val = obj[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.add(name, f"must be a number, got {val!r}")
            return default
        if cast is int and int(val) != val:
            self.add(name, f"must be an integer, got {val!r}")
            return default
        val = cast(val)
        if not math.isfinite(val):
            self.add(name, "must be finite")
            return default
        if positive and not val > 0:
            self.add(name, f"must be > 0, got {val!r}")
        return val

    def section(self, obj, key):
        val = obj.get(key, {})
        if not isinstance(val, dict):
            self.add(key, "must be an object")
            return {}
        return val

    def unknown(self, obj, allowed, prefix=""):
        for k in obj:
            if k not in allowed:
                self.add(f"{prefix}{k}", "unknown field")


TOP_FIELDS = ("problem", "params", "mesh", "A", "A_schedule", "delta_schedule", "load",
              "initial", "time", "solver", "ladder", "seed", "output")


def _schedule(col, obj, key, increasing):
    if key not in obj or obj[key] is None:
        return None
    vals = obj[key]
    if not isinstance(vals, list) or not vals or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
        col.add(key, "must be a non-empty list of numbers")
        return None
    vals = tuple(float(v) for v in vals)
    ok = all((b > a) if increasing else (b < a) for a, b in zip(vals, vals[1:]))
    if not ok:
        col.add(key, "not strictly increasing" if increasing else "not strictly decreasing")
    return vals


def _data(col, obj, key, default, builtins):
    if key not in obj:
        return default
    val = obj[key]
    if isinstance(val, str):
        val = {"builtin": val}
    if not isinstance(val, dict):
        col.add(key, "must be a builtin id or an object")
        return default
    col.unknown(val, ("builtin", "file", "amplitude"), f"{key}.")
    if ("builtin" in val) == ("file" in val):
        col.add(key, "give exactly one of 'builtin' or 'file'")
        return default
    amp = col.number(val, "amplitude", f"{key}.", 1.0)
    if "builtin" in val:
        if val["builtin"] not in builtins:
            col.add(f"{key}.builtin", f"unknown builtin {val['builtin']!r}; "
                                      f"choose from {list(builtins)}")
            return default
        return DataSpec(builtin=val["builtin"], amplitude=amp)
    if not isinstance(val["file"], str):
        col.add(f"{key}.file", "must be a path string")
        return default
    return DataSpec(file=val["file"], amplitude=amp)


def parse_config(raw: dict, base_dir: str = ".", check_files: bool = True) -> Config:
    """Validate a decoded config object; raises ConfigError listing every problem."""
    col = _Collector()
    if not isinstance(raw, dict):
        raise ConfigError([("<root>", "config must be a JSON object")])
    col.unknown(raw, TOP_FIELDS)

    problem = raw.get("problem")
    if problem not in ("steady", "parabolic"):
        col.add("problem", "must be 'steady' or 'parabolic'")

    mesh_raw = col.section(raw, "mesh")
    col.unknown(mesh_raw, ("dim", "n", "L"), "mesh.")
    mdim = col.number(mesh_raw, "dim", "mesh.", 2, int)
    n = col.number(mesh_raw, "n", "mesh.", 16, int)
    L = col.number(mesh_raw, "L", "mesh.", 1.0, positive=True)
    if mdim not in (2, 3):
        col.add("mesh.dim", f"must be 2 or 3, got {mdim}")
    if n < 2:
        col.add("mesh.n", f"must be >= 2, got {n}")
    if "mesh" not in raw:
        col.add("mesh", "required")

    pr = col.section(raw, "params")
    col.unknown(pr, ("p", "delta", "dim"), "params.")
    for req in ("p", "delta"):
        if req not in pr:
            col.add(f"params.{req}", "required")
    p = col.number(pr, "p", "params.", 2.0)
    delta = col.number(pr, "delta", "params.", 1.0)
    pdim = col.number(pr, "dim", "params.", mdim, int)
    if not (1.0 < p <= 2.0):
        col.add("params.p", f"must satisfy 1 < p <= 2, got {p!r}")
    if delta < DELTA_MIN:
        col.add("params.delta", f"must be >= delta_min = {DELTA_MIN:g} for solves, "
                                f"got {delta!r}")
    if pdim != mdim:
        col.add("params.dim", f"must equal mesh.dim ({mdim}), got {pdim}")

    A = col.number(raw, "A", "", DEFAULT_A)
    if A < 1.0:
        col.add("A", f"must be >= 1, got {A!r}")
    A_sched = _schedule(col, raw, "A_schedule", True)
    if A_sched is not None and min(A_sched) < 1.0:
        col.add("A_schedule", "entries must be >= 1")
    d_sched = _schedule(col, raw, "delta_schedule", False)
    if d_sched is not None and min(d_sched) < DELTA_MIN:
        col.add("delta_schedule", f"entries must be >= delta_min = {DELTA_MIN:g}")

    load = _data(col, raw, "load", DataSpec(builtin="smooth"), BUILTIN_LOADS)
    initial = _data(col, raw, "initial", DataSpec(builtin="zero"), BUILTIN_INITIAL)

    tr = col.section(raw, "time")
    col.unknown(tr, ("T", "dt", "profile"), "time.")
    T = col.number(tr, "T", "time.", 0.5, positive=True)
    dt = col.number(tr, "dt", "time.", 0.01, positive=True)
    profile = tr.get("profile", "constant")
    if profile not in TIME_PROFILES:
        col.add("time.profile", f"must be one of {list(TIME_PROFILES)}")
        profile = "constant"

    sr = col.section(raw, "solver")
    names = [f.name for f in fields(SolverOptions)]
    col.unknown(sr, names, "solver.")
    kw = {}
    for f in fields(SolverOptions):
        if f.name not in sr:
            continue
        if f.name == "linear_solver":
            if sr[f.name] not in LINEAR_SOLVERS:
                col.add("solver.linear_solver", f"must be one of {list(LINEAR_SOLVERS)}")
            else:
                kw[f.name] = sr[f.name]
        else:
            cast = int if f.name in ("max_newton", "max_backtracks") else float
            kw[f.name] = col.number(sr, f.name, "solver.", f.default, cast)
    try:
        solver = SolverOptions(**kw)
    except PDeltaError as exc:
        col.add("solver", str(exc))
        solver = SolverOptions()

    lr = col.section(raw, "ladder")
    col.unknown(lr, ("stabilization_tol", "ratio_tol", "growth_tol", "warm_start",
                     "A_policy"), "ladder.")
    stab = col.number(lr, "stabilization_tol", "ladder.", 1e-8, positive=True)
    ratio = col.number(lr, "ratio_tol", "ladder.", 2.0)
    if ratio < 1.0:
        col.add("ladder.ratio_tol", "must be >= 1")
    growth = col.number(lr, "growth_tol", "ladder.", 10.0)
    if growth < 1.0:
        col.add("ladder.growth_tol", "must be >= 1")
    warm = lr.get("warm_start", True)
    if not isinstance(warm, bool):
        col.add("ladder.warm_start", "must be true or false")
        warm = True
    policy = ("fixed", DEFAULT_A)
    if "A_policy" in lr:
        ap = lr["A_policy"]
        if not isinstance(ap, dict) or ap.get("kind") not in ("fixed", "inverse"):
            col.add("ladder.A_policy", "must be {'kind': 'fixed'|'inverse', 'value': number}")
        else:
            val = col.number(ap, "value", "ladder.A_policy.", DEFAULT_A, positive=True)
            if ap["kind"] == "fixed" and val < 1.0:
                col.add("ladder.A_policy.value", "fixed A must be >= 1")
            policy = (ap["kind"], val)

    seed = col.number(raw, "seed", "", 0, int)
    if seed < 0:
        col.add("seed", "must be >= 0")
    output = raw.get("output", "pdelta_out")
    if not isinstance(output, str) or not output:
        col.add("output", "must be a non-empty path string")
        output = "pdelta_out"

    if col.errors:
        raise ConfigError(col.errors)

    cfg = Config(problem=problem, params=PDeltaParams(p, delta, pdim),
                 mesh=MeshSpec(mdim, n, L), A=A, A_schedule=A_sched,
                 delta_schedule=d_sched, load=load, initial=initial,
                 time=TimeSpec(T, dt, profile), solver=solver,
                 ladder=LadderSpec(stab, ratio, growth, warm, policy),
                 seed=seed, output=output, base_dir=str(base_dir))
    if check_files:
        preload_files(cfg)
    return cfg


def preload_files(cfg: Config) -> dict:
    """Parse every referenced field file against the configured mesh."""
    errs, loaded = [], {}
    mesh = cfg.build_mesh()
    for key in ("load", "initial"):
        spec = getattr(cfg, key)
        if spec.file is None:
            continue
        path = cfg.resolve(spec.file)
        if not path.is_file():
            errs.append((f"{key}.file", f"no such file: {spec.file}"))
            continue
        try:
            loaded[key] = Field.load(path, mesh)
        except json.JSONDecodeError as exc:
            errs.append((f"{key}.file", f"invalid JSON at line {exc.lineno}: {exc.msg}"))
        except PDeltaError as exc:
            errs.append((f"{key}.file", str(exc)))
    if errs:
        raise ConfigError(errs)
    return loaded


def load_config(path) -> Config:
    """Read, parse and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([("<file>", f"cannot read {path}: {exc.strerror}")]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}")],
                          line=exc.lineno) from None
    return parse_config(raw, base_dir=str(path.parent))
