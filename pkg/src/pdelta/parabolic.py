"""Implicit Euler for du/dt - div S^A(Du) = f with capped initial data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.ndimage import uniform_filter

from .errors import DomainError, MollificationFailure, SolverError
from .grid import (Diagnostics, Field, Mesh, _check, _energy_flat, _norm,
                   l2_norm_sq, load_vector, quasinorm_report, stiffness_matrix,
                   sym_gradients, values_at_qp)
from .nfunc import PDeltaParams
from .operator import AApprox, build_a_approx
from .solver import SolverOptions, _newton

LoadProvider = Callable[[float], Field]


def max_sym_gradient(mesh: Mesh, u) -> float:
    """max over quadrature points of |Du|."""
    t = _norm(sym_gradients(mesh, u))
    return float(t.max()) if t.size else 0.0


def _boundary_distance(mesh: Mesh) -> np.ndarray:
    idx = mesh.node_index
    return np.min(np.minimum(idx, mesh.n - idx), axis=1)


def _average_pass(mesh: Mesh, vals: np.ndarray) -> np.ndarray:
    shape = (mesh.n + 1,) * mesh.dim
    out = np.empty_like(vals)
    for i in range(mesh.dim):
        # node arrays are x-fastest, i.e. C order with x on the last axis
        comp = vals[:, i].reshape(shape)
        out[:, i] = uniform_filter(comp, size=3, mode="constant").ravel()
    out[mesh.boundary] = 0.0
    return out


@dataclass
class MollifyResult:
    field: Field
    band: int           # m: boundary band width that was zeroed
    passes: int         # k: number of 3^d averaging passes
    max_Du: float


def mollify_initial(mesh: Mesh, u0: Field, A: float, max_band: Optional[int] = None,
                    max_passes: Optional[int] = None, full_output: bool = False):
    """Discrete counterpart of convolution-translation smoothing with cap A.

    Candidates (m, k) zero every node within graph distance m of the boundary
    and then apply k passes of 3^d local averaging.  They are tried in
    lexicographic order of (m, k), so the band only widens once averaging alone
    cannot meet the cap; the first candidate whose max |Du| over quadrature
    points is <= A is returned.
    """
    _check(mesh, u0)
    if not (A >= 1.0):
        raise DomainError(f"A must be >= 1, got {A}")
    if not np.all(np.isfinite(u0.values)):
        raise DomainError("initial data must be finite")
    max_band = max(0, mesh.n // 2 - 1) if max_band is None else max_band
    max_passes = 4 * mesh.n ** 2 if max_passes is None else max_passes
    dist = _boundary_distance(mesh)
    best = math.inf
    for m in range(max_band + 1):
        vals = u0.values.copy()
        vals[dist <= m] = 0.0
        for k in range(max_passes + 1):
            if k:
                vals = _average_pass(mesh, vals)
            cand = Field(mesh, vals)
            mx = max_sym_gradient(mesh, cand)
            best = min(best, mx)
            if mx <= A:
                res = MollifyResult(cand, m, k, mx)
                return res if full_output else res.field
    raise MollificationFailure(
        f"cannot reach max|Du| <= {A:g}; best achieved {best:.6g}", best)


def _implicit_step(mesh, ap, u_prev, dt, f_now, opts):
    mass = mesh.lumped_mass_dofs / dt
    b = load_vector(mesh, f_now)
    return _newton(mesh, ap, b, u_prev.copy(), opts, mass=mass, u_ref=u_prev)


def step_implicit(mesh: Mesh, ap: AApprox, u_prev: Field, dt: float, f_now: Field,
                  opts: SolverOptions = None) -> Field:
    """Minimizer of |u-u_prev|^2/(2dt) + int omega^A(|Du|) - f_now.u (lumped mass)."""
    if not dt > 0:
        raise DomainError("dt must be > 0")
    _check(mesh, u_prev, f_now)
    if not u_prev.is_conforming():
        raise DomainError("previous state must vanish on the boundary")
    ap.params.require_solver_delta()
    u = _implicit_step(mesh, ap, u_prev.flat, dt, f_now, opts or SolverOptions())[0]
    return Field.from_flat(mesh, u)


@dataclass
class ParabolicRun:
    dt: float
    T: float
    steps: int
    A: float
    times: List[float]
    diagnostics: List[Diagnostics]        # index 0 is the initial state
    energies: List[float]                 # E(u_k) with load f(t_k); entry 0 uses f(t_1)
    increment_norms: List[float]          # |u_k - u_{k-1}| in discrete L^2
    dissipation_gaps: List[float]         # [E + |incr|^2/(2dt)](u_k) - E(u_{k-1}) <= 0
    newton_iters: List[int]
    sup_u_sq: float
    sup_F_A_sq: float
    time_derivative_sq: float
    data_quantity: float
    bound_ratio: float
    mollify: Optional[MollifyResult] = None
    step_decrements: List[List[float]] = field(default_factory=list, repr=False)
    states: List[Field] = field(default_factory=list, repr=False)


def data_quantity(mesh: Mesh, params: PDeltaParams, u0: Field,
                  loads: List[Field], dt: float) -> float:
    """Discrete |||u0, f|||^2 with the loads sampled at the step end times."""
    w = mesh.qp_weights
    t = _norm(sym_gradients(mesh, u0))
    val = l2_norm_sq(mesh, u0) + float(np.sum(w * t ** params.p))
    for f in loads:
        fq = values_at_qp(mesh, f)
        fn = np.sqrt(np.sum(fq * fq, axis=-1))
        val += dt * float(np.sum(w * (fn ** params.p_dual + fn * fn)))
    return val


def _num_steps(T, dt):
    return max(1, int(math.ceil(T / dt - 1e-9)))


def run_parabolic(mesh: Mesh, params: PDeltaParams, A: float, u0: Field,
                  f: LoadProvider, T: float, dt: float, opts: SolverOptions = None,
                  premollified: bool = False, keep_states: bool = False) -> ParabolicRun:
    """Implicit Euler from u0 (mollified with cap A unless ``premollified``)."""
    if not (T > 0 and dt > 0):
        raise DomainError("T and dt must be > 0")
    params.require_solver_delta()
    opts = opts or SolverOptions()
    ap = build_a_approx(params, A)
    moll = None
    if premollified:
        if not u0.is_conforming():
            raise DomainError("premollified initial data must vanish on the boundary")
        start = u0
    else:
        moll = mollify_initial(mesh, u0, A, full_output=True)
        start = moll.field
    n_steps = _num_steps(T, dt)
    times = [k * dt for k in range(n_steps + 1)]
    loads = [f(tk) for tk in times[1:]]
    for ld in loads:
        _check(mesh, ld)

    u = start.flat.copy()
    diags = [quasinorm_report(mesh, ap, start, loads[0])]
    energies = [_energy_flat(mesh, ap, u, load_vector(mesh, loads[0]))]
    incs, gaps, iters, states, decs = [0.0], [0.0], [0], [start], []
    tder = 0.0
    for k, fk in enumerate(loads, start=1):
        try:
            res = _implicit_step(mesh, ap, u, dt, fk, opts)
        except SolverError as exc:
            raise exc.tagged(f"step={k}") from exc
        u_new, it, _, _, dec, _, _, _ = res
        inc_sq = l2_norm_sq(mesh, u_new - u)
        tder += inc_sq / dt
        gaps.append(math.fsum(dec))
        decs.append(list(dec))
        incs.append(math.sqrt(inc_sq))
        iters.append(it)
        u = u_new
        fld = Field.from_flat(mesh, u)
        states.append(fld)
        diags.append(quasinorm_report(mesh, ap, fld, fk))
        energies.append(_energy_flat(mesh, ap, u, load_vector(mesh, fk)))

    sup_u = max(l2_norm_sq(mesh, s) for s in states)
    sup_F = max(d.F_A_sq for d in diags)
    dq = data_quantity(mesh, params, u0.conforming(), loads, dt)
    ratio = (sup_u + sup_F + tder) / (params.delta ** params.p + dq)
    return ParabolicRun(dt, T, n_steps, float(A), times, diags, energies, incs, gaps,
                        iters, sup_u, sup_F, tder, dq, ratio, moll, decs,
                        states if keep_states else [])


def linear_implicit_euler(mesh: Mesh, u0: Field, f: LoadProvider, T: float,
                          dt: float) -> List[Field]:
    """p = 2 reference: (M_L + dt K) u_k = M_L u_{k-1} + dt b_k on interior dofs."""
    interior = mesh.interior_dofs
    ML = mesh.lumped_mass_dofs[interior]
    K = stiffness_matrix(mesh)
    lu = spla.splu(sp.csc_matrix(sp.diags(ML) + dt * K))
    u = u0.flat.copy()
    out = [u0]
    for k in range(1, _num_steps(T, dt) + 1):
        rhs = ML * u[interior] + dt * load_vector(mesh, f(k * dt))[interior]
        u = np.zeros(mesh.num_dofs)
        u[interior] = lu.solve(rhs)
        out.append(Field.from_flat(mesh, u))
    return out


BUILTIN_INITIAL = ("zero", "bump", "rough")


def builtin_initial(mesh: Mesh, name: str, amplitude: float = 1.0) -> Field:
    """Built-in initial data; ``rough`` carries a higher-frequency component."""
    x = mesh.coords / mesh.L
    s = np.prod(np.sin(np.pi * x), axis=1)
    if name == "zero":
        return Field.zeros(mesh)
    if name == "bump":
        return Field(mesh, amplitude * np.repeat(s[:, None], mesh.dim, axis=1))
    if name == "rough":
        s3 = np.prod(np.sin(3 * np.pi * x), axis=1)
        v = amplitude * (s + 0.5 * s3)
        return Field(mesh, np.repeat(v[:, None], mesh.dim, axis=1))
    raise DomainError(f"unknown builtin initial data {name!r}")


TIME_PROFILES = ("constant", "ramp", "oscillating")


def time_profile(name: str) -> Callable[[float], float]:
    if name == "constant":
        return lambda t: 1.0
    if name == "ramp":
        return lambda t: min(1.0, t)
    if name == "oscillating":
        return lambda t: math.cos(2.0 * math.pi * t)
    raise DomainError(f"unknown time profile {name!r}")


def scaled_load(base: Field, profile: Callable[[float], float]) -> LoadProvider:
    """f(t, x) = profile(t) * base(x); a pure function of t."""
    def provider(t):
        return Field(base.mesh, profile(t) * base.values)
    return provider
