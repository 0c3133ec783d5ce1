"""Newton's method with Armijo backtracking on the discrete convex energy."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (DomainError, LinearSolveFailure, LineSearchFailure,
                     MaxIterations)
from .grid import (Diagnostics, Field, Mesh, _check, _energy_flat, _flat,
                   _gradient_full, _hessian_flat, energy_change, load_vector,
                   quasinorm_report, stiffness_matrix)
from .operator import AApprox

log = logging.getLogger(__name__)

LINEAR_SOLVERS = ("auto", "direct_spd", "cg_jacobi")
# meshes up to this many cells per side use the sparse direct solver under "auto"
DIRECT_MAX_N = 64


@dataclass(frozen=True)
class SolverOptions:
    tol_abs: float = 1e-10
    tol_rel: float = 1e-10
    max_newton: int = 100
    armijo_sigma: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 40
    linear_solver: str = "auto"
    cg_tol: float = 1e-12

    def __post_init__(self):
        for name in ("tol_abs", "tol_rel", "cg_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        for name in ("armijo_sigma", "backtrack_factor"):
            if not 0 < getattr(self, name) < 1:
                raise DomainError(f"{name} must lie in (0, 1)")
        if self.max_newton < 0 or self.max_backtracks < 0:
            raise DomainError("iteration limits must be >= 0")
        if self.linear_solver not in LINEAR_SOLVERS:
            raise DomainError(f"linear_solver must be one of {LINEAR_SOLVERS}")


@dataclass
class Solution:
    u: Field
    newton_iters: int
    final_gradient_norm: float
    energy_history: List[float]
    diagnostics: Optional[Diagnostics] = None
    energy_decrements: List[float] = field(default_factory=list)
    gradient_history: List[float] = field(default_factory=list)
    step_sizes: List[float] = field(default_factory=list)
    tolerance: float = 0.0


def _pcg_jacobi(H, rhs, tol, maxiter=None):
    """Jacobi-preconditioned CG; refuses on nonpositive curvature."""
    n = rhs.size
    maxiter = maxiter or 10 * n
    dinv = 1.0 / H.diagonal()
    if np.any(~np.isfinite(dinv)) or np.any(dinv <= 0):
        raise LinearSolveFailure("Hessian diagonal not positive")
    x = np.zeros(n)
    r = rhs.copy()
    z = dinv * r
    p = z.copy()
    rz = r @ z
    stop = tol * np.linalg.norm(rhs)
    for _ in range(maxiter):
        if np.linalg.norm(r) <= stop:
            return x
        Hp = H @ p
        curv = p @ Hp
        if not curv > 0:
            raise LinearSolveFailure("negative curvature met in CG: Hessian not SPD")
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Hp
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    if np.linalg.norm(r) <= stop:
        return x
    raise LinearSolveFailure("CG did not converge")


def _linear_solve(H, rhs, mesh: Mesh, opts: SolverOptions):
    kind = opts.linear_solver
    if kind == "auto":
        kind = "direct_spd" if mesh.n <= DIRECT_MAX_N else "cg_jacobi"
    if kind == "cg_jacobi":
        return _pcg_jacobi(H, rhs, opts.cg_tol)
    x = spla.spsolve(sp.csc_matrix(H), rhs)
    if not np.all(np.isfinite(x)):
        raise LinearSolveFailure("direct solve produced non-finite values")
    return x


def _newton(mesh, ap, b, u0, opts, mass=None, u_ref=None):
    """Minimize E(u) [+ 1/2 (u-u_ref)^T diag(mass) (u-u_ref)] from u0.

    Returns (u, iters, gnorm, energies, decrements, gnorms, steps, tol).
    """
    interior = mesh.interior_dofs
    u = u0.copy()
    scale = np.linalg.norm(b[interior])
    if mass is not None:
        scale += np.linalg.norm((mass * u_ref)[interior])
    tol = opts.tol_abs + opts.tol_rel * scale

    def objective(v):
        val = _energy_flat(mesh, ap, v, b)
        if mass is not None:
            r = v - u_ref
            val += 0.5 * float(np.sum(mass * r * r))
        return val

    def gradient(v):
        g = _gradient_full(mesh, ap, v, b)
        if mass is not None:
            g = g + mass * (v - u_ref)
        return g[interior]

    energies = [objective(u)]
    decrements, gnorms, steps = [], [], []
    it = 0
    while True:
        g = gradient(u)
        gn = float(np.linalg.norm(g))
        gnorms.append(gn)
        if gn <= tol:
            return u, it, gn, energies, decrements, gnorms, steps, tol
        if it >= opts.max_newton:
            raise MaxIterations(
                f"no convergence in {opts.max_newton} Newton steps (|g|={gn:.3e})",
                gnorms)
        H = _hessian_flat(mesh, ap, u, None if mass is None else mass[interior])
        d = _linear_solve(H, -g, mesh, opts)
        slope = float(g @ d)
        if not slope < 0:
            raise LinearSolveFailure("Newton direction is not a descent direction",
                                     gnorms)
        alpha = 1.0
        for _ in range(opts.max_backtracks + 1):
            u_new = u.copy()
            u_new[interior] += alpha * d
            s = u_new - u
            extra = ()
            if mass is not None:
                r = u - u_ref
                extra = np.concatenate([mass * s * r, 0.5 * mass * s * s])
            dE = energy_change(mesh, ap, u, s, b, extra)
            if dE < 0 and dE <= opts.armijo_sigma * alpha * slope:
                break
            alpha *= opts.backtrack_factor
        else:
            raise LineSearchFailure(
                f"Armijo backtracking failed after {opts.max_backtracks} reductions",
                gnorms)
        u = u_new
        it += 1
        decrements.append(dE)
        steps.append(alpha)
        energies.append(energies[-1] + dE)
        log.debug("newton %d: |g|=%.3e alpha=%g dE=%.3e", it, gn, alpha, dE)


def solve_steady(mesh: Mesh, ap: AApprox, f: Field, opts: SolverOptions = None,
                 u0: Optional[Field] = None, diagnostics: bool = True) -> Solution:
    """Minimize int omega^A(|Du|) - f.u over Dirichlet-conforming Q1 fields.

    The iteration starts from zero unless a conforming ``u0`` is supplied.
    Energies after the first are accumulated from the accurately computed
    per-step decrements.
    """
    opts = opts or SolverOptions()
    ap.params.require_solver_delta()
    _check(mesh, f, *(() if u0 is None else (u0,)))
    if not np.all(np.isfinite(f.values)):
        raise DomainError("load must be finite")
    b = load_vector(mesh, f)
    start = np.zeros(mesh.num_dofs) if u0 is None else _flat(mesh, u0).copy()
    if u0 is not None and not u0.is_conforming():
        raise DomainError("initial iterate must vanish on the boundary")
    u, it, gn, en, dec, gh, st, tol = _newton(mesh, ap, b, start, opts)
    sol = Field.from_flat(mesh, u)
    diag = quasinorm_report(mesh, ap, sol, f) if diagnostics else None
    return Solution(sol, it, gn, en, diag, dec, gh, st, tol)


def linear_oracle(mesh: Mesh, f: Field) -> Field:
    """Solve int Du : Dphi = int f . phi with one sparse SPD solve."""
    _check(mesh, f)
    K = stiffness_matrix(mesh)
    rhs = load_vector(mesh, f)[mesh.interior_dofs]
    x = spla.spsolve(sp.csc_matrix(K), rhs)
    if not np.all(np.isfinite(x)):
        raise LinearSolveFailure("linear oracle solve failed")
    u = np.zeros(mesh.num_dofs)
    u[mesh.interior_dofs] = x
    return Field.from_flat(mesh, u)


# -- built-in data ----------------------------------------------------------

def _sine_products(x, L):
    k = np.pi / L
    return np.sin(k * x), np.cos(k * x), k


def _manufactured(name, x, L, dim):
    if name == "zero":
        return np.zeros((len(x), dim)), np.zeros((len(x), dim))
    s, c, k = _sine_products(x, L)
    if name == "sine2d":
        if dim != 2:
            raise DomainError("sine2d needs a 2D mesh")
        ss = s[:, 0] * s[:, 1]
        cc = c[:, 0] * c[:, 1]
        u = np.stack([ss, ss], axis=1)
        fv = 0.5 * k * k * (3.0 * ss - cc)
        return u, np.stack([fv, fv], axis=1)
    if name == "sine3d":
        if dim != 3:
            raise DomainError("sine3d needs a 3D mesh")
        sss = s[:, 0] * s[:, 1] * s[:, 2]
        u = np.stack([sss] * 3, axis=1)
        f = np.empty_like(u)
        for i in range(3):
            mixed = 0.0
            for j in range(3):
                if j == i:
                    continue
                # d_i d_j of the product: cosines in slots i and j, sine in the third
                m = [s[:, 0], s[:, 1], s[:, 2]]
                m[i], m[j] = c[:, i], c[:, j]
                mixed = mixed + m[0] * m[1] * m[2]
            f[:, i] = 0.5 * k * k * (4.0 * sss - mixed)
        return u, f
    raise DomainError(f"unknown manufactured solution {name!r}")


MANUFACTURED = ("zero", "sine2d", "sine3d")


def manufactured_load_p2(mesh: Mesh, which: str):
    """Nodal samples of a built-in exact solution and its load -div Du for p = 2."""
    u, f = _manufactured(which, mesh.coords, mesh.L, mesh.dim)
    return Field(mesh, u), Field(mesh, f)


BUILTIN_LOADS = ("zero", "smooth", "constant", "sine2d", "sine3d")
SMOOTH_AMPLITUDE = 10.0


def builtin_load(mesh: Mesh, name: str) -> Field:
    """Built-in nodal loads.

    ``smooth`` is SMOOTH_AMPLITUDE * prod_k sin(pi x_k / L) in every component;
    ``sine2d``/``sine3d`` are the manufactured p = 2 loads.
    """
    x = mesh.coords
    if name in ("zero", "sine2d", "sine3d"):
        return manufactured_load_p2(mesh, name)[1]
    if name == "smooth":
        s = np.prod(np.sin(np.pi * x / mesh.L), axis=1)
        return Field(mesh, SMOOTH_AMPLITUDE * np.repeat(s[:, None], mesh.dim, axis=1))
    if name == "constant":
        return Field(mesh, np.ones((mesh.num_nodes, mesh.dim)))
    raise DomainError(f"unknown builtin load {name!r}")
