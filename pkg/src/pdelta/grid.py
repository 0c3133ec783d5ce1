"""Uniform Q1 discretization of vector fields on the box [0, L]^d.

Nodes are numbered lexicographically with x fastest; the global degree of
freedom of component ``i`` at node ``k`` is ``k * d + i``.  Every cell is a
translate of the same square/cube, so shape-function data is computed once
per mesh and reused for all cells.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, MeshMismatchError, SingularityError
from .nfunc import conjugate_eval
from .operator import (AApprox, SymTensor, _a_profile, _contract, _norm,
                       _radial_coef, ua_eval, ua_increment)

_GAUSS = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


def _corner_bits(dim):
    return np.array([[(a >> k) & 1 for k in range(dim)] for a in range(2 ** dim)])


def _shape(dim, xi):
    """Q1 shape values and reference gradients at a point of [0,1]^d."""
    bits = _corner_bits(dim)
    xi = np.asarray(xi, dtype=float)
    fac = np.where(bits == 1, xi, 1.0 - xi)          # (nn, d)
    vals = np.prod(fac, axis=1)
    grads = np.empty((2 ** dim, dim))
    for k in range(dim):
        rest = np.prod(np.delete(fac, k, axis=1), axis=1)
        grads[:, k] = np.where(bits[:, k] == 1, 1.0, -1.0) * rest
    return vals, grads


class Mesh:
    """Q1 mesh of ``n**dim`` cells on ``[0, L]**dim`` with 2^d Gauss points per cell."""

    def __init__(self, dim: int, n: int, L: float = 1.0):
        if dim not in (2, 3):
            raise DomainError(f"dim must be 2 or 3, got {dim}")
        if int(n) != n or n < 2:
            raise DomainError(f"n must be an integer >= 2, got {n}")
        if not (L > 0) or not np.isfinite(L):
            raise DomainError(f"L must be positive, got {L}")
        self.dim, self.n, self.L = dim, int(n), float(L)
        self.h = self.L / self.n
        m = self.n + 1
        idx = np.indices((m,) * dim).reshape(dim, -1)[::-1].T   # x fastest
        self.node_index = idx
        self.coords = idx * self.h
        self.boundary = np.any((idx == 0) | (idx == self.n), axis=1)
        strides = m ** np.arange(dim)
        cidx = np.indices((self.n,) * dim).reshape(dim, -1)[::-1].T
        bits = _corner_bits(dim)
        self.cells = (cidx[:, None, :] + bits[None, :, :]) @ strides

        pts = np.array(np.meshgrid(*([_GAUSS] * dim), indexing="ij")).reshape(dim, -1).T
        self.qp_ref = pts[:, ::-1]
        self.qp_weights = np.full(len(pts), (self.h / 2.0) ** dim)
        sv, sg = zip(*(_shape(dim, q) for q in self.qp_ref))
        self.shape_values = np.array(sv)                 # (nq, nn)
        self.shape_grads = np.array(sg) / self.h         # (nq, nn, d)
        self.center_grads = _shape(dim, np.full(dim, 0.5))[1] / self.h

    # -- sizes -------------------------------------------------------------
    @property
    def num_nodes(self):
        return (self.n + 1) ** self.dim

    @property
    def num_cells(self):
        return self.n ** self.dim

    @property
    def num_dofs(self):
        return self.num_nodes * self.dim

    @property
    def key(self):
        return (self.dim, self.n, self.L)

    def __eq__(self, other):
        return isinstance(other, Mesh) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Mesh(dim={self.dim}, n={self.n}, L={self.L})"

    # -- derived data ------------------------------------------------------
    @cached_property
    def cell_dofs(self):
        d = self.dim
        return (self.cells[:, :, None] * d + np.arange(d)[None, None, :]).reshape(
            self.num_cells, -1)

    @cached_property
    def strain_basis(self):
        """Symmetric gradients of the local basis: (nq, nloc, d, d)."""
        return self._strains(self.shape_grads)

    @cached_property
    def center_strain_basis(self):
        return self._strains(self.center_grads[None])[0]

    def _strains(self, grads):
        d = self.dim
        nq, nn = grads.shape[:2]
        B = np.zeros((nq, nn, d, d, d))
        for i in range(d):
            B[:, :, i, i, :] = grads      # G[i, j] = d_j N_a for component i
        B = B.reshape(nq, nn * d, d, d)
        return 0.5 * (B + np.swapaxes(B, -1, -2))

    @cached_property
    def strain_gram(self):
        B = self.strain_basis
        return np.einsum("qkij,qlij->qkl", B, B)

    @cached_property
    def interior_dofs(self):
        mask = np.repeat(~self.boundary, self.dim)
        return np.flatnonzero(mask)

    @cached_property
    def dof_to_interior(self):
        m = np.full(self.num_dofs, -1)
        m[self.interior_dofs] = np.arange(len(self.interior_dofs))
        return m

    @cached_property
    def _hess_pattern(self):
        cd = self.cell_dofs
        rows = np.repeat(cd[:, :, None], cd.shape[1], axis=2).ravel()
        cols = np.repeat(cd[:, None, :], cd.shape[1], axis=1).ravel()
        ri, ci = self.dof_to_interior[rows], self.dof_to_interior[cols]
        keep = (ri >= 0) & (ci >= 0)
        return ri[keep], ci[keep], keep

    @cached_property
    def scalar_mass(self):
        N = self.shape_values
        local = np.einsum("q,qa,qb->ab", self.qp_weights, N, N)
        nn = local.shape[0]
        rows = np.repeat(self.cells[:, :, None], nn, axis=2).ravel()
        cols = np.repeat(self.cells[:, None, :], nn, axis=1).ravel()
        data = np.broadcast_to(local, (self.num_cells, nn, nn)).ravel()
        return sp.coo_matrix((data, (rows, cols)),
                             shape=(self.num_nodes, self.num_nodes)).tocsr()

    @cached_property
    def lumped_mass(self):
        return np.asarray(self.scalar_mass.sum(axis=1)).ravel()

    @cached_property
    def lumped_mass_dofs(self):
        return np.repeat(self.lumped_mass, self.dim)


def build_mesh(dim: int, n: int, L: float = 1.0) -> Mesh:
    return Mesh(dim, n, L)


@dataclass
class Field:
    """Nodal vector field, ``values`` of shape (num_nodes, dim)."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float).reshape(
            self.mesh.num_nodes, self.mesh.dim)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "Field":
        return cls(mesh, np.zeros((mesh.num_nodes, mesh.dim)))

    @classmethod
    def from_function(cls, mesh: Mesh, fn) -> "Field":
        """Sample ``fn(x) -> (num_points, dim)`` at the nodes."""
        return cls(mesh, np.asarray(fn(mesh.coords), dtype=float))

    @classmethod
    def from_flat(cls, mesh: Mesh, flat) -> "Field":
        return cls(mesh, np.asarray(flat, dtype=float).reshape(-1, mesh.dim))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def is_conforming(self) -> bool:
        return bool(np.all(self.values[self.mesh.boundary] == 0.0))

    def conforming(self) -> "Field":
        vals = self.values.copy()
        vals[self.mesh.boundary] = 0.0
        return Field(self.mesh, vals)

    def copy(self) -> "Field":
        return Field(self.mesh, self.values.copy())

    # -- JSON --------------------------------------------------------------
    def to_json(self) -> dict:
        m = self.mesh
        return {"dim": m.dim, "n": m.n, "L": m.L,
                "values": [float(v) for v in self.values.ravel()]}

    @classmethod
    def from_json(cls, data: dict, mesh: Mesh = None) -> "Field":
        try:
            dim, n, L = int(data["dim"]), int(data["n"]), float(data["L"])
            values = np.asarray(data["values"], dtype=float).ravel()
        except (KeyError, TypeError, ValueError) as exc:
            raise MeshMismatchError(f"malformed field JSON: {exc}") from None
        if mesh is None:
            mesh = Mesh(dim, n, L)
        elif (dim, n, L) != mesh.key:
            raise MeshMismatchError(
                f"field shape (dim={dim}, n={n}, L={L}) does not match mesh "
                f"(dim={mesh.dim}, n={mesh.n}, L={mesh.L})")
        expected = mesh.num_nodes * mesh.dim
        if values.size != expected:
            raise MeshMismatchError(
                f"field has {values.size} values, mesh needs {expected}")
        return cls(mesh, values)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path, mesh: Mesh = None) -> "Field":
        return cls.from_json(json.loads(Path(path).read_text()), mesh)


def _check(mesh: Mesh, *flds):
    for f in flds:
        if isinstance(f, Field) and f.mesh != mesh:
            raise MeshMismatchError(f"field on {f.mesh} used with {mesh}")


def _flat(mesh, u):
    arr = u.flat if isinstance(u, Field) else np.asarray(u, dtype=float).ravel()
    if arr.size != mesh.num_dofs:
        raise MeshMismatchError(f"expected {mesh.num_dofs} dofs, got {arr.size}")
    return arr


# -- pointwise quantities ---------------------------------------------------

def sym_gradients(mesh: Mesh, u) -> np.ndarray:
    """Du at every quadrature point: (num_cells, nq, d, d)."""
    _check(mesh, u)
    loc = _flat(mesh, u)[mesh.cell_dofs]
    return np.einsum("ck,qkij->cqij", loc, mesh.strain_basis)


def center_sym_gradients(mesh: Mesh, u) -> np.ndarray:
    _check(mesh, u)
    loc = _flat(mesh, u)[mesh.cell_dofs]
    return np.einsum("ck,kij->cij", loc, mesh.center_strain_basis)


def sym_gradient_at(mesh: Mesh, u, cell: int, qp: int) -> SymTensor:
    if not (0 <= cell < mesh.num_cells):
        raise IndexError(f"cell {cell} out of range")
    if not (0 <= qp < len(mesh.qp_weights)):
        raise IndexError(f"quadrature point {qp} out of range")
    _check(mesh, u)
    loc = _flat(mesh, u)[mesh.cell_dofs[cell]]
    return SymTensor.from_matrix(np.einsum("k,kij->ij", loc, mesh.strain_basis[qp]))


def values_at_qp(mesh: Mesh, f) -> np.ndarray:
    """Q1 interpolant of a nodal field at the quadrature points: (nc, nq, d)."""
    _check(mesh, f)
    vals = _flat(mesh, f).reshape(-1, mesh.dim)[mesh.cells]     # (nc, nn, d)
    return np.einsum("qa,cai->cqi", mesh.shape_values, vals)


def load_vector(mesh: Mesh, f) -> np.ndarray:
    """Consistent load vector int f . phi_k over all dofs."""
    _check(mesh, f)
    vals = _flat(mesh, f).reshape(-1, mesh.dim)
    return np.asarray(mesh.scalar_mass @ vals).ravel()


def l2_norm_sq(mesh: Mesh, u) -> float:
    """Lumped-mass discrete L^2 norm squared."""
    vals = _flat(mesh, u).reshape(-1, mesh.dim)
    return float(np.sum(mesh.lumped_mass[:, None] * vals * vals))


# -- assembly ---------------------------------------------------------------

def _energy_flat(mesh, ap, u, b):
    t = _norm(sym_gradients(mesh, u))
    return float(np.sum(mesh.qp_weights * ua_eval(ap, t)) - u @ b)


def assemble_energy(mesh: Mesh, ap: AApprox, u, f) -> float:
    """sum over cells and Gauss points of w [omega^A(|Du|) - f.u]."""
    _check(mesh, u, f)
    return _energy_flat(mesh, ap, _flat(mesh, u), load_vector(mesh, f))


def _gradient_full(mesh, ap, u, b):
    P = sym_gradients(mesh, u)
    t = _norm(P)
    a = np.where(t == 0.0, 0.0, _a_profile(ap, t, "approx"))
    S = a[..., None, None] * P
    loc = np.einsum("q,cqij,qkij->ck", mesh.qp_weights, S, mesh.strain_basis)
    g = np.bincount(mesh.cell_dofs.ravel(), weights=loc.ravel(),
                    minlength=mesh.num_dofs)
    return g - b


def assemble_gradient(mesh: Mesh, ap: AApprox, u, f) -> np.ndarray:
    """Energy gradient restricted to interior dofs."""
    _check(mesh, u, f)
    g = _gradient_full(mesh, ap, _flat(mesh, u), load_vector(mesh, f))
    return g[mesh.interior_dofs]


def _hessian_flat(mesh, ap, u, diag_shift=None):
    P = sym_gradients(mesh, u)
    t = _norm(P)
    if ap.params.delta == 0.0:
        raise SingularityError("Hessian assembly needs delta > 0")
    a = _a_profile(ap, t, "approx")
    coef = np.where(t == 0.0, 0.0, _radial_coef(ap, t))
    w = mesh.qp_weights
    PB = np.einsum("cqij,qkij->cqk", P, mesh.strain_basis)
    loc = np.einsum("q,cq,qkl->ckl", w, a, mesh.strain_gram)
    loc += np.einsum("q,cq,cqk,cql->ckl", w, coef, PB, PB)
    ri, ci, keep = mesh._hess_pattern
    nint = len(mesh.interior_dofs)
    H = sp.coo_matrix((loc.ravel()[keep], (ri, ci)), shape=(nint, nint)).tocsr()
    upper = sp.triu(H, format="csr")
    H = (upper + sp.triu(H, k=1, format="csr").T).tocsr()
    if diag_shift is not None:
        H = (H + sp.diags(diag_shift)).tocsr()
    H.sort_indices()
    return H


def stiffness_matrix(mesh: Mesh) -> sp.csr_matrix:
    """Constant bilinear form int Dphi_k : Dphi_l on interior dofs (p = 2)."""
    if "_stiffness" not in mesh.__dict__:
        loc = np.einsum("q,qkl->kl", mesh.qp_weights, mesh.strain_gram)
        ri, ci, keep = mesh._hess_pattern
        data = np.broadcast_to(loc, (mesh.num_cells,) + loc.shape).ravel()[keep]
        nint = len(mesh.interior_dofs)
        K = sp.coo_matrix((data, (ri, ci)), shape=(nint, nint)).tocsr()
        K = (sp.triu(K, format="csr") + sp.triu(K, k=1, format="csr").T).tocsr()
        K.sort_indices()
        mesh.__dict__["_stiffness"] = K
    return mesh.__dict__["_stiffness"]


def assemble_hessian(mesh: Mesh, ap: AApprox, u) -> sp.csr_matrix:
    """Sparse symmetric Hessian of the energy on interior dofs."""
    _check(mesh, u)
    return _hessian_flat(mesh, ap, _flat(mesh, u))


def energy_change(mesh: Mesh, ap: AApprox, u, step, b, extra=()) -> float:
    """E(u + step) - E(u), resolved far below the rounding level of E itself.

    The pointwise increments of omega^A are integrated over the short radial
    intervals rather than differenced, so descent remains decidable when the
    Newton decrement is tiny compared with |E|.  ``extra`` holds additional
    increment terms (e.g. from a mass term) summed together with the rest.
    """
    P0 = sym_gradients(mesh, u)
    dP = sym_gradients(mesh, step)
    t0 = _norm(P0)
    t1 = _norm(P0 + dP)
    denom = t0 + t1
    with np.errstate(divide="ignore", invalid="ignore"):
        dt = np.where(denom > 0, _contract(dP, 2.0 * P0 + dP) / denom, 0.0)
    inc = ua_increment(ap, t0, dt)
    terms = np.concatenate([(mesh.qp_weights * inc).ravel(), -(step * b),
                            np.asarray(extra, dtype=float).ravel()])
    return math.fsum(terms)


# -- diagnostics ------------------------------------------------------------

@dataclass
class Diagnostics:
    F_A_sq: float
    F_sq: float
    modular: float
    grad_F_A_sq: float
    grad_F_sq: float
    Du_p: float
    dual_force: float
    dual_weighted: float
    max_Du: float
    Du_2_sq: float = 0.0
    Du_3p: float = 0.0
    f_pdual: float = 0.0

    def as_dict(self):
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


DIAGNOSTIC_NAMES = tuple(f.name for f in fields(Diagnostics))


def _cell_difference_sq(mesh, F):
    """sum over neighbouring cell-centre pairs of h^d |(F_j - F_i)/h|^2."""
    n, d, h = mesh.n, mesh.dim, mesh.h
    grid = F.reshape((n,) * d + F.shape[1:])
    total = 0.0
    for axis in range(d):
        diff = np.diff(grid, axis=axis) / h
        total += float(np.sum(diff * diff)) * h ** d
    return total


def quasinorm_report(mesh: Mesh, ap: AApprox, u, f) -> Diagnostics:
    _check(mesh, u, f)
    uf = _flat(mesh, u)
    p, delta = ap.params.p, ap.params.delta
    w = mesh.qp_weights
    P = sym_gradients(mesh, uf)
    t = _norm(P)
    tsq = t * t
    with np.errstate(divide="ignore", invalid="ignore"):
        aA = _a_profile(ap, t, "approx")
        a = _a_profile(ap, t, "exact")
    F_A_sq = np.where(t == 0, 0.0, aA * tsq)
    F_sq = np.where(t == 0, 0.0, a * tsq)

    fq = values_at_qp(mesh, f)
    fn = np.sqrt(np.sum(fq * fq, axis=-1))
    dual_force = conjugate_eval(ap.params, fn)
    if np.any((t == 0) & (delta == 0.0) & (fn > 0)):
        weighted = np.where(t == 0, 0.0, fn * fn / aA)
    else:
        weighted = fn * fn / aA

    Pc = center_sym_gradients(mesh, uf)
    tc = _norm(Pc)
    with np.errstate(divide="ignore", invalid="ignore"):
        sA = np.where(tc == 0, 0.0, np.sqrt(_a_profile(ap, tc, "approx")))
        s = np.where(tc == 0, 0.0, np.sqrt(_a_profile(ap, tc, "exact")))
    FA_c = sA[:, None, None] * Pc
    F_c = s[:, None, None] * Pc

    def integ(x):
        return float(np.sum(w * x))

    return Diagnostics(
        F_A_sq=integ(F_A_sq),
        F_sq=integ(F_sq),
        modular=integ(ua_eval(ap, t)),
        grad_F_A_sq=_cell_difference_sq(mesh, FA_c),
        grad_F_sq=_cell_difference_sq(mesh, F_c),
        Du_p=integ(t ** p),
        dual_force=integ(dual_force),
        dual_weighted=integ(weighted),
        max_Du=float(t.max()) if t.size else 0.0,
        Du_2_sq=integ(tsq),
        Du_3p=integ(t ** (3 * p)) ** (1.0 / (3 * p)),
        f_pdual=integ(fn ** ap.params.p_dual),
    )
