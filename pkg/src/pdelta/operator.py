"""The canonical (p,delta)-structure operator S(P) = (delta+|P|)^(p-2) P,
the quantity F, their A-approximations and the directional derivative of S^A.

Tensor arguments may be :class:`SymTensor` instances or numpy arrays of shape
``(..., d, d)`` holding symmetric matrices; results come back in the same form.
The fourth-order derivative of S^A is never formed, only its action.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError, SingularityError
from .nfunc import PDeltaParams, omega_eval


class SymTensor:
    """Symmetric d x d matrix stored by its upper triangle."""

    __slots__ = ("dim", "entries")

    def __init__(self, dim: int, entries):
        entries = tuple(float(e) for e in entries)
        if len(entries) != dim * (dim + 1) // 2:
            raise DomainError(f"need {dim * (dim + 1) // 2} entries for dim {dim}")
        self.dim = dim
        self.entries = entries

    @classmethod
    def from_matrix(cls, M) -> "SymTensor":
        """Symmetric part of an arbitrary square matrix."""
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DomainError("expected a square matrix")
        S = 0.5 * (M + M.T)
        iu = np.triu_indices(M.shape[0])
        return cls(M.shape[0], S[iu])

    @classmethod
    def diag(cls, *values) -> "SymTensor":
        return cls.from_matrix(np.diag(values))

    @classmethod
    def zeros(cls, dim: int) -> "SymTensor":
        return cls(dim, [0.0] * (dim * (dim + 1) // 2))

    def matrix(self) -> np.ndarray:
        M = np.zeros((self.dim, self.dim))
        iu = np.triu_indices(self.dim)
        M[iu] = self.entries
        M.T[iu] = self.entries
        return M

    def dot(self, other: "SymTensor") -> float:
        return float(np.sum(self.matrix() * other.matrix()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix()))

    def __add__(self, other):
        return SymTensor(self.dim, np.add(self.entries, other.entries))

    def __sub__(self, other):
        return SymTensor(self.dim, np.subtract(self.entries, other.entries))

    def __mul__(self, scalar):
        return SymTensor(self.dim, np.multiply(self.entries, float(scalar)))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, SymTensor) and self.dim == other.dim \
            and self.entries == other.entries

    def __repr__(self):
        return f"SymTensor(dim={self.dim}, entries={self.entries})"


def _unwrap(P):
    if isinstance(P, SymTensor):
        return P.matrix(), True
    arr = np.asarray(P, dtype=float)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise DomainError("tensor arrays must have shape (..., d, d)")
    return arr, False


def _wrap(arr, was_sym):
    return SymTensor.from_matrix(arr) if was_sym else arr


def _norm(P):
    return np.sqrt(np.sum(P * P, axis=(-2, -1)))


def _contract(P, Q):
    return np.sum(P * Q, axis=(-2, -1))


@dataclass(frozen=True)
class AApprox:
    """omega below the threshold A, C^2-matched quadratic tail above it."""

    params: PDeltaParams
    A: float
    alpha2: float
    alpha1: float
    alpha0: float


def build_a_approx(params: PDeltaParams, A: float) -> AApprox:
    if not (A >= 1.0) or not np.isfinite(A):
        raise DomainError(f"A must be finite and >= 1, got {A}")
    w0 = omega_eval(params, A, 0)
    w1 = omega_eval(params, A, 1)
    w2 = omega_eval(params, A, 2)
    return AApprox(params, float(A),
                   alpha2=0.5 * w2,
                   alpha1=w1 - w2 * A,
                   alpha0=w0 - w1 * A + 0.5 * w2 * A * A)


def ua_eval(ap: AApprox, t, order: int = 0):
    """omega^A and its first two derivatives."""
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("t must be >= 0")
    tail = arr > ap.A
    below = np.where(tail, 0.0, arr)
    if order == 0:
        head = omega_eval(ap.params, below, 0)
        tl = (ap.alpha2 * arr + ap.alpha1) * arr + ap.alpha0
    elif order == 1:
        head = omega_eval(ap.params, below, 1)
        tl = 2.0 * ap.alpha2 * arr + ap.alpha1
    elif order == 2:
        if ap.params.delta == 0.0 and np.any(arr == 0.0):
            raise SingularityError("(omega^A)'' is singular at t=0 when delta=0")
        head = omega_eval(ap.params, np.where(tail, ap.A, arr), 2)
        tl = np.full_like(arr, 2.0 * ap.alpha2)
    else:
        raise DomainError(f"order must be 0, 1 or 2, got {order}")
    val = np.where(tail, tl, head)
    return float(val) if np.ndim(t) == 0 else val


def _a_profile(ap: AApprox, t, variant: str):
    """a(t) = (delta+t)^(p-2) or a^A(t) = (omega^A)'(t)/t, array version."""
    p, delta = ap.params.p, ap.params.delta
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (delta + t) ** (p - 2.0)
        if variant == "exact":
            return exact
        if variant != "approx":
            raise DomainError(f"variant must be 'exact' or 'approx', got {variant!r}")
        tail = 2.0 * ap.alpha2 + ap.alpha1 / t
    return np.where(t > ap.A, tail, exact)


def _b_profile(ap: AApprox, t):
    """(omega^A)''(t)."""
    p, delta = ap.params.p, ap.params.delta
    with np.errstate(divide="ignore", invalid="ignore"):
        head = (delta + t) ** (p - 3.0) * ((p - 1.0) * t + delta)
    return np.where(t > ap.A, 2.0 * ap.alpha2, head)


def _radial_coef(ap: AApprox, t):
    """((omega^A)''(t) - a^A(t)) / t^2 in cancellation-free form."""
    p, delta = ap.params.p, ap.params.delta
    with np.errstate(divide="ignore", invalid="ignore"):
        head = (p - 2.0) * (delta + t) ** (p - 3.0) / t
        tail = -ap.alpha1 / (t * t * t)
    return np.where(t > ap.A, tail, head)


def a_small_eval(ap: AApprox, t, variant: str = "approx"):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("t must be >= 0")
    if ap.params.delta == 0.0 and np.any(arr == 0.0):
        raise SingularityError("a(0) is infinite when delta=0")
    val = _a_profile(ap, arr, variant)
    return float(val) if np.ndim(t) == 0 else val


def _scaled(ap, P, variant, power):
    t = _norm(P)
    if variant not in ("exact", "approx"):
        raise DomainError(f"variant must be 'exact' or 'approx', got {variant!r}")
    a = _a_profile(ap, t, variant)
    fac = a if power == 1 else np.sqrt(a)
    # S(0) = F(0) = 0 is the continuous extension, also for delta = 0
    fac = np.where(t == 0.0, 0.0, fac)
    return fac[..., None, None] * P


def s_eval(ap: AApprox, P, variant: str = "approx"):
    """S(P) = a(|P|) P (exact) or S^A(P) = a^A(|P|) P (approx)."""
    arr, was = _unwrap(P)
    return _wrap(_scaled(ap, arr, variant, 1), was)


def f_eval(ap: AApprox, P, variant: str = "approx"):
    """F(P) = sqrt(a(|P|)) P or its A-approximated counterpart."""
    arr, was = _unwrap(P)
    return _wrap(_scaled(ap, arr, variant, 0.5), was)


def ds_apply(ap: AApprox, P, Q):
    """Directional derivative dS^A(P)[Q]."""
    Parr, was = _unwrap(P)
    Qarr, _ = _unwrap(Q)
    t = _norm(Parr)
    if ap.params.delta == 0.0 and np.any(t == 0.0):
        raise SingularityError("dS^A is singular at P=0 when delta=0")
    a = _a_profile(ap, t, "approx")
    coef = np.where(t == 0.0, 0.0, _radial_coef(ap, t))
    pq = _contract(Parr, Qarr)
    out = a[..., None, None] * Qarr + (coef * pq)[..., None, None] * Parr
    return _wrap(out, was)


def pp_form(ap: AApprox, P, Q):
    """Quadratic form dS^A(P)[Q] : Q, nonnegative."""
    Parr, _ = _unwrap(P)
    Qarr, _ = _unwrap(Q)
    val = _contract(ds_apply(ap, Parr, Qarr), Qarr)
    return float(val) if np.ndim(val) == 0 else val


def hammer_ratios(ap: AApprox, P, Q) -> Tuple:
    """Ratios of the monotonicity product to its two equivalent expressions.

    r1 = (S^A(P)-S^A(Q)):(P-Q) / |F^A(P)-F^A(Q)|^2
    r2 = (S^A(P)-S^A(Q)):(P-Q) / (a^A(|P|+|P-Q|) |P-Q|^2)
    """
    Parr, _ = _unwrap(P)
    Qarr, _ = _unwrap(Q)
    D = Parr - Qarr
    dn = _norm(D)
    if np.any(dn == 0.0):
        raise DomainError("hammer ratios need P != Q")
    mono = _contract(_scaled(ap, Parr, "approx", 1) - _scaled(ap, Qarr, "approx", 1), D)
    dF = _scaled(ap, Parr, "approx", 0.5) - _scaled(ap, Qarr, "approx", 0.5)
    r1 = mono / _contract(dF, dF)
    r2 = mono / (_a_profile(ap, _norm(Parr) + dn, "approx") * dn * dn)
    if np.ndim(r1) == 0:
        return float(r1), float(r2)
    return r1, r2


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
# relative interval length below which the increment is integrated, not differenced
_SHORT = 0.05


def ua_increment(ap: AApprox, t0, dt):
    """omega^A(t0 + dt) - omega^A(t0) without catastrophic cancellation.

    Short intervals are integrated by Gauss-Legendre on omega', split at the
    threshold A where the integrand changes form; the quadratic tail part is
    integrated exactly.
    """
    t0 = np.asarray(t0, dtype=float)
    dt = np.asarray(dt, dtype=float)
    t0, dt = np.broadcast_arrays(t0, dt)
    t1 = t0 + dt
    lo = np.minimum(t0, t1)
    sign = np.where(dt < 0, -1.0, 1.0)
    length = np.abs(dt)
    A = ap.A
    head_len = np.clip(np.minimum(A - lo, length), 0.0, None)
    tail_start = np.maximum(lo, A)
    tail_len = length - head_len

    out = np.zeros(t0.shape)
    scale = ap.params.delta + lo
    short = (head_len > 0) & (head_len <= _SHORT * np.where(scale > 0, scale, np.inf))
    if np.any(short):
        a = lo[short]
        L = head_len[short]
        nodes = a[:, None] + 0.5 * L[:, None] * (1.0 + _GL_NODES[None, :])
        vals = omega_eval(ap.params, nodes, 1)
        out[short] = 0.5 * L * (vals @ _GL_WEIGHTS)
    long_ = (head_len > 0) & ~short
    if np.any(long_):
        a = lo[long_]
        out[long_] = omega_eval(ap.params, a + head_len[long_]) - omega_eval(ap.params, a)
    has_tail = tail_len > 0
    if np.any(has_tail):
        s = tail_start[has_tail]
        L = tail_len[has_tail]
        out[has_tail] += L * (ap.alpha2 * (2.0 * s + L) + ap.alpha1)
    out = sign * out
    return float(out) if out.ndim == 0 else out
