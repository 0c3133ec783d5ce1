"""Scalar algebra of the N-function omega_{p,delta}(t) = int_0^t (delta+s)^(p-2) s ds.

All evaluators accept scalars or numpy arrays and return the same kind.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CertificationError, DomainError, SingularityError

DELTA_MIN = 1e-8
ROOT_RTOL = 1e-12
QUAD_RTOL = 1e-10

# below this ratio t/delta the closed antiderivative cancels badly
_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 60
_FAR_FIELD = 1e4


@dataclass(frozen=True)
class PDeltaParams:
    p: float
    delta: float
    dim: int = 2

    def __post_init__(self):
        if not (1.0 < self.p <= 2.0):
            raise DomainError(f"p must lie in (1, 2], got {self.p}")
        if not (self.delta >= 0.0) or not np.isfinite(self.delta):
            raise DomainError(f"delta must be finite and >= 0, got {self.delta}")
        if self.dim not in (2, 3):
            raise DomainError(f"dim must be 2 or 3, got {self.dim}")

    @property
    def p_dual(self) -> float:
        return self.p / (self.p - 1.0)

    def require_solver_delta(self):
        if self.delta < DELTA_MIN:
            raise DomainError(
                f"solver paths need delta >= {DELTA_MIN:g}, got {self.delta:g}")
        return self


@dataclass(frozen=True)
class CharacteristicsEstimate:
    gamma1: float
    gamma2: float
    sample_count: int
    t_range: tuple


def _nonneg(t, name="t"):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _omega_unit(x, p):
    """omega_{p,1}(x), accurate to a few ulps for every x >= 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        # sum_k binom(p-2, k) x^(k+2) / (k+2), evaluated from the tail
        coef = [1.0]
        for k in range(1, _SERIES_TERMS):
            coef.append(coef[-1] * (p - 2.0 - (k - 1)) / k)
        acc = np.zeros_like(xs)
        for k in range(_SERIES_TERMS - 1, -1, -1):
            acc = acc * xs + coef[k] / (k + 2)
        out[small] = acc * xs * xs
    big = ~small
    if np.any(big):
        lg = np.log1p(x[big])
        out[big] = np.expm1(p * lg) / p - np.expm1((p - 1.0) * lg) / (p - 1.0)
    return out


def _omega0(p, delta, t):
    """omega_{p,delta}(t); delta may be an array broadcasting against t."""
    delta, t = np.broadcast_arrays(np.asarray(delta, dtype=float),
                                   np.asarray(t, dtype=float))
    out = np.empty(t.shape)
    zero = delta == 0.0
    out[zero] = t[zero] ** p / p
    d, tt = delta[~zero], t[~zero]
    with np.errstate(over="ignore"):
        x = tt / d
    # far from the origin the unscaled antiderivative has no cancellation and
    # avoids overflowing (1+x)^p
    far = x > _FAR_FIELD
    val = np.empty(d.shape)
    val[~far] = d[~far] ** p * _omega_unit(x[~far], p)
    s, df = d[far] + tt[far], d[far]
    with np.errstate(over="ignore"):
        val[far] = (s ** (p - 1.0) * (s / p - df / (p - 1.0))
                    + df ** p / (p * (p - 1.0)))
    out[~zero] = val
    return out


def _omega1(p, delta, t):
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (delta + t) ** (p - 2.0) * t
    return np.where(t == 0.0, 0.0, val)


def _omega2(p, delta, t):
    with np.errstate(divide="ignore", invalid="ignore"):
        return (delta + t) ** (p - 3.0) * ((p - 1.0) * t + delta)


def omega_eval(params: PDeltaParams, t, order: int = 0):
    """Value, first or second derivative of omega at t."""
    arr = _nonneg(t)
    p, delta = params.p, params.delta
    if order == 0:
        val = _omega0(p, delta, arr)
    elif order == 1:
        val = _omega1(p, delta, arr)
    elif order == 2:
        if delta == 0.0 and np.any(arr == 0.0):
            raise SingularityError("omega'' is singular at t=0 when delta=0")
        val = _omega2(p, delta, arr)
    else:
        raise DomainError(f"order must be 0, 1 or 2, got {order}")
    return _out(val, t)


def omega_inverse_derivative(params: PDeltaParams, y, rtol: float = ROOT_RTOL):
    """Solve omega'(s) = y for s by bisection (omega' is strictly increasing)."""
    y = _nonneg(y)
    p, delta = params.p, params.delta
    y1 = np.atleast_1d(y).astype(float)
    hi = np.maximum(1.0, y1 ** (1.0 / (p - 1.0)) * (1.0 + delta))
    lo = np.zeros_like(hi)
    for _ in range(2000):
        short = _omega1(p, delta, hi) < y1
        if not np.any(short):
            break
        hi = np.where(short, 2.0 * hi, hi)
    for _ in range(400):
        active = (hi - lo) > rtol * hi
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        up = _omega1(p, delta, mid) >= y1
        hi = np.where(active & up, mid, hi)
        lo = np.where(active & ~up, mid, lo)
    s = np.where(y1 == 0.0, 0.0, 0.5 * (lo + hi))
    return float(s[0]) if np.ndim(y) == 0 else s.reshape(np.shape(y))


def conjugate_eval(params: PDeltaParams, t):
    """Complementary function omega*(t) = s t - omega(s) with omega'(s) = t."""
    arr = _nonneg(t)
    s = np.asarray(omega_inverse_derivative(params, arr), dtype=float)
    val = s * arr - _omega0(params.p, params.delta, s)
    return _out(np.maximum(val, 0.0), t)


def _adaptive_simpson(fun: Callable[[float], float], a: float, b: float,
                      rtol: float) -> float:
    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb = fun(a), fun(b)
    m = 0.5 * (a + b)
    fm = fun(m)
    whole = simpson(fa, fm, fb, a, b)
    # explicit stack keeps deep refinement near a root singularity safe
    stack = [(a, b, fa, fm, fb, whole, 0)]
    total = 0.0
    scale = abs(whole)
    while stack:
        lo, hi, flo, fmid, fhi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fun(lm), fun(rm)
        left = simpson(flo, flm, fmid, lo, mid)
        right = simpson(fmid, frm, fhi, mid, hi)
        err = left + right - est
        tol = 15.0 * rtol * max(scale, abs(left + right)) * (hi - lo) / (b - a)
        if abs(err) <= tol or depth >= 60:
            total += left + right + err / 15.0
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, depth + 1))
    return total


def shift_eval(params: PDeltaParams, a, t, order: int = 0, method: str = "exact"):
    """Shifted N-function omega_a(t) (order 0) or its derivative (order 1).

    For the canonical omega the shifted derivative simplifies to
    (delta+a+t)^(p-2) t, so omega_a = omega_{p, delta+a}; ``method="simpson"``
    integrates the derivative numerically instead (scalars only).
    """
    a_arr = _nonneg(a, "a")
    t_arr = _nonneg(t)
    p = params.p
    shifted = params.delta + a_arr
    if order == 1:
        val = _omega1(p, shifted, t_arr)
        return _out(val, t if np.ndim(t) else a)
    if order != 0:
        raise DomainError(f"order must be 0 or 1, got {order}")
    if method == "exact":
        return _out(_omega0(p, shifted, t_arr), t if np.ndim(t) else a)
    if method == "simpson":
        if np.ndim(a_arr) or np.ndim(t_arr):
            raise DomainError("simpson shift evaluation is scalar only")
        tf, sh = float(t_arr), float(shifted)
        if tf == 0.0:
            return 0.0
        return _adaptive_simpson(lambda s: (sh + s) ** (p - 2.0) * s if s > 0 else 0.0,
                                 0.0, tf, QUAD_RTOL)
    raise DomainError(f"unknown method {method!r}")


def empirical_characteristics(params: PDeltaParams, t_grid: Sequence[float],
                              profile: Optional[Callable] = None) -> CharacteristicsEstimate:
    """Min and max of t phi''(t) / phi'(t) over the grid.

    ``profile(t, order)`` defaults to omega itself; pass another regular
    N-function (e.g. an A-approximation) to estimate its characteristics.
    """
    grid = np.asarray(t_grid, dtype=float).ravel()
    if grid.size == 0:
        raise DomainError("empty t grid")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise DomainError("t grid must be finite and strictly positive")
    if profile is None:
        def profile(t, order):
            return omega_eval(params, t, order)
    ratio = grid * np.asarray(profile(grid, 2)) / np.asarray(profile(grid, 1))
    if not np.all(np.isfinite(ratio)):
        raise DomainError("characteristic ratio not finite on grid")
    return CharacteristicsEstimate(float(ratio.min()), float(ratio.max()),
                                   int(grid.size), (float(grid.min()), float(grid.max())))


def delta2_estimate(params: PDeltaParams, t_grid: Sequence[float]) -> float:
    """Empirical Delta_2 constant max omega(2t)/omega(t) over the grid."""
    grid = np.asarray(t_grid, dtype=float).ravel()
    grid = grid[grid > 0]
    if grid.size == 0:
        raise DomainError("empty t grid")
    return float(np.max(omega_eval(params, 2.0 * grid) / omega_eval(params, grid)))


def _shift_change_ratio(params, eps, a, b, r, t):
    lhs = shift_eval(params, a, t) - eps * shift_eval(params, a, r)
    base = shift_eval(params, b, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(base > 0, lhs / base, np.where(lhs <= 0, 0.0, np.inf))
    return ratio


def check_shift_change(params: PDeltaParams, eps: float, samples: int = 10_000,
                       seed: int = 0, c_max: float = 1e12) -> float:
    """Certify the change-of-shift inequality
    omega_|P|(t) <= c omega_|Q|(t) + eps omega_|P|(|P-Q|).

    The inequality depends on P, Q only through |P|, |Q| and |P-Q|.  Pass 1
    takes the worst ratio on a dense structured grid of those magnitudes,
    pass 2 on ``samples`` fresh seeded draws; the returned constant is valid on
    both.
    """
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if samples < 1000:
        raise DomainError("need at least 1000 validation samples")
    scale = max(params.delta, 1.0)
    mags = np.concatenate([[0.0], scale * np.logspace(-6, 6, 25)])
    fracs = np.linspace(0.0, 1.0, 11)
    a, b, fr, t = np.meshgrid(mags, mags, fracs, mags, indexing="ij")
    r = np.abs(a - b) + fr * (a + b - np.abs(a - b))
    fit = float(np.max(_shift_change_ratio(params, eps, a, b, r, t)))

    rng = np.random.Generator(np.random.Philox(seed))
    a = scale * 10.0 ** rng.uniform(-6, 6, samples)
    b = scale * 10.0 ** rng.uniform(-6, 6, samples)
    lo, hi = np.abs(a - b), a + b
    r = lo + rng.uniform(0, 1, samples) * (hi - lo)
    t = scale * 10.0 ** rng.uniform(-6, 6, samples)
    fresh = float(np.max(_shift_change_ratio(params, eps, a, b, r, t)))

    c = max(fit, fresh, 0.0)
    if not np.isfinite(c) or c > c_max:
        raise CertificationError(f"no finite c <= {c_max:g} validates (got {c})")
    return c
