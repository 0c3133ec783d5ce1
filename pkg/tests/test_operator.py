import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from pdelta import checks
from pdelta.errors import DomainError, SingularityError
from pdelta.nfunc import PDeltaParams, empirical_characteristics, omega_eval
from pdelta.operator import (SymTensor, a_small_eval, build_a_approx, ds_apply, f_eval,
                             hammer_ratios, pp_form, s_eval, ua_eval, ua_increment)

ps = st.floats(1.05, 2.0)
deltas = st.sampled_from([1e-4, 0.01, 0.1, 1.0])
As = st.sampled_from([1.0, 3.0, 10.0, 100.0, 1000.0])
sym3 = hnp.arrays(np.float64, (3, 3), elements=st.floats(-50, 50)).map(
    lambda M: 0.5 * (M + M.T))


def ap_of(p, delta, A):
    return build_a_approx(PDeltaParams(p, delta, 3), A)


# -- SymTensor -------------------------------------------------------------

def test_symtensor_roundtrip_and_norm():
    M = np.array([[1.0, 2.0], [0.0, 3.0]])
    T = SymTensor.from_matrix(M)
    np.testing.assert_array_equal(T.matrix(), T.matrix().T)
    np.testing.assert_allclose(T.matrix(), [[1.0, 1.0], [1.0, 3.0]])
    assert T.norm() == pytest.approx(np.sqrt(12.0))
    assert SymTensor.zeros(3).norm() == 0.0
    assert (T + T) == 2 * T and (T - T) == SymTensor.zeros(2)
    assert T.dot(SymTensor.diag(1.0, 0.0)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        SymTensor(2, [1.0, 2.0])


# -- A-approximation -------------------------------------------------------

def test_build_examples():
    ap = build_a_approx(PDeltaParams(2.0, 1.0), 5.0)
    assert (ap.alpha2, ap.alpha1, ap.alpha0) == pytest.approx((0.5, 0.0, 0.0), abs=1e-14)
    ap = build_a_approx(PDeltaParams(1.5, 0.0), 1.0)
    assert (ap.alpha2, ap.alpha1, ap.alpha0) == pytest.approx((0.25, 0.5, -1 / 12), rel=1e-14)
    assert ua_eval(ap, 4.0) == pytest.approx(71.0 / 12.0, rel=1e-14)
    assert ua_eval(ap, 7.0, 2) == 2 * ap.alpha2


def test_continuity_at_threshold():
    prm = PDeltaParams(1.3, 0.01)
    ap = build_a_approx(prm, 7.0)
    for k in range(3):
        tail = ua_eval(ap, 7.0 * (1 + 1e-15), k)
        assert tail == pytest.approx(omega_eval(prm, 7.0, k), rel=1e-10)
    assert ap.alpha2 > 0


def test_build_rejects_small_A():
    with pytest.raises(DomainError):
        build_a_approx(PDeltaParams(1.5, 0.1), 0.5)
    with pytest.raises(DomainError):
        ua_eval(build_a_approx(PDeltaParams(1.5, 0.1), 2.0), -1.0)


@given(ps, deltas, As, st.floats(0.0, 1e6))
def test_ua_below_threshold_is_omega(p, delta, A, t):
    prm = PDeltaParams(p, delta)
    ap = build_a_approx(prm, A)
    if t <= A:
        assert ua_eval(ap, t) == omega_eval(prm, t)


def test_a_small_examples():
    p, d, A = 1.4, 0.2, 10.0
    ap = build_a_approx(PDeltaParams(p, d), A)
    assert a_small_eval(ap, A) == pytest.approx((d + A) ** (p - 2), rel=1e-14)
    limit = (d + A) ** (p - 3) * (d + (p - 1) * A)
    assert a_small_eval(ap, 1e12) == pytest.approx(limit, rel=1e-6)
    ap2 = build_a_approx(PDeltaParams(2.0, 0.3), 4.0)
    np.testing.assert_allclose(a_small_eval(ap2, np.logspace(-3, 6, 20)), 1.0, rtol=1e-14)
    assert a_small_eval(ap, 0.0) == pytest.approx(d ** (p - 2))
    with pytest.raises(SingularityError):
        a_small_eval(build_a_approx(PDeltaParams(1.5, 0.0), 1.0), 0.0)


def test_lemma_bounds_grid():
    flags = checks.lemma_bounds()
    assert all(flags.values()), flags


def test_aA_preserves_characteristics():
    grid = np.logspace(-8, 8, 400)
    for p in (1.1, 1.5, 1.9):
        for A in (1.0, 10.0, 1000.0):
            prm = PDeltaParams(p, 0.1)
            ap = build_a_approx(prm, A)
            est = empirical_characteristics(prm, grid, lambda t, k: ua_eval(ap, t, k))
            assert p - 1 - 1e-9 <= est.gamma1 <= est.gamma2 <= 1 + 1e-9


@given(ps, deltas, As, st.floats(1e-3, 1e4), st.floats(0.0, 100.0))
def test_ua_scaling(p, delta, A, t, lam):
    ap = build_a_approx(PDeltaParams(p, delta), A)
    assert ua_eval(ap, lam * t) <= max(lam, lam * lam) * ua_eval(ap, t) * (1 + 1e-10)


def test_lower_quadratic_bound():
    for p, d, A in checks._combos():
        ap = build_a_approx(PDeltaParams(p, d), A)
        t = checks.T_GRID
        assert np.all(0.5 * (p - 1) * (d + A) ** (p - 2) * t * t <= ua_eval(ap, t) * (1 + 1e-12))


@given(ps, deltas, As, st.floats(0.0, 1e4), st.floats(-1e3, 1e3))
def test_ua_increment(p, delta, A, t0, dt):
    ap = build_a_approx(PDeltaParams(p, delta), A)
    t1 = max(t0 + dt, 0.0)
    inc = ua_increment(ap, t0, t1 - t0)
    direct = ua_eval(ap, t1) - ua_eval(ap, t0)
    scale = max(ua_eval(ap, t0), ua_eval(ap, t1), 1e-300)
    assert abs(inc - direct) <= 1e-12 * scale


def test_ua_increment_resolves_tiny_steps():
    ap = build_a_approx(PDeltaParams(1.5, 0.1), 10.0)
    t0, h = 3.0, 1e-13
    assert ua_increment(ap, t0, h) == pytest.approx(omega_eval(ap.params, t0, 1) * h, rel=1e-6)


# -- S, F ------------------------------------------------------------------

def test_s_and_f_examples():
    ap = build_a_approx(PDeltaParams(1.5, 1.0, 3), 100.0)
    P = SymTensor.diag(3.0, 0.0, 0.0)
    assert s_eval(ap, P, "exact").matrix() == pytest.approx(0.5 * P.matrix())
    assert f_eval(ap, P, "exact").matrix() == pytest.approx(4 ** -0.25 * P.matrix())
    assert s_eval(ap, SymTensor.zeros(3)) == SymTensor.zeros(3)
    assert f_eval(ap, SymTensor.zeros(3)) == SymTensor.zeros(3)
    ap2 = build_a_approx(PDeltaParams(2.0, 0.5, 3), 3.0)
    Q = SymTensor.diag(1.0, -2.0, 7.0)
    assert s_eval(ap2, Q).matrix() == pytest.approx(Q.matrix())
    assert f_eval(ap2, Q).matrix() == pytest.approx(Q.matrix())


def test_degenerate_zero_tensor():
    ap = build_a_approx(PDeltaParams(1.5, 0.0, 2), 1.0)
    assert s_eval(ap, SymTensor.zeros(2), "exact") == SymTensor.zeros(2)
    with pytest.raises(SingularityError):
        ds_apply(ap, SymTensor.zeros(2), SymTensor.diag(1.0, 0.0))


def test_f_is_tensor_valued():
    ap = build_a_approx(PDeltaParams(1.5, 0.1, 2), 10.0)
    P = np.array([[1.0, 2.0], [2.0, -3.0]])
    F = f_eval(ap, P, "exact")
    t = np.linalg.norm(P)
    np.testing.assert_allclose(F, np.sqrt((0.1 + t) ** -0.5) * P)


@given(ps, deltas, As, sym3)
def test_s_matches_exact_below_threshold(p, delta, A, M):
    ap = ap_of(p, delta, A)
    if np.linalg.norm(M) <= A:
        np.testing.assert_array_equal(s_eval(ap, M), s_eval(ap, M, "exact"))


def test_compact_set_convergence():
    rng = np.random.Generator(np.random.Philox(5))
    P = checks._rand_sym(rng, 500, 3) * rng.uniform(0, 50, 500)[:, None, None]
    for A in (50.0, 100.0, 1e4):
        ap = ap_of(1.5, 0.1, A)
        np.testing.assert_array_equal(s_eval(ap, P), s_eval(ap, P, "exact"))


@given(ps, deltas, As, sym3)
def test_s_growth_bound(p, delta, A, M):
    ap = ap_of(p, delta, A)
    S = s_eval(ap, M)
    assert np.linalg.norm(S) <= delta ** (p - 2) * np.linalg.norm(M) * (1 + 1e-12)


def test_F_vs_FA_and_modular_sweeps():
    rng = np.random.Generator(np.random.Philox(6))
    P = checks._rand_sym(rng, 4000, 3) * (10.0 ** rng.uniform(-4, 4, 4000))[:, None, None]
    t = np.linalg.norm(P, axis=(-2, -1))
    for p in (1.1, 1.5, 1.9):
        lo_F, mod_lo, mod_hi = np.inf, np.inf, 0.0
        for d in (1e-4, 0.1, 1.0):
            for A in (1.0, 10.0, 100.0, 1000.0):
                ap = ap_of(p, d, A)
                FA = np.sum(f_eval(ap, P) ** 2, axis=(-2, -1))
                F = np.sum(f_eval(ap, P, "exact") ** 2, axis=(-2, -1))
                lo_F = min(lo_F, float(np.min(FA / F)))
                q = FA / ua_eval(ap, t)
                mod_lo, mod_hi = min(mod_lo, q.min()), max(mod_hi, q.max())
        # one constant per p, uniform in A and delta
        assert lo_F >= p - 1 - 1e-12
        assert 1.0 - 1e-12 <= mod_lo and mod_hi <= 2.0 / (p - 1) + 1e-12


# -- derivative and quadratic form -----------------------------------------

def test_ds_apply_examples():
    ap2 = ap_of(2.0, 0.1, 5.0)
    P, Q = SymTensor.diag(1.0, 2.0, 3.0), SymTensor.from_matrix(np.eye(3) + 0.5)
    assert ds_apply(ap2, P, Q).matrix() == pytest.approx(Q.matrix())
    assert pp_form(ap2, P, Q) == pytest.approx(Q.norm() ** 2)
    ap = ap_of(1.5, 0.1, 5.0)
    P = SymTensor.diag(2.0, 0.0, 0.0)
    Q = SymTensor.diag(0.0, 1.0, 0.0)
    a = a_small_eval(ap, 2.0)
    assert ds_apply(ap, P, Q).matrix() == pytest.approx(a * Q.matrix())
    assert pp_form(ap, P, SymTensor.zeros(3)) == 0.0
    Z = SymTensor.zeros(3)
    assert ds_apply(ap, Z, Q).matrix() == pytest.approx(0.1 ** -0.5 * Q.matrix())


@given(ps, deltas, As, sym3, sym3)
def test_ds_apply_finite_difference(p, delta, A, P, Q):
    if np.linalg.norm(P) < 1e-3 or np.linalg.norm(Q) == 0:
        return
    ap = ap_of(p, delta, A)
    Q = Q / np.linalg.norm(Q)
    h = 1e-6 * (1 + np.linalg.norm(P))
    fd = (s_eval(ap, P + h * Q) - s_eval(ap, P - h * Q)) / (2 * h)
    ds = ds_apply(ap, P, Q)
    assert np.linalg.norm(fd - ds) <= 1e-6 * np.linalg.norm(ds)


@given(ps, deltas, As, sym3, sym3)
def test_pp_form_lower_bound(p, delta, A, P, Q):
    ap = ap_of(p, delta, A)
    a = a_small_eval(ap, np.linalg.norm(P))
    # gamma_3 = p - 1 for the canonical potential
    assert pp_form(ap, P, Q) >= (p - 1) * a * np.sum(Q * Q) * (1 - 1e-10)


# -- hammer ratios ---------------------------------------------------------

def test_hammer_p2_is_one():
    rng = np.random.Generator(np.random.Philox(7))
    P, Q = checks.random_pairs(rng, 1000, 3)
    r1, r2 = hammer_ratios(ap_of(2.0, 0.1, 10.0), P, Q)
    np.testing.assert_allclose(r1, 1.0, atol=1e-12)
    np.testing.assert_allclose(r2, 1.0, atol=1e-12)


def test_hammer_small_P_taylor_limit():
    ap = ap_of(1.5, 1.0, 10.0)
    E = SymTensor.diag(1.0, 0.0, 0.0)
    r = [hammer_ratios(ap, s * E, SymTensor.zeros(3)) for s in (1e-2, 1e-4, 1e-6)]
    # with Q = 0 both the product and |F^A(P)|^2 equal a(|P|)|P|^2
    assert all(abs(r1 - 1.0) < 1e-14 for r1, _ in r)
    # r2 = a(t)/a(2t) = ((1+2t)/(1+t))^(1/2) = 1 + t/2 + O(t^2)
    for s, (_, r2) in zip((1e-2, 1e-4, 1e-6), r):
        assert r2 - 1.0 == pytest.approx(s / 2, rel=2 * s)


def test_hammer_degenerate_pair():
    with pytest.raises(DomainError):
        hammer_ratios(ap_of(1.5, 0.1, 1.0), SymTensor.diag(1, 2, 3), SymTensor.diag(1, 2, 3))


@given(ps, deltas, As, sym3, sym3)
def test_monotonicity(p, delta, A, P, Q):
    if np.linalg.norm(P - Q) == 0:
        return
    ap = ap_of(p, delta, A)
    mono = np.sum((s_eval(ap, P) - s_eval(ap, Q)) * (P - Q))
    assert mono > 0
    r1, r2 = hammer_ratios(ap, P, Q)
    assert 0 < r1 < np.inf and 0 < r2 < np.inf


def test_hammer_certificate_small():
    cert = checks.hammer_certificate(checks.make_rng(0, 0), 1.5, samples=2000)
    assert cert.passed
    lo1, hi1, lo2, hi2 = cert.bounds
    assert 0 < lo1 <= 1 <= hi1 and 0 < lo2 <= hi2
