import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, strategies as st

from pdelta import checks
from pdelta.errors import DomainError, MeshMismatchError
from pdelta.grid import (Field, Mesh, assemble_energy, assemble_gradient, assemble_hessian,
                         energy_change, l2_norm_sq, load_vector, quasinorm_report,
                         stiffness_matrix, sym_gradient_at, sym_gradients)
from pdelta.nfunc import PDeltaParams, conjugate_eval, omega_eval
from pdelta.operator import build_a_approx


def ap_of(p, delta, A=1e6, dim=2):
    return build_a_approx(PDeltaParams(p, delta, dim), A)


def random_conforming(mesh, rng, scale=1.0):
    return Field(mesh, scale * rng.standard_normal((mesh.num_nodes, mesh.dim))).conforming()


# -- mesh ------------------------------------------------------------------

@pytest.mark.parametrize("dim, n", [(2, 2), (2, 5), (3, 3)])
def test_mesh_counts(dim, n):
    m = Mesh(dim, n, 2.0)
    assert m.num_nodes == (n + 1) ** dim and m.num_cells == n ** dim
    assert m.num_dofs == dim * m.num_nodes
    assert m.boundary.sum() == (n + 1) ** dim - (n - 1) ** dim
    assert len(m.interior_dofs) == dim * (n - 1) ** dim
    # weights integrate 1 exactly over the box
    assert m.qp_weights.sum() * m.num_cells == pytest.approx(2.0 ** dim, rel=1e-14)
    assert m.lumped_mass.sum() == pytest.approx(2.0 ** dim, rel=1e-14)


@pytest.mark.parametrize("args", [(1, 4), (4, 4), (2, 1), (2, 2.5), (2, 4, 0.0),
                                  (2, 4, float("inf"))])
def test_mesh_rejects(args):
    with pytest.raises(DomainError):
        Mesh(*args)


def test_load_vector_integrates_constants():
    m = Mesh(3, 3, 1.5)
    b = load_vector(m, Field(m, np.ones((m.num_nodes, 3))))
    assert b.reshape(-1, 3).sum(axis=0) == pytest.approx([1.5 ** 3] * 3, rel=1e-13)


# -- symmetric gradients ---------------------------------------------------

def test_sym_gradient_of_linear_field():
    m = Mesh(2, 3)
    G = np.array([[1.0, 2.0], [-4.0, 0.5]])
    u = Field.from_function(m, lambda x: x @ G.T)
    sym = 0.5 * (G + G.T)
    P = sym_gradients(m, u)
    np.testing.assert_allclose(P, np.broadcast_to(sym, P.shape), atol=1e-13)
    np.testing.assert_allclose(sym_gradient_at(m, u, 4, 3).matrix(), sym, atol=1e-13)


def test_rigid_motions_have_zero_strain():
    m = Mesh(3, 2)
    W = np.array([[0.0, 1.0, -2.0], [-1.0, 0.0, 3.0], [2.0, -3.0, 0.0]])
    u = Field.from_function(m, lambda x: x @ W.T + np.array([1.0, 2.0, 3.0]))
    assert np.max(np.abs(sym_gradients(m, u))) < 1e-13


def test_sym_gradient_at_index_errors():
    m = Mesh(2, 2)
    u = Field.zeros(m)
    with pytest.raises(IndexError):
        sym_gradient_at(m, u, 4, 0)
    with pytest.raises(IndexError):
        sym_gradient_at(m, u, 0, 4)


# -- energy ----------------------------------------------------------------

def test_energy_of_zero_is_zero():
    m = Mesh(2, 4)
    assert assemble_energy(m, ap_of(1.5, 0.1), Field.zeros(m), Field.zeros(m)) == 0.0


def test_energy_p2_bilinear_oracle():
    # u = (xy, 0) is Q1 on any mesh: |Du|^2 = y^2 + x^2/2 integrates to 1/2
    for n in (2, 5):
        m = Mesh(2, n)
        u = Field.from_function(m, lambda x: np.stack([x[:, 0] * x[:, 1], 0 * x[:, 0]], 1))
        E = assemble_energy(m, ap_of(2.0, 0.3), u, Field.zeros(m))
        assert E == pytest.approx(0.25, rel=1e-13)


def test_energy_linear_field_exact():
    # constant |Du| = t gives omega(t) |Omega|, any p
    m = Mesh(3, 2, 0.5)
    G = np.diag([1.0, -2.0, 0.5])
    u = Field.from_function(m, lambda x: x @ G.T)
    prm = PDeltaParams(1.4, 0.2, 3)
    ref = omega_eval(prm, np.linalg.norm(G)) * 0.5 ** 3
    E = assemble_energy(m, build_a_approx(prm, 100.0), u, Field.zeros(m))
    assert E == pytest.approx(ref, rel=1e-13)


def test_energy_load_term():
    m = Mesh(2, 4)
    rng = np.random.Generator(np.random.Philox(1))
    u = random_conforming(m, rng)
    f = Field(m, rng.standard_normal((m.num_nodes, 2)))
    ap = ap_of(1.5, 0.1)
    diff = assemble_energy(m, ap, u, Field.zeros(m)) - assemble_energy(m, ap, u, f)
    assert diff == pytest.approx(u.flat @ load_vector(m, f), rel=1e-12)


@given(st.floats(0.0, 1.0), st.integers(0, 2 ** 32 - 1))
def test_energy_convex_along_segments(lam, seed):
    m = Mesh(2, 3)
    rng = np.random.Generator(np.random.Philox(seed))
    u, v = random_conforming(m, rng, 3.0), random_conforming(m, rng, 3.0)
    f = Field.zeros(m)
    ap = ap_of(1.3, 0.05, 4.0)
    w = Field(m, lam * u.values + (1 - lam) * v.values)
    lhs = assemble_energy(m, ap, w, f)
    rhs = lam * assemble_energy(m, ap, u, f) + (1 - lam) * assemble_energy(m, ap, v, f)
    assert lhs <= rhs + 1e-12 * max(1.0, abs(rhs))


# -- derivatives -----------------------------------------------------------

def test_gradient_and_hessian_match_finite_differences():
    rng = np.random.Generator(np.random.Philox(2))
    for dim in (2, 3):
        m = Mesh(dim, 3)
        ap = ap_of(1.5, 0.1, 10.0, dim)
        assert checks.gradient_fd_error(rng, m, ap) < 1e-6
        assert checks.hessian_fd_error(rng, m, ap) < 1e-6


def test_gradient_linear_for_p2():
    m = Mesh(2, 4)
    rng = np.random.Generator(np.random.Philox(3))
    u, v = random_conforming(m, rng), random_conforming(m, rng)
    f = Field.zeros(m)
    ap = ap_of(2.0, 0.5)
    gsum = assemble_gradient(m, ap, Field(m, u.values + 2 * v.values), f)
    np.testing.assert_allclose(gsum, assemble_gradient(m, ap, u, f)
                               + 2 * assemble_gradient(m, ap, v, f), atol=1e-12)
    K = stiffness_matrix(m)
    np.testing.assert_allclose(K @ u.flat[m.interior_dofs],
                               assemble_gradient(m, ap, u, f), atol=1e-12)


def test_hessian_p2_is_stiffness():
    m = Mesh(2, 4)
    rng = np.random.Generator(np.random.Philox(4))
    ap = ap_of(2.0, 0.5)
    K = stiffness_matrix(m).toarray()
    for u in (Field.zeros(m), random_conforming(m, rng, 10.0)):
        np.testing.assert_allclose(assemble_hessian(m, ap, u).toarray(), K, atol=1e-12)


def test_hessian_symmetric_positive_definite():
    m = Mesh(2, 4)
    rng = np.random.Generator(np.random.Philox(5))
    H = assemble_hessian(m, ap_of(1.3, 0.01, 8.0), random_conforming(m, rng, 5.0))
    assert abs(H - H.T).max() == 0.0
    # smallest eigenvalue through shift-invert
    lam = spla.eigsh(H.tocsc(), k=1, sigma=0.0, which="LM",
                     return_eigenvectors=False)[0]
    assert lam > 0


def test_energy_change_matches_direct_difference():
    m = Mesh(2, 4)
    rng = np.random.Generator(np.random.Philox(6))
    ap = ap_of(1.5, 0.1, 10.0)
    u = random_conforming(m, rng)
    f = Field(m, rng.standard_normal((m.num_nodes, 2)))
    b = load_vector(m, f)
    for scale in (1.0, 1e-3):
        s = scale * random_conforming(m, rng).flat
        direct = (assemble_energy(m, ap, Field.from_flat(m, u.flat + s), f)
                  - assemble_energy(m, ap, u, f))
        assert energy_change(m, ap, u.flat, s, b) == pytest.approx(direct, rel=1e-8, abs=1e-14)


def test_energy_change_resolves_tiny_steps():
    m = Mesh(2, 4)
    rng = np.random.Generator(np.random.Philox(7))
    ap = ap_of(1.5, 0.1, 10.0)
    u = random_conforming(m, rng)
    f = Field.zeros(m)
    s = 1e-10 * random_conforming(m, rng).flat
    g = np.zeros(m.num_dofs)
    g[m.interior_dofs] = assemble_gradient(m, ap, u, f)
    assert energy_change(m, ap, u.flat, s, load_vector(m, f)) == pytest.approx(g @ s, rel=1e-6)


# -- diagnostics -----------------------------------------------------------

def test_quasinorm_report_zero_field():
    m = Mesh(2, 4)
    f = Field(m, np.ones((m.num_nodes, 2)))
    ap = ap_of(1.5, 0.1)
    d = quasinorm_report(m, ap, Field.zeros(m), f)
    vals = d.as_dict()
    for name, v in vals.items():
        if name in ("dual_force", "dual_weighted", "f_pdual"):
            assert v > 0
        else:
            assert v == 0.0, name
    # f is constant, so omega*(|f|) is integrated exactly
    assert d.dual_force == pytest.approx(conjugate_eval(ap.params, np.sqrt(2.0)), rel=1e-12)


def test_quasinorm_report_p2():
    m = Mesh(2, 5)
    rng = np.random.Generator(np.random.Philox(8))
    u = random_conforming(m, rng)
    d = quasinorm_report(m, ap_of(2.0, 0.2), u, Field.zeros(m))
    assert d.F_sq == pytest.approx(d.Du_2_sq, rel=1e-13)
    assert d.F_A_sq == pytest.approx(d.F_sq, rel=1e-13)
    assert d.modular == pytest.approx(0.5 * d.Du_2_sq, rel=1e-13)
    K = stiffness_matrix(m)
    ui = u.flat[m.interior_dofs]
    assert d.Du_2_sq == pytest.approx(ui @ (K @ ui), rel=1e-12)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0])
def test_dual_force_bound(p):
    # omega*(s) <= C(p) (delta^p + s^p') pointwise, checked on a scalar sweep
    m = Mesh(2, 4)
    for delta in (1e-3, 0.1, 1.0):
        prm = PDeltaParams(p, delta)
        s = np.logspace(-6, 6, 400)
        C = np.max(conjugate_eval(prm, s) / (delta ** p + s ** prm.p_dual))
        assert np.isfinite(C) and C < 10.0
        rng = np.random.Generator(np.random.Philox(9))
        f = Field(m, 5.0 * rng.standard_normal((m.num_nodes, 2)))
        d = quasinorm_report(m, build_a_approx(prm, 1e6), Field.zeros(m), f)
        assert d.dual_force <= C * (delta ** p * m.L ** 2 + d.f_pdual) * (1 + 1e-12)


# -- fields ----------------------------------------------------------------

def test_field_json_roundtrip(tmp_path):
    m = Mesh(3, 2, 0.7)
    rng = np.random.Generator(np.random.Philox(10))
    u = Field(m, rng.standard_normal((m.num_nodes, 3)))
    path = tmp_path / "u.json"
    u.save(path)
    v = Field.load(path, m)
    np.testing.assert_array_equal(u.values, v.values)
    assert Field.load(path).mesh == m


def test_field_mesh_mismatch(tmp_path):
    u = Field.zeros(Mesh(2, 3))
    path = tmp_path / "u.json"
    u.save(path)
    with pytest.raises(MeshMismatchError):
        Field.load(path, Mesh(2, 4))
    with pytest.raises(MeshMismatchError):
        Field.from_json({"dim": 2, "n": 3, "L": 1.0, "values": [0.0]})
    with pytest.raises(MeshMismatchError):
        Field.from_json({"dim": 2})
    with pytest.raises(MeshMismatchError):
        assemble_energy(Mesh(2, 4), ap_of(1.5, 0.1), u, Field.zeros(Mesh(2, 4)))


def test_l2_norm_of_constant():
    m = Mesh(2, 4, 2.0)
    assert l2_norm_sq(m, Field(m, np.ones((m.num_nodes, 2)))) == pytest.approx(8.0)
