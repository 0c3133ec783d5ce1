import numpy as np
import pytest
import sympy

from pdelta.errors import DomainError, LineSearchFailure, MaxIterations, SolverError
from pdelta.grid import Field, Mesh, assemble_gradient, l2_norm_sq
from pdelta.nfunc import PDeltaParams
from pdelta.operator import build_a_approx
from pdelta.solver import (SolverOptions, builtin_load, linear_oracle, manufactured_load_p2,
                           solve_steady)


def ap_of(p, delta, A=1e6, dim=2):
    return build_a_approx(PDeltaParams(p, delta, dim), A)


@pytest.fixture(scope="module")
def mesh():
    return Mesh(2, 8)


# -- options ---------------------------------------------------------------

@pytest.mark.parametrize("kw", [{"tol_abs": 0.0}, {"armijo_sigma": 1.0},
                                {"backtrack_factor": 0.0}, {"max_newton": -1},
                                {"linear_solver": "lu"}, {"cg_tol": -1.0}])
def test_options_rejected(kw):
    with pytest.raises(DomainError):
        SolverOptions(**kw)


# -- p = 2 -----------------------------------------------------------------

def test_p2_matches_linear_oracle(mesh):
    f = builtin_load(mesh, "smooth")
    sol = solve_steady(mesh, ap_of(2.0, 0.1), f)
    assert sol.newton_iters <= 2
    ref = linear_oracle(mesh, f)
    np.testing.assert_allclose(sol.u.values, ref.values, atol=1e-10)


def test_zero_load_takes_no_steps(mesh):
    sol = solve_steady(mesh, ap_of(1.5, 0.1), Field.zeros(mesh))
    assert sol.newton_iters == 0 and np.all(sol.u.values == 0.0)
    assert sol.energy_history == [0.0]


# -- p < 2 -----------------------------------------------------------------

def test_strict_descent_and_convergence(mesh):
    f = builtin_load(mesh, "smooth")
    ap = ap_of(1.5, 0.01, 64.0)
    sol = solve_steady(mesh, ap, f)
    assert sol.newton_iters > 2
    assert all(d < 0 for d in sol.energy_decrements)
    assert sol.final_gradient_norm <= sol.tolerance
    g = assemble_gradient(mesh, ap, sol.u, f)
    assert np.linalg.norm(g) <= sol.tolerance
    assert np.all(sol.u.values[mesh.boundary] == 0.0)


def test_bitwise_reproducible(mesh):
    f = builtin_load(mesh, "smooth")
    ap = ap_of(1.3, 0.05, 16.0)
    a, b = solve_steady(mesh, ap, f), solve_steady(mesh, ap, f)
    assert np.array_equal(a.u.values, b.u.values)
    assert a.energy_history == b.energy_history


def test_unique_minimizer_from_random_start(mesh):
    f = builtin_load(mesh, "smooth")
    ap = ap_of(1.5, 0.1, 32.0)
    base = solve_steady(mesh, ap, f)
    rng = np.random.Generator(np.random.Philox(11))
    u0 = Field(mesh, rng.standard_normal((mesh.num_nodes, 2))).conforming()
    other = solve_steady(mesh, ap, f, u0=u0)
    assert np.max(np.abs(other.u.values - base.u.values)) < 1e-8


def test_cg_matches_direct(mesh):
    f = builtin_load(mesh, "smooth")
    ap = ap_of(1.5, 0.1, 32.0)
    a = solve_steady(mesh, ap, f, SolverOptions(linear_solver="direct_spd"))
    b = solve_steady(mesh, ap, f, SolverOptions(linear_solver="cg_jacobi"))
    assert np.max(np.abs(a.u.values - b.u.values)) < 1e-8


def test_a_priori_energy_bound_stable_in_A(mesh):
    # int omega^A(|Du|) stays comparable to int omega*(|f|) as A grows
    f = builtin_load(mesh, "smooth")
    ratios = []
    for A in (1.0, 4.0, 16.0, 1e6):
        sol = solve_steady(mesh, ap_of(1.5, 0.1, A), f)
        d = sol.diagnostics
        ratios.append(d.modular / (0.1 ** 1.5 + d.dual_force))
    assert max(ratios) / min(ratios) < 2.0
    assert all(r < 10.0 for r in ratios)


# -- manufactured data -----------------------------------------------------

def _sympy_loads(dim):
    xs = sympy.symbols(f"x0:{dim}")
    prod = sympy.prod(sympy.sin(sympy.pi * x) for x in xs)
    u = [prod] * dim
    G = sympy.Matrix(dim, dim, lambda i, j: sympy.diff(u[i], xs[j]))
    D = (G + G.T) / 2
    f = [-sum(sympy.diff(D[i, j], xs[j]) for j in range(dim)) for i in range(dim)]
    return xs, [sympy.lambdify(xs, sympy.simplify(fi), "numpy") for fi in f]


@pytest.mark.parametrize("dim, name", [(2, "sine2d"), (3, "sine3d")])
def test_manufactured_loads_match_symbolic(dim, name):
    m = Mesh(dim, 4)
    _, fs = _sympy_loads(dim)
    _, f = manufactured_load_p2(m, name)
    x = m.coords
    ref = np.stack([np.broadcast_to(fi(*x.T), (m.num_nodes,)) for fi in fs], axis=1)
    np.testing.assert_allclose(f.values, ref, atol=1e-12)


def test_sine2d_point_value():
    m = Mesh(2, 4)
    _, f = manufactured_load_p2(m, "sine2d")
    k = int(np.flatnonzero(np.all(np.isclose(m.coords, 0.25), axis=1))[0])
    # at (1/4, 1/4): sin^2 = cos^2 = 1/2, so f = pi^2/2 (3/2 - 1/2)
    np.testing.assert_allclose(f.values[k], [np.pi ** 2 / 2] * 2, rtol=1e-14)


def test_manufactured_convergence():
    errs = []
    for n in (8, 16, 32):
        m = Mesh(2, n)
        exact, f = manufactured_load_p2(m, "sine2d")
        sol = solve_steady(m, ap_of(2.0, 0.1), f)
        errs.append(np.sqrt(l2_norm_sq(m, sol.u.values - exact.values)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8)


def test_builtin_load_errors():
    with pytest.raises(DomainError):
        builtin_load(Mesh(2, 4), "nope")
    with pytest.raises(DomainError):
        builtin_load(Mesh(3, 2), "sine2d")


# -- failures --------------------------------------------------------------

def test_max_iterations_carries_history(mesh):
    f = builtin_load(mesh, "smooth")
    with pytest.raises(MaxIterations) as exc:
        solve_steady(mesh, ap_of(1.5, 0.01, 64.0), f, SolverOptions(max_newton=1))
    assert len(exc.value.history) == 2
    tagged = exc.value.tagged("A=1")
    assert isinstance(tagged, MaxIterations) and tagged.tag == "A=1"
    assert "[A=1]" in str(tagged)


def test_line_search_failure_is_solver_error():
    assert issubclass(LineSearchFailure, SolverError)


def test_rejects_bad_inputs(mesh):
    f = builtin_load(mesh, "smooth")
    with pytest.raises(DomainError):
        solve_steady(mesh, ap_of(1.5, 1e-9), f)
    u0 = Field(mesh, np.ones((mesh.num_nodes, 2)))
    with pytest.raises(DomainError):
        solve_steady(mesh, ap_of(1.5, 0.1), f, u0=u0)
    bad = Field(mesh, np.full((mesh.num_nodes, 2), np.nan))
    with pytest.raises(DomainError):
        solve_steady(mesh, ap_of(1.5, 0.1), bad)
