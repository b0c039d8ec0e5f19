import math

import numpy as np
import pytest

from singular_eig.core import PotentialSpec, RadialOperator, dimension_like
from singular_eig.errors import (
    DivergentIteration,
    NoConvergence,
    PolicyCycle,
    SingularSystem,
    UnsupportedOperator,
)
from singular_eig.fd_eig import (
    DirichletProblem,
    _HowardSolver,
    apply_operator,
    fd_principal_eigenvalue,
    linear_radial_solve,
    make_grid,
    pucci_dirichlet_solve,
    stability_sweep,
)

from oracle_values import PI2, torsion_ball, torsion_weighted

P = dimension_like(1, 2, 5)
PLUS = RadialOperator.parse("pucci+", P)
MINUS = RadialOperator.parse("pucci-", P)


def test_grid_layout():
    pot = PotentialSpec(1.5, 1e-3)
    g = make_grid(0, 200, pot)
    assert g.is_ball
    assert g.nodes[0] == pytest.approx(1e-6)
    assert g.nodes[-1] == 1.0
    assert np.all(np.diff(g.nodes) > 0)
    ring = make_grid(0.1, 200, PotentialSpec(1.5))
    assert not ring.is_ball and ring.nodes[0] == 0.1
    assert make_grid(0, 50, PotentialSpec(2.0, 1e-8)).nodes[0] == pytest.approx(1e-10)


def test_grid_errors():
    with pytest.raises(ValueError):
        make_grid(1.0, 100, PotentialSpec(1.0))
    with pytest.raises(ValueError):
        make_grid(0, 100, PotentialSpec(1.0))
    with pytest.raises(ValueError):
        make_grid(0.1, 4, PotentialSpec(1.0))


def test_linear_solve_torsion_ball():
    grid = make_grid(0, 4096, PotentialSpec(0.0))
    prof = linear_radial_solve(grid, 1.0, 4.0, -1.0)
    assert np.max(np.abs(prof.values - torsion_ball(grid.nodes, 5))) < 1e-10


def test_linear_solve_weighted_torsion():
    pot = PotentialSpec(0.5, 1e-8)
    grid = make_grid(0, 8192, pot)
    r = grid.nodes
    prof = linear_radial_solve(grid, 1.0, 2.0, -r ** -0.5)
    assert np.max(np.abs(prof.values - torsion_weighted(r, 3, 0.5))) < 1e-6


def test_linear_solve_annulus_harmonic():
    # u'' + 2u'/r = 0 with u(0.2) = 1, u(1) = 0
    grid = make_grid(0.2, 2048, PotentialSpec(1.0))
    r = grid.nodes
    prof = linear_radial_solve(grid, 1.0, 2.0, 0.0, inner_value=1.0)
    exact = (1 / r - 1) / (1 / 0.2 - 1)
    assert np.max(np.abs(prof.values - exact)) < 1e-7


def test_linear_solve_rejects_bad_coefficients():
    grid = make_grid(0.2, 100, PotentialSpec(1.0))
    with pytest.raises(SingularSystem):
        linear_radial_solve(grid, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        linear_radial_solve(grid, np.ones(3), 1.0, 1.0)


def test_laplacian_pi_squared():
    p = dimension_like(1, 1, 3)
    pot = PotentialSpec(0.0)
    res = fd_principal_eigenvalue(RadialOperator.parse("laplacian", p), pot,
                                  make_grid(0, 4096, pot))
    assert res.eigenvalue == pytest.approx(PI2, rel=1e-5)
    assert res.engine == "finite_difference"
    assert res.first_zero is None


def test_eigenfunction_positive_and_seed_independent():
    pot = PotentialSpec(1.5, 1e-4)
    grid = make_grid(0, 2048, pot)
    a = fd_principal_eigenvalue(PLUS, pot, grid, seed=1)
    b = fd_principal_eigenvalue(PLUS, pot, grid, seed=2)
    assert a.eigenvalue == pytest.approx(b.eigenvalue, rel=1e-10)
    assert np.max(np.abs(a.profile.values - b.profile.values)) < 1e-8
    assert np.all(a.profile.values[:-1] > 0)
    assert np.max(a.profile.values) == pytest.approx(1.0)


def test_seed_env(monkeypatch):
    pot = PotentialSpec(1.0, 1e-3)
    grid = make_grid(0, 512, pot)
    monkeypatch.setenv("SINGULAR_EIG_SEED", "7")
    env = fd_principal_eigenvalue(PLUS, pot, grid)
    arg = fd_principal_eigenvalue(PLUS, pot, grid, seed=7)
    assert env.diagnostics["history"] == arg.diagnostics["history"]


def test_monotone_in_delta_and_eps():
    by_eps = stability_sweep(PLUS, [(1.5, 0.0, 1e-3), (1.5, 0.0, 1e-2), (1.5, 0.0, 1e-1)],
                             n_nodes=1024)
    assert by_eps.varying == "eps" and by_eps.monotone
    by_delta = stability_sweep(PLUS, [(1.5, 0.05, 0.0), (1.5, 0.1, 0.0), (1.5, 0.3, 0.0)],
                               n_nodes=1024)
    vals = [row["eigenvalue"] for row in by_delta.rows]
    assert vals[0] < vals[1] < vals[2]
    assert by_delta.varying == "delta" and by_delta.monotone


def test_sweep_toward_critical_gamma():
    table = stability_sweep(MINUS, [(1.9, 0.0, 1e-3), (1.99, 0.0, 1e-3), (1.999, 0.0, 1e-3)],
                            n_nodes=1024)
    assert table.varying == "gamma"
    assert table.strictly_decreasing
    assert table.limit is not None
    bad = stability_sweep(MINUS, [(1.5, 0.0, 0.0)], n_nodes=64)
    assert "error" in bad.rows[0] and math.isnan(bad.rows[0]["eigenvalue"])


def test_plus_below_minus():
    pot = PotentialSpec(1.0, 1e-4)
    grid = make_grid(0, 1024, pot)
    plus = fd_principal_eigenvalue(PLUS, pot, grid).eigenvalue
    minus = fd_principal_eigenvalue(MINUS, pot, grid).eigenvalue
    mix = fd_principal_eigenvalue(RadialOperator.parse("mix:0.3", P), pot, grid).eigenvalue
    assert plus < mix < minus


def test_apply_operator_on_quadratic():
    # u = -r^2: u'' = -2, u'/r = -2, so M+ = -2 l - 2 l (N-1) = -10
    r = np.linspace(0.1, 1, 400)
    vals = apply_operator(PLUS, r, -r ** 2)
    assert math.isnan(vals[0]) and math.isnan(vals[-1])
    assert np.allclose(vals[1:-1], -10.0, rtol=1e-10)
    minus = apply_operator(MINUS, r, -r ** 2)
    assert np.allclose(minus[1:-1], -20.0, rtol=1e-10)


def test_custom_operator_unsupported():
    op = RadialOperator(P, "custom", func=lambda m, p: m + p)
    pot = PotentialSpec(1.0, 1e-3)
    with pytest.raises(UnsupportedOperator):
        fd_principal_eigenvalue(op, pot, make_grid(0, 100, pot))


def test_iteration_errors():
    pot = PotentialSpec(1.5, 1e-3)
    grid = make_grid(0, 512, pot)
    with pytest.raises(NoConvergence):
        fd_principal_eigenvalue(PLUS, pot, grid, max_iters=2)
    with pytest.raises(ValueError):
        fd_principal_eigenvalue(PLUS, PotentialSpec(1.0, 1e-3), grid)
    solver = _HowardSolver(PLUS, grid, max_policy_iters=1)
    with pytest.raises(PolicyCycle):
        solver.solve(-grid.weight * np.cos(9 * grid.nodes))


def test_dirichlet_below_and_above_eigenvalue():
    pot = PotentialSpec(1.5, 1e-4)
    grid = make_grid(0, 1024, pot)
    lam = fd_principal_eigenvalue(PLUS, pot, grid).eigenvalue
    u, info = pucci_dirichlet_solve(DirichletProblem(0.5 * lam, -1.0, PLUS, pot), grid,
                                    return_info=True)
    assert np.all(u.values[:-1] > 0)
    assert info["iterations"] > 1
    with pytest.raises(DivergentIteration) as err:
        pucci_dirichlet_solve(DirichletProblem(1.5 * lam, -1.0, PLUS, pot), grid,
                              lambda_estimate=lam)
    norms = err.value.norms
    assert norms[-1] > norms[0]


def test_dirichlet_torsion_matches_linear_solve():
    p = dimension_like(1, 1, 3)
    op = RadialOperator.parse("laplacian", p)
    pot = PotentialSpec(0.0)
    grid = make_grid(0, 2048, pot)
    u = pucci_dirichlet_solve(DirichletProblem(0.0, -1.0, op, pot), grid)
    assert np.max(np.abs(u.values - torsion_ball(grid.nodes, 3))) < 1e-10


def test_dirichlet_validation():
    with pytest.raises(ValueError):
        DirichletProblem(1.0, 0.0, PLUS, PotentialSpec(1.0), beta=-1.0)
