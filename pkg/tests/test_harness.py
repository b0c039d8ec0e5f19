import math

import numpy as np
import pytest

from singular_eig import harness
from singular_eig.core import PotentialSpec, RadialOperator, dimension_like
from singular_eig.errors import BadTau
from singular_eig.fd_eig import DirichletProblem, make_grid, pucci_dirichlet_solve
from singular_eig.ode_shoot import shoot_eigenvalue
from singular_eig.profile import RadialProfile

P = dimension_like(1, 2, 5)
PLUS = RadialOperator.parse("pucci+", P)


@pytest.fixture(scope="module")
def eigen():
    res = shoot_eigenvalue(P, 1.5, PLUS)
    return res.eigenvalue, res.profile


def test_supersolution_constants():
    assert harness.supersolution_residual(1.0, dimension_like(1, 1, 3), 1.0) == pytest.approx(2.0)
    assert harness.supersolution_residual(1.5, P, 0.5) == pytest.approx(4.5)
    with pytest.raises(BadTau):
        harness.supersolution_constant(0.6, P, 1.5)
    with pytest.raises(BadTau):
        harness.supersolution_constant(0.0, P, 1.5)
    # N+ - 1 - |tau - 1| <= 0 for tiny N+
    with pytest.raises(BadTau):
        harness.supersolution_constant(0.05, dimension_like(1, 4, 3, strict=False), 0.0)


def test_residual_defect_on_exact_barrier():
    # M+(D^2(1 - r)) = -2/r in N = 3 with lambda = Lambda = 1
    p = dimension_like(1, 1, 3)
    op = RadialOperator.parse("pucci+", p)
    w = harness.torsion_barrier(np.logspace(-3, 0, 200), 1.0, 1.0, p, 1.0)
    pot = PotentialSpec(1.0)
    assert harness.residual_defect(w, op, pot, -2.0, sense="super")[0] <= 1
    assert harness.residual_defect(w, op, pot, -2.0, sense="sub")[0] <= 1
    # data on the wrong side of -2 is a breach
    assert harness.residual_defect(w, op, pot, -3.0, sense="super")[0] > 1
    assert harness.residual_defect(w, op, pot, -1.0, sense="sub")[0] > 1


def test_comparison_on_eigenfunction(eigen):
    lam, prof = eigen
    u, v, f, g = harness.eigen_comparison_inputs(prof, lam, 1.5, P)
    rep = harness.comparison_check(u, v, f, g, 0.0, PLUS, PotentialSpec(1.5))
    assert rep.passed and not rep.skipped
    assert rep.as_dict()["principle"] == "comparison"


def test_comparison_mutations_are_skipped(eigen):
    lam, prof = eigen
    u, v, f, g = harness.eigen_comparison_inputs(prof, lam, 1.5, P)
    pot = PotentialSpec(1.5)
    bumped = harness.comparison_check(u, harness.shifted_down(v), f, g, 0.0, PLUS, pot)
    assert bumped.skipped and not bumped.passed
    assert "supersolution" in bumped.detail
    neg_beta = harness.comparison_check(u, v, f, g, -1.0, PLUS, pot)
    assert neg_beta.skipped
    swapped = harness.comparison_check(u, v, f, 2 * f, 0.0, PLUS, pot)
    assert swapped.skipped
    with pytest.raises(ValueError):
        harness.comparison_check(u, harness.torsion_barrier(u.radii[::2], 0.5, 1.0, P, 1.5),
                                 f, g, 0.0, PLUS, pot)


def test_comparison_on_ordered_barriers():
    # M+(D^2 (1 - r)) = -2/r, so w and 2w carry data -2 and -4
    p = dimension_like(1, 1, 3)
    op = RadialOperator.parse("pucci+", p)
    pot = PotentialSpec(1.0)
    r = np.logspace(-3, 0, 200)
    w = harness.torsion_barrier(r, 1.0, 1.0, p, 1.0)
    w2 = harness.torsion_barrier(r, 1.0, 2.0, p, 1.0)
    assert harness.comparison_check(w, w2, -2.0, -4.0, 0.0, op, pot).passed
    # reversed roles break f >= g; the check reports the failed hypothesis
    rev = harness.comparison_check(w2, w, -4.0, -2.0, 0.0, op, pot)
    assert rev.skipped and "f >= g" in rev.detail
    assert rev.worst_violation == pytest.approx(1 - r[0])


def test_maximum_principle(eigen):
    lam, prof = eigen
    pot = PotentialSpec(1.5)
    neg = prof.scaled(-1.0)
    rep = harness.maximum_principle_check(0.9 * lam, PLUS, pot, neg, lam)
    assert rep.passed and rep.worst_violation == 0.0
    above = harness.maximum_principle_check(1.1 * lam, PLUS, pot, neg, lam)
    assert above.skipped and "not below" in above.detail
    # the positive eigenfunction is no subsolution when mu < lambda
    pos = harness.maximum_principle_check(0.9 * lam, PLUS, pot, prof, lam)
    assert pos.skipped and not pos.passed
    loose = harness.maximum_principle_check(0.9 * lam, PLUS, pot, neg)
    assert loose.passed and "not checked" in loose.detail


def test_derivative_bounds_subsolution():
    p = dimension_like(1, 2, 3, strict=False)
    op = RadialOperator.parse("pucci+", p)
    pot = PotentialSpec(1.5, 1e-6)
    grid = make_grid(0, 8192, pot)
    u = pucci_dirichlet_solve(DirichletProblem(0.0, 1.0, op, pot), grid)
    rep = harness.derivative_bounds_check(u, p, 1.5, (1.0, 1.0), "subsolution",
                                          r_min=1e-4)
    assert rep.passed, rep.detail
    lo, hi = harness.slope_bounds(p, 1.5, (1.0, 1.0))
    assert 0 < lo < hi
    # a slope off by a factor 3 is caught
    bad = RadialProfile(u.radii, u.values, 3 * u.derivs, 1.5, p)
    assert not harness.derivative_bounds_check(bad, p, 1.5, (1.0, 1.0), r_min=1e-4).passed


def test_derivative_bounds_eigenfunction(eigen):
    lam, prof = eigen
    vals = prof.values[prof.radii <= 0.1]
    rep = harness.derivative_bounds_check(prof, P, 1.5, (lam * vals.min(), lam * vals.max()),
                                          "eigenfunction")
    assert rep.passed
    with pytest.raises(ValueError):
        harness.derivative_bounds_check(prof, P, 1.5, (1.0, 1.0), "other")
    empty = harness.derivative_bounds_check(prof, P, 1.5, (1.0, 1.0), r_max=1e-300)
    assert empty.skipped


def test_sandwich_bounds_degenerate():
    with pytest.raises(ValueError):
        harness.sandwich_bounds(dimension_like(1, 4, 3, strict=False), 1.9, (1.0, 1.0))


def test_simplicity(eigen):
    _, prof = eigen
    assert harness.simplicity_check([prof, prof.scaled(3.0)]).passed
    r = prof.radii
    wobble = RadialProfile(r, prof.values * (1 + 0.1 * r), prof.derivs, 1.5, P)
    rep = harness.simplicity_check([prof, wobble])
    assert not rep.passed and rep.worst_violation > 1e-3
    zero = prof.scaled(0.0)
    assert harness.simplicity_check([prof, zero]).skipped
    with pytest.raises(ValueError):
        harness.simplicity_check([prof])


def test_gamma_gt2_probe():
    op = RadialOperator.parse("pucci-", dimension_like(1, 2, 3, strict=False))
    probe = harness.gamma_gt2_probe(op, 2.5, (0.2, 0.1, 0.05), n_nodes=1024)
    assert probe.strictly_decreasing
    assert probe.decay_exponent > 0
    assert len(probe.rows) == 3
    with pytest.raises(ValueError):
        harness.gamma_gt2_probe(op, 2.0, (0.1, 0.05))
    with pytest.raises(ValueError):
        harness.gamma_gt2_probe(op, 2.5, (0.1,))


def test_operator_values_pointwise_and_discrete(eigen):
    lam, prof = eigen
    exact = harness.operator_values(prof, PLUS)
    w = PotentialSpec(1.5).weight(prof.radii)
    assert np.allclose(exact, -lam * w * prof.values, rtol=1e-6, atol=1e-8)
    bare = RadialProfile(prof.radii, prof.values, prof.derivs, 1.5, P)
    disc = harness.operator_values(bare, PLUS)
    assert math.isnan(disc[-1])
