import numpy as np
import pytest

from singular_eig.core import (
    LAPLACIAN,
    PUCCI_MINUS,
    PUCCI_PLUS,
    PotentialSpec,
    RadialOperator,
    dimension_like,
    explicit_eigenfunction_gamma2,
    explicit_lambda2,
    gamma2_eigenfunction_derivatives,
    gamma2_relative_residual,
    invert_by_bisection,
    ode_rhs,
    pucci_minus_radial,
    pucci_plus_radial,
    regime_constants,
)
from singular_eig.errors import (
    DimensionLikeTooSmall,
    NonElliptic,
    NonpositiveRadius,
    UnsupportedOperator,
)
from singular_eig.rayleigh import hardy_limit


def test_dimension_like_values():
    p = dimension_like(1, 2, 5)
    assert p.n_tilde_plus == pytest.approx(3.0)
    assert p.n_tilde_minus == pytest.approx(9.0)
    lap = dimension_like(1, 1, 4)
    assert lap.n_tilde_plus == lap.n_tilde_minus == 4


def test_dimension_like_errors():
    with pytest.raises(NonElliptic):
        dimension_like(2, 1, 3)
    with pytest.raises(NonElliptic):
        dimension_like(0, 1, 3)
    with pytest.raises(NonElliptic):
        dimension_like(1, 1, 1)
    with pytest.raises(DimensionLikeTooSmall):
        dimension_like(1, 2, 3)
    assert dimension_like(1, 2, 3, strict=False).n_tilde_plus == 2


def test_pucci_radial_definitions():
    p = dimension_like(1, 2, 5)
    # m > 0, p < 0: M+ = Lambda m + lambda (N-1) p
    assert pucci_plus_radial(1.0, -1.0, p) == pytest.approx(2 - 4)
    assert pucci_minus_radial(1.0, -1.0, p) == pytest.approx(1 - 8)
    m, q = np.random.default_rng(1).normal(size=(2, 50))
    assert np.allclose(pucci_minus_radial(m, q, p), -pucci_plus_radial(-m, -q, p))
    assert np.all(pucci_minus_radial(m, q, p) <= pucci_plus_radial(m, q, p) + 1e-15)


def test_operator_parse_and_coefficients():
    p = dimension_like(1, 2, 5)
    assert RadialOperator.parse("pucci+", p).coefficients == (2, 1, 2, 1)
    assert RadialOperator.parse("pucci-", p).coefficients == (1, 2, 1, 2)
    assert RadialOperator.parse("laplacian", p).coefficients == (1.5, 1.5, 1.5, 1.5)
    mix = RadialOperator.parse("mix:0.25", p)
    assert mix.coefficients == pytest.approx((1.25, 1.75, 1.25, 1.75))
    assert not mix.is_convex
    assert RadialOperator.parse("mix:0.5", p).label == "mix:0.5"
    with pytest.raises(UnsupportedOperator):
        RadialOperator.parse("heat", p)
    with pytest.raises(ValueError):
        RadialOperator.parse("mix:1.5", p)


def test_operator_sandwich_and_homogeneity():
    p = dimension_like(1, 3, 6)
    rng = np.random.default_rng(2)
    m, q = rng.normal(size=(2, 200))
    for spec in ("laplacian", "mix:0.3", "mix:0.8"):
        op = RadialOperator.parse(spec, p)
        f = op.evaluate(m, q)
        assert np.all(f <= pucci_plus_radial(m, q, p) + 1e-12)
        assert np.all(f >= pucci_minus_radial(m, q, p) - 1e-12)
        assert np.allclose(op.evaluate(3 * m, 3 * q), 3 * f)


def test_branch_inversion_roundtrip():
    p = dimension_like(1, 2, 5)
    rng = np.random.default_rng(3)
    for spec in ("pucci+", "pucci-", "mix:0.7", "laplacian"):
        op = RadialOperator.parse(spec, p)
        for q, target in rng.normal(size=(20, 2)):
            m = op.solve_second_derivative(q, target)
            assert op.evaluate(m, q) == pytest.approx(target, abs=1e-12)
            mb = invert_by_bisection(op, q, target)
            assert mb == pytest.approx(m, abs=1e-11)


def test_custom_operator_uses_bisection():
    p = dimension_like(1, 2, 5)
    op = RadialOperator(p, "custom", func=lambda m, q: 0.5 * (pucci_plus_radial(m, q, p)
                                                             + pucci_minus_radial(m, q, p)))
    m = op.solve_second_derivative(0.3, -1.0)
    assert op.evaluate(m, 0.3) == pytest.approx(-1.0, abs=1e-10)


def test_ode_rhs_matches_equation():
    p = dimension_like(1, 2, 5)
    pot = PotentialSpec(1.5)
    r, u, du = 0.3, 0.8, -0.4
    d2u = ode_rhs(r, u, du, p, pot)
    assert pucci_plus_radial(d2u, du / r, p) == pytest.approx(-u * r ** -1.5)
    with pytest.raises(NonpositiveRadius):
        ode_rhs(0.0, u, du, p, pot)


def test_potential_weight():
    assert PotentialSpec(2.0).weight(0.5) == pytest.approx(4.0)
    assert PotentialSpec(2.0, 1.0).weight(0.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        PotentialSpec(-1.0)


@pytest.mark.parametrize("dims,plus,minus", [
    ((1, 1, 4), 1.0, 1.0),
    ((1, 2, 5), 0.5, 12.25),
    ((1, 2, 3), 0.0, 2.25),
])
def test_explicit_lambda2(dims, plus, minus):
    p = dimension_like(*dims, strict=False)
    assert explicit_lambda2(p, PUCCI_PLUS) == pytest.approx(plus)
    assert explicit_lambda2(p, PUCCI_MINUS) == pytest.approx(minus)


def test_hardy_identity():
    p = dimension_like(1, 2, 5)
    assert p.lambda_max * hardy_limit(p) == pytest.approx(explicit_lambda2(p, PUCCI_PLUS))


@pytest.mark.parametrize("c1,c2", [(1.0, 0.0), (0.3, 2.0), (0.0, 1.0)])
def test_gamma2_eigenfunction_residual(c1, c2):
    r = np.logspace(-3, np.log10(0.999), 100)
    for dims in ((1, 1, 4), (1, 2, 5)):
        p = dimension_like(*dims)
        for kind in (PUCCI_PLUS, PUCCI_MINUS):
            res = gamma2_relative_residual(r, p, kind, c1, c2)
            assert np.max(np.abs(res)) < 1e-12


def test_gamma2_derivatives_against_finite_differences():
    p = dimension_like(1, 2, 5)
    r = np.array([0.05, 0.2, 0.7])
    h = 1e-6
    u, du, d2u = gamma2_eigenfunction_derivatives(r, p)
    up = explicit_eigenfunction_gamma2(r + h, p)
    um = explicit_eigenfunction_gamma2(r - h, p)
    assert np.allclose(du, (up - um) / (2 * h), rtol=1e-7)
    assert np.allclose(d2u, (up - 2 * u + um) / h ** 2, rtol=1e-3)
    with pytest.raises(NonpositiveRadius):
        gamma2_eigenfunction_derivatives(0.0, p)


def test_regime_constants_pucci_plus():
    p = dimension_like(1, 2, 5)
    rc = regime_constants(RadialOperator.parse("pucci+", p))
    assert rc["convex"] == pytest.approx((2.0, 3.0))
    assert rc["concave"] == pytest.approx((1.0, 5.0))
    lap = regime_constants(RadialOperator(dimension_like(1, 1, 3), LAPLACIAN))
    assert lap["convex"] == lap["concave"]
