import math

import mpmath
import pytest
from scipy.special import jn_zeros

from singular_eig.extrapolate import aitken, richardson_gamma_limit
from singular_eig.oracles import (
    bessel_first_zero,
    bessel_zero_check,
    gamma2_limit,
    linear_ball_eigenvalue,
)

from oracle_values import J0_FIRST_ZERO, J1_FIRST_ZERO, PI2


@pytest.mark.parametrize("nu", [0, 1, 2, 5])
def test_integer_order_zeros_match_scipy(nu):
    assert bessel_first_zero(nu) == pytest.approx(jn_zeros(nu, 1)[0], rel=1e-13)


@pytest.mark.parametrize("nu", [0.25, 0.5, 3.7, 40.0])
def test_fractional_order_zeros_match_mpmath(nu):
    ref = float(mpmath.besseljzero(mpmath.mpf(nu), 1))
    assert bessel_first_zero(nu) == pytest.approx(ref, rel=1e-12)
    assert bessel_zero_check(nu) < 1e-12


@pytest.mark.parametrize("nu", [500.0, 5000.0])
def test_large_order_zeros_match_asymptotics(nu):
    # Olver's large-order expansion of the first zero
    t = nu ** (1 / 3)
    ref = nu + 1.8557571 * t + 1.033150 / t - 0.00397 / nu - 0.0908 / t ** 5
    assert bessel_first_zero(nu) == pytest.approx(ref, rel=1e-7)
    assert bessel_zero_check(nu) < 1e-12


def test_half_order_zero_is_pi():
    assert bessel_first_zero(0.5) == pytest.approx(math.pi, rel=1e-14)


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        bessel_first_zero(-0.5)


def test_linear_ball_closed_forms():
    # N = 3, gamma = 0: pi^2; N = 2: j_0^2; N = 4: j_1^2
    assert linear_ball_eigenvalue(1.0, 3.0, 0.0) == pytest.approx(PI2, rel=1e-13)
    assert linear_ball_eigenvalue(1.0, 2.0, 0.0) == pytest.approx(J0_FIRST_ZERO ** 2, rel=1e-13)
    assert linear_ball_eigenvalue(2.0, 4.0, 0.0) == pytest.approx(2 * J1_FIRST_ZERO ** 2, rel=1e-13)


def test_linear_ball_tends_to_gamma2_limit():
    vals = [linear_ball_eigenvalue(1.0, 5.0, 2 - 10.0 ** -k) for k in (3, 5, 7)]
    lim = gamma2_limit(1.0, 5.0)
    gaps = [v - lim for v in vals]
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] / lim < 1e-3


def test_linear_ball_errors():
    with pytest.raises(ValueError):
        linear_ball_eigenvalue(1.0, 3.0, 2.0)
    with pytest.raises(ValueError):
        linear_ball_eigenvalue(1.0, 1.5, 0.0)


def test_richardson_exact_on_polynomials():
    gs = [1.9, 1.99, 1.999]
    s = [(2 - g) ** (2 / 3) for g in gs]
    vals = [3.0 - 2.0 * x + 0.5 * x * x for x in s]
    assert richardson_gamma_limit(gs, vals) == pytest.approx(3.0, abs=1e-10)
    lin = [1.0 + 4.0 * (2 - g) for g in gs[:2]]
    assert richardson_gamma_limit(gs[:2], lin, power=1.0) == pytest.approx(1.0, abs=1e-12)


def test_richardson_improves_bessel_limit():
    gs = (1.9, 1.99, 1.999)
    vals = [linear_ball_eigenvalue(2.0, 3.0, g) for g in gs]
    lim = gamma2_limit(2.0, 3.0)
    ext = richardson_gamma_limit(gs, vals)
    assert abs(ext - lim) < 0.1 * abs(vals[-1] - lim)


def test_richardson_validation():
    with pytest.raises(ValueError):
        richardson_gamma_limit([1.5], [1.0])
    with pytest.raises(ValueError):
        richardson_gamma_limit([1.5, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        richardson_gamma_limit([1.5, 1.5], [1.0, 2.0])


def test_aitken_geometric():
    seq = [1 + 0.5 ** k for k in range(6)]
    assert aitken(seq) == pytest.approx(1.0, abs=1e-14)
    assert aitken([2.0, 2.0, 2.0]) == 2.0
