"""Closed-form reference eigenvalues for linear and radially linear cases.

In the regime where a radial profile stays on one branch, the eigenvalue
problem reduces to a Bessel equation and the principal eigenvalue on the
unit ball is ``c ((2 - gamma)/2)^2 j_nu^2`` with ``nu = (n_tilde - 2)/(2 - gamma)``
and ``j_nu`` the first positive zero of ``J_nu``.
"""
from __future__ import annotations


from scipy.optimize import brentq
from scipy.special import jv


def bessel_first_zero(nu: float) -> float:
    """First positive zero of ``J_nu`` for ``nu >= 0``."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    hi = nu + 3.0 * nu ** (1.0 / 3.0) + 4.0
    lo = max(nu, 1e-3)
    # step across the bracket so a sign change is isolated first
    n = 200
    xs = [lo + (hi - lo) * i / n for i in range(n + 1)]
    prev = jv(nu, xs[0])
    for a, b in zip(xs, xs[1:]):
        cur = jv(nu, b)
        if prev == 0:
            return a
        if prev * cur < 0:
            return brentq(lambda x: jv(nu, x), a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
        prev = cur
    raise RuntimeError(f"no zero of J_{nu} found in [{lo}, {hi}]")


def linear_ball_eigenvalue(coefficient: float, n_tilde: float, gamma: float) -> float:
    """Principal eigenvalue of ``c (u'' + (n_tilde - 1) u'/r) + lam r^-gamma u = 0``.

    Unit ball, Dirichlet data, ``0 <= gamma < 2`` and ``n_tilde > 2`` (or
    ``n_tilde >= 1`` when ``gamma < 2`` keeps ``nu`` nonnegative).
    """
    if not gamma < 2:
        raise ValueError("gamma must be below 2")
    h = 2.0 - gamma
    nu = (n_tilde - 2.0) / h
    if nu < 0:
        raise ValueError("n_tilde must be at least 2")
    j = bessel_first_zero(nu)
    return coefficient * (h / 2.0) ** 2 * j * j


def gamma2_limit(coefficient: float, n_tilde: float) -> float:
    """Limit of :func:`linear_ball_eigenvalue` as ``gamma -> 2``."""
    return coefficient * ((n_tilde - 2.0) / 2.0) ** 2


def bessel_zero_check(nu: float) -> float:
    """Residual ``|J_nu(j_nu)|`` at the computed zero, for self-tests."""
    return abs(float(jv(nu, bessel_first_zero(nu))))


__all__ = ["bessel_first_zero", "linear_ball_eigenvalue", "gamma2_limit",
           "bessel_zero_check"]
