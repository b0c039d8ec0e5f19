"""Radial Pucci algebra, dimension-like parameters and closed forms at
gamma = 2.

A radial function contributes two Hessian eigenvalues: ``m = u''`` (once)
and ``p = u'/r`` (``N - 1`` times). Every operator handled here is
piecewise linear in each slot, so it is stored through four coefficients

    F(m, p) = a+ m^+ - a- m^- + (N - 1)(b+ p^+ - b- p^-).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DimensionLikeTooSmall,
    NonElliptic,
    NonpositiveRadius,
    UnsupportedOperator,
)

PUCCI_PLUS = "pucci_plus"
PUCCI_MINUS = "pucci_minus"
CONVEX_COMBINATION = "convex_combination"
LAPLACIAN = "laplacian"
CUSTOM = "custom"
KINDS = (PUCCI_PLUS, PUCCI_MINUS, CONVEX_COMBINATION, LAPLACIAN)


@dataclass(frozen=True)
class PucciParams:
    """Ellipticity constants, dimension and the two dimension-like numbers."""

    lambda_min: float
    lambda_max: float
    dim: int
    n_tilde_plus: float
    n_tilde_minus: float

    @property
    def ratio(self) -> float:
        return self.lambda_max / self.lambda_min


def dimension_like(lambda_min: float, lambda_max: float, dim: int,
                   strict: bool = True) -> PucciParams:
    """Build :class:`PucciParams`.

    Parameters
    ----------
    lambda_min, lambda_max : float
        Ellipticity constants ``0 < lambda_min <= lambda_max``.
    dim : int
        Space dimension, at least 2.
    strict : bool, default True
        Reject ``n_tilde_plus <= 2``. Pass ``False`` to allow the borderline
        parameter sets used for gamma < 2 experiments, where the eigenvalue
        theory does not need the standing assumption.

    Raises
    ------
    NonElliptic
        If the constants are not ordered positive reals.
    DimensionLikeTooSmall
        If ``strict`` and ``n_tilde_plus <= 2``.
    """
    lam, big = float(lambda_min), float(lambda_max)
    if not (np.isfinite(lam) and np.isfinite(big)) or lam <= 0 or lam > big:
        raise NonElliptic(
            f"need 0 < lambda_min <= lambda_max, got ({lam}, {big})")
    if int(dim) != dim or dim < 2:
        raise NonElliptic(f"dimension must be an integer >= 2, got {dim}")
    dim = int(dim)
    ntp = (lam / big) * (dim - 1) + 1
    ntm = (big / lam) * (dim - 1) + 1
    if strict and ntp <= 2:
        raise DimensionLikeTooSmall(
            f"n_tilde_plus = {ntp:g} <= 2 for (lambda={lam:g}, "
            f"Lambda={big:g}, N={dim}); use strict=False to override")
    return PucciParams(lam, big, dim, ntp, ntm)


@dataclass(frozen=True)
class PotentialSpec:
    """Singular weight ``(r^2 + eps^2)^(-gamma/2)``; ``smoothing = 0`` is bare."""

    gamma: float
    smoothing: float = 0.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.smoothing >= 0:
            raise ValueError(f"smoothing must be >= 0, got {self.smoothing}")

    def weight(self, r):
        r = np.asarray(r, dtype=float)
        if self.smoothing > 0:
            return (r * r + self.smoothing ** 2) ** (-0.5 * self.gamma)
        return r ** (-self.gamma)


def pucci_plus_radial(second_derivative, slope_over_radius, params: PucciParams):
    """Radial M+: ``L(N-1)p+ - l(N-1)p- + L m+ - l m-``."""
    m = np.asarray(second_derivative, dtype=float)
    p = np.asarray(slope_over_radius, dtype=float)
    lam, big, nm1 = params.lambda_min, params.lambda_max, params.dim - 1
    out = (np.where(p > 0, big * nm1 * p, lam * nm1 * p)
           + np.where(m > 0, big * m, lam * m))
    return out if out.ndim else float(out)


def pucci_minus_radial(second_derivative, slope_over_radius, params: PucciParams):
    """Radial M-, the dual ``-M+(-m, -p)``."""
    m = np.asarray(second_derivative, dtype=float)
    p = np.asarray(slope_over_radius, dtype=float)
    lam, big, nm1 = params.lambda_min, params.lambda_max, params.dim - 1
    out = (np.where(p > 0, lam * nm1 * p, big * nm1 * p)
           + np.where(m > 0, lam * m, big * m))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RadialOperator:
    """Positively 1-homogeneous, monotone radial operator.

    Built-in kinds are piecewise linear and exposed through
    :attr:`coefficients`. A ``custom`` kind wraps an arbitrary callable
    ``func(m, p)``; it must be monotone, 1-homogeneous and sandwiched
    between the Pucci bounds of ``params``.
    """

    params: PucciParams
    kind: str = PUCCI_PLUS
    theta: float | None = None
    func: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == CONVEX_COMBINATION:
            if self.theta is None or not 0.0 <= self.theta <= 1.0:
                raise UnsupportedOperator("convex_combination needs theta in [0, 1]")
        elif self.kind == CUSTOM:
            if self.func is None:
                raise UnsupportedOperator("custom operator needs func")
        elif self.kind not in KINDS:
            raise UnsupportedOperator(f"unknown operator kind {self.kind!r}")

    @classmethod
    def parse(cls, spec: str, params: PucciParams) -> "RadialOperator":
        """Parse ``pucci+``, ``pucci-``, ``laplacian`` or ``mix:theta``."""
        s = spec.strip().lower()
        if s in ("pucci+", PUCCI_PLUS, "m+"):
            return cls(params, PUCCI_PLUS)
        if s in ("pucci-", PUCCI_MINUS, "m-"):
            return cls(params, PUCCI_MINUS)
        if s == LAPLACIAN:
            return cls(params, LAPLACIAN)
        if s.startswith("mix:"):
            try:
                theta = float(s[4:])
            except ValueError:
                raise UnsupportedOperator(f"bad mix weight in {spec!r}") from None
            return cls(params, CONVEX_COMBINATION, theta)
        raise UnsupportedOperator(f"unknown operator {spec!r}")

    @property
    def label(self) -> str:
        if self.kind == CONVEX_COMBINATION:
            return f"mix:{self.theta:g}"
        return {PUCCI_PLUS: "pucci+", PUCCI_MINUS: "pucci-"}.get(self.kind, self.kind)

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        """``(a+, a-, b+, b-)`` of the piecewise-linear form."""
        lam, big = self.params.lambda_min, self.params.lambda_max
        if self.kind == PUCCI_PLUS:
            return big, lam, big, lam
        if self.kind == PUCCI_MINUS:
            return lam, big, lam, big
        if self.kind == LAPLACIAN:
            c = 0.5 * (lam + big)
            return c, c, c, c
        if self.kind == CONVEX_COMBINATION:
            t = self.theta
            hi = t * big + (1 - t) * lam
            lo = t * lam + (1 - t) * big
            return hi, lo, hi, lo
        raise UnsupportedOperator("custom operators have no coefficient form")

    @property
    def is_convex(self) -> bool:
        """True when F is a max of linear operators (a+ >= a-)."""
        a_pos, a_neg, _, _ = self.coefficients
        return a_pos >= a_neg

    def evaluate(self, second_derivative, slope_over_radius):
        if self.kind == CUSTOM:
            return self.func(second_derivative, slope_over_radius)
        m = np.asarray(second_derivative, dtype=float)
        p = np.asarray(slope_over_radius, dtype=float)
        a_pos, a_neg, b_pos, b_neg = self.coefficients
        nm1 = self.params.dim - 1
        out = (np.where(m > 0, a_pos * m, a_neg * m)
               + nm1 * np.where(p > 0, b_pos * p, b_neg * p))
        return out if out.ndim else float(out)

    __call__ = evaluate

    def solve_second_derivative(self, slope_over_radius, target):
        """Return ``m`` with ``evaluate(m, p) == target``."""
        if self.kind == CUSTOM:
            return invert_by_bisection(self, slope_over_radius, target)
        p = np.asarray(slope_over_radius, dtype=float)
        t = np.asarray(target, dtype=float)
        a_pos, a_neg, b_pos, b_neg = self.coefficients
        rest = t - (self.params.dim - 1) * np.where(p > 0, b_pos * p, b_neg * p)
        out = np.where(rest >= 0, rest / a_pos, rest / a_neg)
        return out if out.ndim else float(out)


def invert_by_bisection(operator: RadialOperator, slope_over_radius: float,
                        target: float, rtol: float = 1e-14) -> float:
    """Solve ``operator(m, p) = target`` for ``m`` by bisection.

    The Pucci squeeze brackets the root between the inverses of M- and M+.
    """
    params = operator.params
    p = float(slope_over_radius)
    lo_op = RadialOperator(params, PUCCI_PLUS)
    hi_op = RadialOperator(params, PUCCI_MINUS)
    # M+ >= F gives a lower root, M- <= F an upper one
    lo = float(lo_op.solve_second_derivative(p, target))
    hi = float(hi_op.solve_second_derivative(p, target))
    lo, hi = min(lo, hi), max(lo, hi)
    if lo == hi:
        return lo
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        f_mid = operator.evaluate(mid, p) - target
        if f_mid == 0:
            return mid
        # F is increasing in m
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * max(abs(lo), abs(hi), 1e-300):
            break
    return 0.5 * (lo + hi)


def ode_rhs(r, u, u_prime, params: PucciParams, potential: PotentialSpec,
            operator: RadialOperator | None = None, mu: float = 1.0):
    """Second derivative solving ``F(u'', u'/r) = -mu u w(r)``.

    ``F`` defaults to M+. The branch of the piecewise-linear inverse is
    chosen by the sign of the target after removing the first-order part.

    Raises
    ------
    NonpositiveRadius
        If any ``r <= 0``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise NonpositiveRadius("ode_rhs needs r > 0")
    op = operator if operator is not None else RadialOperator(params, PUCCI_PLUS)
    target = -mu * np.asarray(u, dtype=float) * potential.weight(r)
    return op.solve_second_derivative(np.asarray(u_prime, dtype=float) / r, target)


def _n_tilde(params: PucciParams, operator_kind: str) -> tuple[float, float]:
    if operator_kind == PUCCI_PLUS:
        return params.lambda_max, params.n_tilde_plus
    if operator_kind == PUCCI_MINUS:
        return params.lambda_min, params.n_tilde_minus
    raise UnsupportedOperator(
        f"closed forms exist only for the Pucci operators, got {operator_kind!r}")


def explicit_lambda2(params: PucciParams, operator_kind: str = PUCCI_PLUS) -> float:
    """Eigenvalue at gamma = 2: ``L((N+ - 2)/2)^2`` or ``l((N- - 2)/2)^2``."""
    c, nt = _n_tilde(params, operator_kind)
    return c * (0.5 * (nt - 2)) ** 2


def gamma2_eigenfunction_derivatives(r, params: PucciParams,
                                     operator_kind: str = PUCCI_PLUS,
                                     c1: float = 1.0, c2: float = 0.0):
    """Value, first and second derivative of the gamma = 2 eigenfunction.

    ``u = r^-a (c1 (-ln r) + c2)`` with ``a = (N~ - 2)/2``.

    Returns
    -------
    tuple of ndarray
        ``(u, u', u'')``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise NonpositiveRadius("gamma = 2 eigenfunction needs r > 0")
    if c1 < 0 or c2 < 0 or c1 + c2 <= 0:
        raise ValueError("need c1, c2 >= 0 with c1 + c2 > 0")
    _, nt = _n_tilde(params, operator_kind)
    a = 0.5 * (nt - 2)
    x = c1 * (-np.log(r)) + c2
    ra = r ** (-a)
    u = ra * x
    du = -ra / r * (a * x + c1)
    d2u = ra / (r * r) * ((a + 1) * (a * x + c1) + a * c1)
    return u, du, d2u


def explicit_eigenfunction_gamma2(r, params: PucciParams,
                                  operator_kind: str = PUCCI_PLUS,
                                  c1: float = 1.0, c2: float = 0.0):
    """``r^(-(N~-2)/2) (c1 (-ln r) + c2)``; see
    :func:`gamma2_eigenfunction_derivatives` for derivatives."""
    u = gamma2_eigenfunction_derivatives(r, params, operator_kind, c1, c2)[0]
    return u if np.ndim(u) else float(u)


def gamma2_residual(r, params: PucciParams, operator_kind: str = PUCCI_PLUS,
                    c1: float = 1.0, c2: float = 0.0):
    """``F(u'', u'/r) + lambda_2 u / r^2`` for the explicit eigenfunction."""
    u, du, d2u = gamma2_eigenfunction_derivatives(r, params, operator_kind, c1, c2)
    r = np.asarray(r, dtype=float)
    op = pucci_plus_radial if operator_kind == PUCCI_PLUS else pucci_minus_radial
    return op(d2u, du / r, params) + explicit_lambda2(params, operator_kind) * u / (r * r)


def gamma2_relative_residual(r, params: PucciParams, operator_kind: str = PUCCI_PLUS,
                             c1: float = 1.0, c2: float = 0.0):
    """:func:`gamma2_residual` divided by the size of its terms.

    The terms grow like ``r^(-(N~+2)/2)`` toward the origin, so an absolute
    residual is dominated by rounding; the scale is
    ``Lambda (|u''| + (N - 1)|u'|/r) + lambda_2 |u|/r^2``.
    """
    u, du, d2u = gamma2_eigenfunction_derivatives(r, params, operator_kind, c1, c2)
    r = np.asarray(r, dtype=float)
    lam2 = explicit_lambda2(params, operator_kind)
    scale = (params.lambda_max * (np.abs(d2u) + (params.dim - 1) * np.abs(du) / r)
             + lam2 * np.abs(u) / (r * r))
    return gamma2_residual(r, params, operator_kind, c1, c2) / scale


def regime_constants(operator: RadialOperator) -> dict:
    """Effective ``(c, N~)`` of the two regimes seen by a decreasing profile.

    With ``u' < 0`` the first-order coefficient is ``b-``; the concave
    branch (u'' < 0) uses ``a-`` and the convex branch ``a+``.
    """
    a_pos, a_neg, _, b_neg = operator.coefficients
    nm1 = operator.params.dim - 1
    return {
        "concave": (a_neg, nm1 * b_neg / a_neg + 1),
        "convex": (a_pos, nm1 * b_neg / a_pos + 1),
    }
