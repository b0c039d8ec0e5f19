"""Executable checks of the qualitative principles behind the solvers.

Every check recomputes residuals from the raw profile it is given and
returns a :class:`PrincipleReport`; nothing here raises on a failed
principle. A check whose hypotheses do not hold numerically is reported as
skipped (and not passed), so a broken input can never produce a false pass.

Residuals use ``u''`` pointwise when the profile carries it (shooting
output) and otherwise the monotone flux stencil of :mod:`.fd_eig` on the
profile's own nodes, which is exactly the equation the grid solver solves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    PotentialSpec,
    PucciParams,
    RadialOperator,
    pucci_plus_radial,
)
from .errors import BadTau, PreconditionResidualFailure
from .fd_eig import apply_operator, fd_principal_eigenvalue, make_grid
from .profile import RadialProfile

COMPARISON = "comparison"
MAXIMUM = "maximum"
DERIVATIVE_BOUNDS = "derivative_bounds"
SUPERSOLUTION_RESIDUAL = "supersolution_residual"
SIMPLICITY = "simplicity"

RESIDUAL_RTOL = 1e-6
BOUNDARY_CELLS = 2


@dataclass
class PrincipleReport:
    """Outcome of one check.

    ``passed`` is True exactly when the hypotheses held and
    ``worst_violation <= tolerance``.
    """

    principle: str
    passed: bool
    worst_violation: float
    location: float | None
    tolerance: float
    skipped: bool = False
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "principle": self.principle,
            "passed": self.passed,
            "skipped": self.skipped,
            "worst_violation": self.worst_violation,
            "location": self.location,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _as_operator(operator, params: PucciParams | None) -> RadialOperator:
    if isinstance(operator, RadialOperator):
        return operator
    if params is None:
        raise ValueError("params are required when the operator is given by name")
    return RadialOperator.parse(operator, params)


def operator_values(profile: RadialProfile, operator: RadialOperator,
                    return_noise: bool = False):
    """``F(D^2 u)`` at the profile's nodes.

    Pointwise from ``second_derivs`` when available, else the discrete
    operator (the first and last node are NaN then). ``return_noise`` adds
    the rounding-error bound of the evaluation (zero for pointwise values).
    """
    r = profile.radii
    if profile.second_derivs is not None:
        vals = np.asarray(operator.evaluate(profile.second_derivs, profile.derivs / r),
                          dtype=float)
        return (vals, np.zeros_like(vals)) if return_noise else vals
    return apply_operator(operator, r, profile.values, return_noise=return_noise)


def _values_on(spec, r: np.ndarray) -> np.ndarray:
    if isinstance(spec, RadialProfile):
        return spec.sample(r)
    if callable(spec):
        return np.asarray(spec(r), dtype=float) * np.ones_like(r)
    arr = np.asarray(spec, dtype=float)
    return np.broadcast_to(arr, r.shape).astype(float)


def _interior(n: int) -> slice:
    return slice(BOUNDARY_CELLS, n - BOUNDARY_CELLS)


def residual_defect(profile: RadialProfile, operator: RadialOperator,
                    potential: PotentialSpec, rhs, beta: float = 0.0,
                    sense: str = "sub", rtol: float = RESIDUAL_RTOL):
    """Worst breach of a sub- or supersolution inequality.

    ``sub`` means ``F(D^2 u) - beta w u >= rhs * w``; ``super`` reverses it.
    Breaches are measured relative to the local size of both sides, plus
    the rounding noise of evaluating the discrete operator.

    Returns
    -------
    (worst, radius) : tuple
        ``worst`` is the largest breach divided by its allowance, so the
        inequality holds within tolerance when ``worst <= 1``.
    """
    r = profile.radii
    w = potential.weight(r)
    fu, noise = operator_values(profile, operator, return_noise=True)
    lhs = fu - beta * w * profile.values
    target = _values_on(rhs, r) * w
    gap = lhs - target if sense == "sub" else target - lhs
    allowance = rtol * (np.abs(lhs) + np.abs(target)) + noise + 1e-300
    sl = _interior(r.shape[0])
    ratio = np.where(np.isfinite(gap[sl]), -gap[sl] / allowance[sl], 0.0)
    if ratio.size == 0:
        return 0.0, None
    k = int(np.argmax(ratio))
    return float(max(0.0, ratio[k])), float(r[sl][k])


def comparison_check(u: RadialProfile, v: RadialProfile, f, g, beta: float,
                     operator, potential: PotentialSpec,
                     params: PucciParams | None = None,
                     tol: float = 1e-8) -> PrincipleReport:
    """Ordering of a subsolution below a supersolution.

    Hypotheses checked: ``u`` is a subsolution with data ``f``, ``v`` a
    supersolution with data ``g``, ``f >= g``, ``u(1) <= v(1)``,
    ``beta >= 0``. Conclusion asserted: ``u <= v + tol`` at every node.
    """
    op = _as_operator(operator, params or u.params)
    if u.radii.shape != v.radii.shape or not np.allclose(u.radii, v.radii, rtol=1e-14):
        raise ValueError("u and v must share a grid")
    problems = []
    if beta < 0:
        problems.append("beta < 0")
    du, ru = residual_defect(u, op, potential, f, beta, "sub")
    if du > 1:
        problems.append(f"u is not a subsolution (defect {du:.3g} at r={ru:.3g})")
    dv, rv = residual_defect(v, op, potential, g, beta, "super")
    if dv > 1:
        problems.append(f"v is not a supersolution (defect {dv:.3g} at r={rv:.3g})")
    fu, gv = _values_on(f, u.radii), _values_on(g, u.radii)
    if np.any(fu < gv - 1e-14 * np.maximum(np.abs(fu), 1)):
        problems.append("f >= g fails")
    if u.values[-1] > v.values[-1] + tol:
        problems.append("u(1) > v(1)")
    diff = u.values - v.values
    k = int(np.argmax(diff))
    worst = float(max(0.0, diff[k]))
    if problems:
        return PrincipleReport(COMPARISON, False, worst, float(u.radii[k]), tol,
                               True, "; ".join(problems))
    return PrincipleReport(COMPARISON, worst <= tol, worst, float(u.radii[k]), tol)


def supersolution_constant(tau: float, params: PucciParams, gamma: float) -> float:
    """``C = tau Lambda (n_tilde_plus - 1 - |tau - 1|)`` for ``w = 1 - r^tau``."""
    if not (0 < tau <= 2 - gamma):
        raise BadTau(f"tau must lie in (0, 2 - gamma] = (0, {2 - gamma:g}], got {tau}")
    c = tau * params.lambda_max * (params.n_tilde_plus - 1 - abs(tau - 1))
    if c <= 0:
        raise BadTau(f"tau = {tau:g} gives a nonpositive constant {c:g}")
    return c


def supersolution_residual(tau: float, params: PucciParams, gamma: float,
                           n_points: int = 100) -> float:
    """Constant ``C`` with ``M+(D^2 (1 - r^tau)) <= -C r^-gamma`` on the ball.

    The inequality is verified at ``n_points`` log-spaced radii.

    Raises
    ------
    BadTau
        If ``tau`` is outside ``(0, 2 - gamma]``.
    PreconditionResidualFailure
        If the pointwise inequality fails anywhere.
    """
    c = supersolution_constant(tau, params, gamma)
    r = np.logspace(-3, 0, n_points)
    du = -tau * r ** (tau - 1)
    d2u = -tau * (tau - 1) * r ** (tau - 2)
    lhs = pucci_plus_radial(d2u, du / r, params)
    rhs = -c * r ** (-gamma)
    bad = lhs - rhs > 1e-12 * np.abs(rhs)
    if np.any(bad):
        k = int(np.argmax(lhs - rhs))
        raise PreconditionResidualFailure(
            f"inequality fails at r = {r[k]:.3g}: {lhs[k]:.6g} > {rhs[k]:.6g}")
    return c


def torsion_barrier(radii: np.ndarray, tau: float, scale: float,
                    params: PucciParams, gamma: float) -> RadialProfile:
    """Supersolution ``scale (1 - r^tau)`` sampled with exact derivatives."""
    r = np.asarray(radii, dtype=float)
    return RadialProfile(r, scale * (1 - r ** tau), -scale * tau * r ** (tau - 1),
                         gamma, params,
                         -scale * tau * (tau - 1) * r ** (tau - 2), scale)


def maximum_principle_check(mu: float, operator, potential: PotentialSpec,
                            trial: RadialProfile,
                            lambda_estimate: float | None = None,
                            tol: float = 1e-8) -> PrincipleReport:
    """Nonpositivity of subsolutions of ``F(D^2 u) + mu w u >= 0`` below the
    principal eigenvalue.

    Hypotheses checked: the residual inequality, ``u(1) <= 0`` and (when an
    estimate is supplied) ``mu < lambda_estimate``. Conclusion asserted:
    ``u <= tol``.
    """
    op = _as_operator(operator, trial.params)
    problems = []
    if lambda_estimate is not None and not mu < lambda_estimate:
        problems.append(f"mu = {mu:g} is not below the eigenvalue {lambda_estimate:g}")
    d, rd = residual_defect(trial, op, potential, 0.0, -mu, "sub")
    if d > 1:
        problems.append(f"trial is not a subsolution (defect {d:.3g} at r={rd:.3g})")
    if trial.values[-1] > tol:
        problems.append("u(1) > 0")
    k = int(np.argmax(trial.values))
    worst = float(max(0.0, trial.values[k]))
    detail = "" if lambda_estimate is not None else "mu not checked against an estimate"
    if problems:
        return PrincipleReport(MAXIMUM, False, worst, float(trial.radii[k]), tol,
                               True, "; ".join(problems))
    return PrincipleReport(MAXIMUM, worst <= tol, worst, float(trial.radii[k]), tol,
                           detail=detail)


def slope_bounds(params: PucciParams, gamma: float, f_bounds: tuple[float, float]):
    """Slope constants for ``M+(D^2 u) = f r^-gamma`` with ``0 < f``.

    ``inf f / (Lambda (n_tilde_minus - gamma))`` and
    ``sup f / (lambda (N - gamma))``.
    """
    f_lo, f_hi = f_bounds
    lo = f_lo / (params.lambda_max * (params.n_tilde_minus - gamma))
    hi = f_hi / (params.lambda_min * (params.dim - gamma))
    return lo, hi


def sandwich_bounds(params: PucciParams, gamma: float, f_bounds: tuple[float, float]):
    """Slope constants for any operator between ``M-`` and ``M+`` when
    ``F(D^2 v) = f r^-gamma`` with ``f >= 0`` and ``v'(0) = 0``.

    Integrating the flux form gives ``v' = f r^(1-gamma) / D`` with
    ``D = (N - 1) b + (1 - gamma) a`` for coefficients ``a, b`` in
    ``[lambda, Lambda]``; the extremes of ``D`` bound the slope.
    """
    lam, big, nm1 = params.lambda_min, params.lambda_max, params.dim - 1
    if gamma <= 1:
        d_min, d_max = lam * (nm1 + 1 - gamma), big * (nm1 + 1 - gamma)
    else:
        d_min, d_max = lam * nm1 + big * (1 - gamma), big * nm1 + lam * (1 - gamma)
    if d_min <= 0:
        raise ValueError("slope bound degenerates (N - 1) lambda <= (gamma - 1) Lambda")
    return f_bounds[0] / d_max, f_bounds[1] / d_min


def derivative_bounds_check(profile: RadialProfile, params: PucciParams,
                            gamma: float, f_bounds: tuple[float, float],
                            variant: str = "subsolution", r_max: float = 0.1,
                            r_min: float | None = None,
                            rtol: float = 0.05) -> PrincipleReport:
    """Two-sided slope bound ``lo r^(1-gamma) <= u' <= hi r^(1-gamma)`` near 0.

    Parameters
    ----------
    variant : {"subsolution", "eigenfunction"}
        ``subsolution``: ``u`` solves ``M+(D^2 u) = f r^-gamma`` with
        ``f`` in ``f_bounds`` (positive), constants from :func:`slope_bounds`.
        ``eigenfunction``: ``u`` is a positive eigenfunction of any
        sandwiched operator, ``f_bounds`` bounds ``lambda u`` on the window
        and the sign-flipped :func:`sandwich_bounds` apply to ``-u'``.
    r_min : float, optional
        Lower end of the window; nodes below it are ignored (use about
        ten times the smoothing radius for smoothed-potential output).
    """
    r = profile.radii
    sel = r <= r_max
    if r_min is not None:
        sel &= r >= r_min
    if not np.any(sel):
        return PrincipleReport(DERIVATIVE_BOUNDS, False, math.nan, None, rtol, True,
                               "no nodes in the window")
    if variant == "subsolution":
        lo, hi = slope_bounds(params, gamma, f_bounds)
        slope = profile.derivs[sel]
    elif variant == "eigenfunction":
        lo, hi = sandwich_bounds(params, gamma, f_bounds)
        slope = -profile.derivs[sel]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    scaled = slope * r[sel] ** (gamma - 1)
    below = (lo - scaled) / max(abs(lo), 1e-300)
    above = (scaled - hi) / max(abs(hi), 1e-300)
    breach = np.maximum(below, above)
    k = int(np.argmax(breach))
    worst = float(max(0.0, breach[k]))
    detail = f"bracket [{lo:.6g}, {hi:.6g}] on r^(1-gamma) scale"
    return PrincipleReport(DERIVATIVE_BOUNDS, worst <= rtol, worst,
                           float(r[sel][k]), rtol, detail=detail)


def simplicity_check(profiles: Sequence[RadialProfile], tol: float = 1e-3,
                     samples: np.ndarray | None = None) -> PrincipleReport:
    """Eigenfunctions from several sources agree up to a positive scalar.

    Each profile is sampled on a common set of radii, normalized to unit
    sup norm there, and compared against the first.
    """
    if len(profiles) < 2:
        raise ValueError("need at least two profiles")
    if samples is None:
        samples = np.concatenate([np.logspace(-4, -1, 100, endpoint=False),
                                  np.linspace(0.1, 1.0, 300)])
    ref = None
    worst, where = 0.0, None
    for prof in profiles:
        vals = prof.sample(samples)
        peak = vals[np.argmax(np.abs(vals))]
        if peak == 0 or not np.all(np.isfinite(vals)):
            return PrincipleReport(SIMPLICITY, False, math.inf, None, tol, True,
                                   "degenerate profile")
        vals = vals / peak
        if ref is None:
            ref = vals
            continue
        d = np.abs(vals - ref)
        k = int(np.argmax(d))
        if d[k] > worst:
            worst, where = float(d[k]), float(samples[k])
    return PrincipleReport(SIMPLICITY, worst <= tol, worst, where, tol)


@dataclass
class GammaProbe:
    """Annulus eigenvalues past the critical exponent."""

    gamma: float
    deltas: list
    eigenvalues: list
    strictly_decreasing: bool
    decay_exponent: float
    rows: list = field(default_factory=list)


def gamma_gt2_probe(operator: RadialOperator, gamma: float,
                    delta_schedule: Sequence[float], n_nodes: int = 8192) -> GammaProbe:
    """Annulus eigenvalues over shrinking ``delta`` for ``gamma > 2``.

    Reports the values and the log-log slope of eigenvalue against
    ``delta``; no limit is asserted.
    """
    if not gamma > 2:
        raise ValueError(f"the probe needs gamma > 2, got {gamma}")
    deltas = [float(d) for d in delta_schedule]
    if len(deltas) < 2 or any(not (0 < d < 1) for d in deltas):
        raise ValueError("need at least two deltas in (0, 1)")
    pot = PotentialSpec(gamma)
    vals, rows = [], []
    for d in deltas:
        res = fd_principal_eigenvalue(operator, pot, make_grid(d, n_nodes, pot))
        vals.append(res.eigenvalue)
        rows.append({"delta": d, "eigenvalue": res.eigenvalue,
                     "iterations": res.diagnostics["iterations"]})
    order = np.argsort(deltas)[::-1]
    seq = np.asarray(vals)[order]
    dec = bool(np.all(np.diff(seq) < 0))
    slope = float(np.polyfit(np.log(deltas), np.log(vals), 1)[0])
    return GammaProbe(gamma, deltas, vals, dec, slope, rows)


def eigen_comparison_inputs(profile: RadialProfile, eigenvalue: float,
                            gamma: float, params: PucciParams):
    """Data for the comparison check on an eigenfunction.

    ``u`` is the eigenfunction (a subsolution with ``f = -lambda sup u``),
    ``v = L (1 - r^tau)`` with ``tau = 2 - gamma`` and ``L = lambda sup u / C``
    (a supersolution with the same data).
    """
    tau = 2.0 - gamma
    c = supersolution_constant(tau, params, gamma)
    f = -eigenvalue * float(np.max(profile.values))
    v = torsion_barrier(profile.radii, tau, -f / c, params, gamma)
    return profile, v, f, f


def shifted_down(v: RadialProfile, amount: float = 0.1,
                 center: float = 0.5, width: float = 0.15) -> RadialProfile:
    """``v`` minus a smooth bump, derivatives kept exact (self-test input)."""
    r = v.radii
    x = (r - center) / width
    bump = np.exp(-x * x)
    db = -2 * x / width * bump
    d2b = (4 * x * x - 2) / width ** 2 * bump
    s2 = None if v.second_derivs is None else v.second_derivs - amount * d2b
    return RadialProfile(r, v.values - amount * bump, v.derivs - amount * db,
                         v.gamma, v.params, s2, v.origin_value)


__all__ = [
    "PrincipleReport", "operator_values", "residual_defect", "comparison_check",
    "supersolution_constant", "supersolution_residual", "torsion_barrier",
    "maximum_principle_check", "slope_bounds", "sandwich_bounds",
    "derivative_bounds_check", "simplicity_check", "GammaProbe",
    "gamma_gt2_probe", "eigen_comparison_inputs", "shifted_down",
]
