"""Shooting from the origin for ``F(D^2 u) = -mu u r^-gamma``.

The local solution near 0 is the fixed point of the Volterra map

    T(u)(r) = 1 - (mu/c) int_0^r s^(1-N~) int_0^s u(t) t^(N~-1-gamma) dt ds,

with ``(c, N~)`` the constants of the branch active at the origin. It is
extended outward by an adaptive Dormand-Prince integrator; the first zero
``rbar`` gives the unit-ball eigenvalue ``mu rbar^(2-gamma)``.

Everything is carried in ``t = ln r`` with state ``(u, w = r u')``: close to
gamma = 2 the seed radius is far below the double-precision range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    PUCCI_PLUS,
    PucciParams,
    RadialOperator,
    regime_constants,
)
from .errors import (
    NoContraction,
    NoZeroFound,
    SeedRadiusTooLarge,
    StepSizeUnderflow,
)
from .profile import EigenResult, RadialProfile

# representable radii after rescaling to the unit ball
_LOG_TINY = -300.0


@dataclass(frozen=True)
class SeedConfig:
    """Parameters of the local fixed-point construction.

    ``r0 = None`` selects the default seed radius. ``log_r0`` may be given
    instead when the radius is not representable as a float.
    """

    r0: float | None = None
    fixed_point_tol: float = 1e-12
    max_fixed_point_iters: int = 200
    seed_grid_points: int = 2048
    seed_span: float = 1e-12
    log_r0: float | None = None
    max_shrinks: int = 60

    def __post_init__(self):
        if self.r0 is not None and not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if not (self.fixed_point_tol > 0 and self.max_fixed_point_iters > 0
                and self.seed_grid_points >= 2 and 0 < self.seed_span < 1):
            raise ValueError("invalid seed configuration")


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    event_tol: float = 1e-12
    max_steps: int = 200_000
    initial_step: float = 1e-2


@dataclass
class LogSeed:
    """Seed in log-radius form: ``t = ln r``, ``w = r u'``, ``m = r^2 u''``."""

    t: np.ndarray
    u: np.ndarray
    w: np.ndarray
    m: np.ndarray
    coefficients: np.ndarray
    iterations: int
    residual: float
    shrinks: int
    regime: str


def _check_gamma(gamma: float) -> None:
    if not 0 <= gamma < 2:
        raise ValueError(f"shooting needs 0 <= gamma < 2, got {gamma}")


def _operator(params: PucciParams, operator_kind) -> RadialOperator:
    if isinstance(operator_kind, RadialOperator):
        return operator_kind
    return RadialOperator.parse(operator_kind, params)


def seed_regime(operator: RadialOperator, gamma: float):
    """Branch active at the origin: concave for gamma < 1, convex after."""
    name = "concave" if gamma < 1 else "convex"
    c, nt = regime_constants(operator)[name]
    return name, c, nt


def default_log_seed_radius(operator: RadialOperator, gamma: float,
                            mu: float = 1.0) -> float:
    """Logarithm of the default seed radius.

    Minimum of the contraction constraint ``(c(N~-gamma)(2-gamma)/(3 mu))``
    and, when usable, the branch-sign constraints, raised to ``1/(2-gamma)``
    and capped at 0.1.
    """
    h = 2.0 - gamma
    name, c, nt = seed_regime(operator, gamma)
    bounds = [c * (nt - gamma) * h / (3.0 * mu)]
    if name == "concave":
        bounds.append(c * (1.0 - gamma) * h / (3.0 * mu))
    else:
        extra = c * (3.0 - 2.0 * gamma) * h / mu
        if extra > 0:
            bounds.append(extra)
    bounds = [b for b in bounds if b > 0]
    log_z = math.log(min(bounds)) if bounds else math.log(1e-3)
    return min(log_z / h, math.log(0.1))


def _poly(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    for a in coeffs[::-1]:
        out = out * z + a
    return out


def _picard(c: float, nt: float, h: float, mu: float, z: np.ndarray,
            cfg: SeedConfig):
    """Iterate T from u = 1 on power series in ``z = r^(2-gamma)``.

    T maps a polynomial in z to a polynomial of one degree higher, so the
    iteration is carried out exactly on coefficients; the sup-norm distance
    between iterates is measured on the seed nodes.
    """
    coeffs = np.array([1.0])
    prev_diff = math.inf
    u_old = np.ones_like(z)
    for it in range(1, cfg.max_fixed_point_iters + 1):
        k = np.arange(coeffs.size)
        new = np.empty(coeffs.size + 1)
        new[0] = 1.0
        new[1:] = -mu * coeffs / (c * (k + 1) * h * ((k + 1) * h + nt - 2.0))
        u_new = _poly(new, z)
        diff = float(np.max(np.abs(u_new - u_old)))
        coeffs, u_old = new, u_new
        if diff <= cfg.fixed_point_tol:
            return coeffs, it, diff
        if it > 1 and diff >= prev_diff:
            raise NoContraction(
                f"iterates stopped contracting at step {it} "
                f"({prev_diff:.3e} -> {diff:.3e}); shrink r0")
        prev_diff = diff
    raise NoContraction(
        f"no convergence within {cfg.max_fixed_point_iters} iterations")


def log_seed(params: PucciParams, gamma: float,
             config: SeedConfig | None = None,
             operator_kind=PUCCI_PLUS, mu: float = 1.0,
             adaptive: bool = True) -> LogSeed:
    """Fixed point of T in log-radius form.

    Raises
    ------
    NoContraction
        If successive iterates fail to contract.
    SeedRadiusTooLarge
        If the branch sign of ``u''`` fails at a seed node and ``adaptive``
        is off (or shrinking is exhausted).
    """
    _check_gamma(gamma)
    cfg = config or SeedConfig()
    op = _operator(params, operator_kind)
    name, c, nt = seed_regime(op, gamma)
    h = 2.0 - gamma
    if cfg.log_r0 is not None:
        log_r0 = cfg.log_r0
    elif cfg.r0 is not None:
        log_r0 = math.log(cfg.r0)
    else:
        log_r0 = default_log_seed_radius(op, gamma, mu)
    n = cfg.seed_grid_points
    frac = np.linspace(math.log(cfg.seed_span), 0.0, n)
    shrinks = 0
    while True:
        log_z0 = h * log_r0
        z = np.exp(log_z0 + frac)
        try:
            coeffs, iters, resid = _picard(c, nt, h, mu, z, cfg)
        except NoContraction:
            if not adaptive or shrinks >= cfg.max_shrinks:
                raise
            log_r0 -= math.log(4.0) / h
            shrinks += 1
            continue
        k = np.arange(coeffs.size)
        u = _poly(coeffs, z)
        zu_z = _poly(coeffs[1:] * k[1:], z) * z
        z2u_zz = _poly(coeffs[2:] * k[2:] * (k[2:] - 1), z) * z * z \
            if coeffs.size > 2 else np.zeros_like(z)
        w = h * zu_z
        m = h * h * (zu_z + z2u_zz) - w
        sign_ok = np.all(m <= 0) if name == "concave" else np.all(m >= 0)
        shape_ok = np.all(u > 0.5) and np.all(w <= 0)
        if sign_ok and shape_ok:
            t = (log_z0 + frac) / h
            return LogSeed(t, u, w, m, coeffs, iters, resid, shrinks, name)
        if not adaptive or shrinks >= cfg.max_shrinks:
            raise SeedRadiusTooLarge(
                f"u'' sign condition of the {name} branch fails on the seed "
                f"interval (log r0 = {log_r0:.6g}); shrink r0")
        log_r0 -= math.log(4.0) / h
        shrinks += 1


def _profile_from_log(t, u, w, m, t_ref, gamma, params, log_scale=None,
                      origin_value=1.0):
    """Unit-ball profile from log-form samples.

    ``log_scale`` holds per-node renormalization logs from the integrator.
    Values are scaled so that ``u(0) = origin_value`` whenever that is
    representable on the kept nodes; otherwise the kept part is normalized
    to sup-norm 1 and ``origin_value`` is dropped.
    """
    s = t - t_ref
    keep = s > _LOG_TINY
    rho = np.exp(s[keep])
    ls = np.zeros(keep.sum()) if log_scale is None else log_scale[keep]
    shift = float(ls.max()) if ls.size else 0.0
    fac = np.exp(ls - shift)
    if shift > -600 and origin_value is not None:
        fac = fac * math.exp(shift)
    else:
        big = np.max(np.abs(u[keep] * fac)) if ls.size else 1.0
        fac = fac / big
        origin_value = None
    return RadialProfile(rho, u[keep] * fac, w[keep] * fac / rho, gamma, params,
                         m[keep] * fac / (rho * rho), origin_value)


def local_seed(params: PucciParams, gamma: float,
               config: SeedConfig | None = None,
               operator_kind=PUCCI_PLUS, mu: float = 1.0,
               adaptive: bool = True) -> RadialProfile:
    """Local solution with ``u(0) = 1`` on ``(0, r0]``.

    Nodes whose radius underflows double precision (gamma very close to 2)
    are dropped; use :func:`log_seed` for the full seed.
    """
    s = log_seed(params, gamma, config, operator_kind, mu, adaptive)
    return _profile_from_log(s.t, s.u, s.w, s.m, 0.0, gamma, params)


def _j_upper(nu: float) -> float:
    # crude upper bound on the first positive zero of J_nu
    return nu + 2.0 * max(nu, 0.0) ** (1.0 / 3.0) + 2.5


def default_log_r_max(operator: RadialOperator, gamma: float,
                      mu: float = 1.0) -> float:
    """Log of the outer integration limit.

    The larger of ``10 N-^(1/(2-gamma))`` and ten times a Bessel-type upper
    estimate of the first zero over both branches.
    """
    h = 2.0 - gamma
    a_pos, a_neg, b_pos, b_neg = operator.coefficients
    c_max = max(a_pos, a_neg)
    nt_max = (operator.params.dim - 1) * max(b_pos, b_neg) / min(a_pos, a_neg) + 1
    nu = max(nt_max - 2.0, 0.0) / h
    bound = c_max * (0.5 * h) ** 2 * _j_upper(nu) ** 2
    est = math.log(10.0 * bound / mu) / h
    heuristic = math.log(10.0) + math.log(operator.params.n_tilde_minus) / h
    return max(est, heuristic)


def _integrate_log(op: RadialOperator, gamma: float, t0: float, u0: float,
                   w0: float, t_end: float, mu: float,
                   icfg: IntegratorConfig):
    a_pos, a_neg, b_pos, b_neg = op.coefficients
    n = icfg.max_steps
    out_t = np.empty(n)
    out_u = np.empty(n)
    out_w = np.empty(n)
    out_m = np.empty(n)
    out_s = np.empty(n)
    count, status, t_zero, n_rej, n_sw = kernels.shoot_integrate(
        float(t0), float(u0), float(w0), float(t_end), icfg.initial_step,
        2.0 - gamma, float(mu), float(op.params.dim - 1), a_pos, a_neg,
        b_pos, b_neg, icfg.rtol, icfg.atol, icfg.event_tol,
        out_t, out_u, out_w, out_m, out_s)
    return (out_t[:count], out_u[:count], out_w[:count], out_m[:count],
            out_s[:count], int(status), float(t_zero), int(n_rej), int(n_sw))


def integrate_outward(seed: RadialProfile, params: PucciParams, gamma: float,
                      r_max: float | None = None, operator_kind=PUCCI_PLUS,
                      mu: float = 1.0,
                      integrator: IntegratorConfig | None = None) -> RadialProfile:
    """Extend a seed outward until the first zero of ``u`` or ``r_max``.

    The returned profile covers the seed and the integrated part; its last
    node is the first zero when one was found.

    Raises
    ------
    StepSizeUnderflow
        If the adaptive step collapses.
    NoZeroFound
        If ``u`` stays positive up to ``r_max``; the partial profile is
        attached to the exception.
    """
    _check_gamma(gamma)
    op = _operator(params, operator_kind)
    icfg = integrator or IntegratorConfig()
    t_end = math.log(r_max) if r_max is not None else default_log_r_max(op, gamma, mu)
    r0 = seed.radii[-1]
    if t_end <= math.log(r0):
        raise ValueError("r_max must exceed the seed radius")
    t, u, w, m, ls, status, _, _, _ = _integrate_log(
        op, gamma, math.log(r0), seed.values[-1], r0 * seed.derivs[-1],
        t_end, mu, icfg)
    fac = np.exp(ls[1:])
    rr = np.exp(t[1:])
    second = seed.second_derivs
    prof = RadialProfile(
        np.concatenate([seed.radii, rr]),
        np.concatenate([seed.values, fac * u[1:]]),
        np.concatenate([seed.derivs, fac * w[1:] / rr]),
        gamma, params,
        None if second is None else np.concatenate([second, fac * m[1:] / rr ** 2]),
        seed.origin_value)
    _raise_for_status(status, prof, t[-1])
    return prof


def _raise_for_status(status, profile, t_last):
    if status == kernels.STEP_UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at log r = {t_last:.6g}")
    if status in (kernels.REACHED_END, kernels.MAX_STEPS):
        raise NoZeroFound(
            f"u stayed positive up to log r = {t_last:.6g}", profile)


def eigenvalue_from_first_zero(r_bar: float, gamma: float,
                               mu: float = 1.0) -> float:
    """Unit-ball eigenvalue ``mu r_bar^(2-gamma)`` from domain scaling."""
    if not r_bar > 0:
        raise ValueError("r_bar must be positive")
    _check_gamma(gamma)
    return mu * r_bar ** (2.0 - gamma)


def shoot_eigenvalue(params: PucciParams, gamma: float,
                     operator_kind=PUCCI_PLUS,
                     config: SeedConfig | None = None,
                     mu: float = 1.0,
                     integrator: IntegratorConfig | None = None) -> EigenResult:
    """Principal eigenvalue of the unit ball by shooting.

    Parameters
    ----------
    params : PucciParams
    gamma : float
        Exponent in ``[0, 2)``.
    operator_kind : str or RadialOperator
        ``pucci+``, ``pucci-``, ``mix:theta`` or ``laplacian``.
    config : SeedConfig, optional
    mu : float, default 1
        Potential coefficient used during shooting. The unit-ball eigenvalue
        does not depend on it; ``first_zero`` does.

    Returns
    -------
    EigenResult
        Eigenfunction rescaled to the unit ball with ``u(0) = 1``.
        ``first_zero`` is ``None`` when it is not representable; the
        logarithm is always in ``diagnostics['log_first_zero']``.
    """
    _check_gamma(gamma)
    op = _operator(params, operator_kind)
    icfg = integrator or IntegratorConfig()
    seed = log_seed(params, gamma, config, op, mu)
    t_end = default_log_r_max(op, gamma, mu)
    t, u, w, m, ls, status, t_zero, n_rej, n_sw = _integrate_log(
        op, gamma, seed.t[-1], seed.u[-1], seed.w[-1], t_end, mu, icfg)
    pieces = [np.concatenate([a[:-1], b]) for a, b in
              ((seed.t, t), (seed.u, u), (seed.w, w), (seed.m, m),
               (np.zeros_like(seed.t), ls))]
    if status != kernels.ZERO_FOUND:
        prof = _profile_from_log(*pieces[:4], float(t[-1]), gamma, params,
                                 pieces[4])
        _raise_for_status(status, prof, t[-1])
    h = 2.0 - gamma
    eig = mu * math.exp(h * t_zero)
    profile = _profile_from_log(*pieces[:4], t_zero, gamma, params, pieces[4])
    r_bar = math.exp(t_zero) if -700 < t_zero < 700 else None
    diagnostics = {
        "log_first_zero": t_zero,
        "mu": mu,
        "operator": op.label,
        "seed_regime": seed.regime,
        "seed_log_radius": float(seed.t[-1]),
        "seed_iterations": seed.iterations,
        "seed_residual": seed.residual,
        "seed_shrinks": seed.shrinks,
        "steps": int(t.size - 1),
        "rejected_steps": n_rej,
        "regime_switches": n_sw,
        "normalization": "origin" if profile.origin_value is not None else "sup",
    }
    return EigenResult(eig, profile, "shoot", r_bar, diagnostics)
