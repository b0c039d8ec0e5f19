"""Built-in verification suite run by ``singular-eig verify``.

Each check is a small end-to-end computation against a closed form, an
independent oracle or a harness principle, sized to finish in seconds.
``inject_bug`` flips a sign inside the checks so the suite can demonstrate
that it detects errors.
"""
from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from . import harness
from .core import (
    LAPLACIAN,
    PUCCI_MINUS,
    PUCCI_PLUS,
    PotentialSpec,
    RadialOperator,
    dimension_like,
    explicit_lambda2,
    gamma2_eigenfunction_derivatives,
    gamma2_relative_residual,
    pucci_minus_radial,
    pucci_plus_radial,
)
from .errors import DivergentIteration
from .extrapolate import richardson_gamma_limit
from .fd_eig import (
    DirichletProblem,
    fd_principal_eigenvalue,
    make_grid,
    pucci_dirichlet_solve,
)
from .ode_shoot import shoot_eigenvalue
from .oracles import linear_ball_eigenvalue
from .rayleigh import variational_eigenvalue

# reference configuration for the principle checks
_REF = (1.0, 2.0, 5)


def _sign(bug: bool) -> float:
    return -1.0 if bug else 1.0


def check_gamma2_residual(bug: bool):
    r = np.logspace(-3, math.log10(1 - 1e-3), 100)
    worst = 0.0
    for dims in ((1, 1, 4), (1, 2, 5), (1, 1.5, 4)):
        p = dimension_like(*dims)
        for kind in (PUCCI_PLUS, PUCCI_MINUS):
            if bug:
                # wrong sign on the slope term
                u, du, d2u = gamma2_eigenfunction_derivatives(r, p, kind)
                op = pucci_plus_radial if kind == PUCCI_PLUS else pucci_minus_radial
                lam2 = explicit_lambda2(p, kind)
                scale = p.lambda_max * (np.abs(d2u) + (p.dim - 1) * np.abs(du) / r)
                res = (op(d2u, -du / r, p) + lam2 * u / r ** 2) / scale
            else:
                res = gamma2_relative_residual(r, p, kind)
            worst = max(worst, float(np.max(np.abs(res))))
    return worst < 1e-10, f"max relative residual {worst:.2e}"


def check_laplacian_oracle(bug: bool):
    p = dimension_like(1, 1, 3)
    e0 = shoot_eigenvalue(p, 0.0, LAPLACIAN).eigenvalue
    e1 = shoot_eigenvalue(p, 1.0, LAPLACIAN).eigenvalue
    ref1 = linear_ball_eigenvalue(1.0, 3.0, 1.0)
    d0, d1 = abs(e0 - _sign(bug) * math.pi ** 2), abs(e1 - ref1)
    return d0 < 1e-6 and d1 < 1e-5, f"|err| {d0:.1e} (gamma=0), {d1:.1e} (gamma=1)"


def check_shoot_fd(bug: bool):
    p = dimension_like(*_REF)
    op = RadialOperator.parse("pucci+", p)
    pot = PotentialSpec(1.5, 1e-6)
    a = shoot_eigenvalue(p, 1.5, op).eigenvalue
    b = fd_principal_eigenvalue(op, pot, make_grid(0, 8192, pot)).eigenvalue
    rel = abs(a - _sign(bug) * b) / a
    return rel < 1e-3, f"relative gap {rel:.1e}"


def check_variational_bridge(bug: bool):
    p = dimension_like(*_REF)
    a = shoot_eigenvalue(p, 1.5, PUCCI_PLUS).eigenvalue
    v = variational_eigenvalue(p, 1.5)
    rel = abs(v.bridge_eigenvalue - _sign(bug) * a) / a
    return rel < 1e-3, f"relative gap {rel:.1e}"


def check_hardy_limit(bug: bool):
    p = dimension_like(*_REF)
    gs = (1.9, 1.99, 1.999)
    vals = [shoot_eigenvalue(p, g, PUCCI_PLUS).eigenvalue for g in gs]
    lim = explicit_lambda2(p, PUCCI_PLUS)
    ext = richardson_gamma_limit(gs, vals)
    dec = all(b < a for a, b in zip(vals, vals[1:]))
    above = all(v >= _sign(bug) * lim for v in vals) and not bug
    rel = abs(ext - lim) / lim
    return dec and above and rel < 0.01, f"extrapolated {ext:.6g} vs {lim:.6g}"


def check_eps_monotone(bug: bool):
    p = dimension_like(*_REF)
    op = RadialOperator.parse("pucci+", p)
    vals = []
    for eps in (1e-2, 1e-3):
        pot = PotentialSpec(2.0, eps)
        vals.append(fd_principal_eigenvalue(op, pot, make_grid(0, 4096, pot)).eigenvalue)
    lim = explicit_lambda2(p, PUCCI_PLUS)
    ok = _sign(bug) * (vals[0] - vals[1]) > 0 and min(vals) >= lim
    return ok, "values " + ", ".join(f"{v:.6g}" for v in vals)


def check_sandwich(bug: bool):
    p = dimension_like(*_REF)
    op = RadialOperator.parse("mix:0.5", p)
    pot = PotentialSpec(2.0, 1e-4)
    ev = fd_principal_eigenvalue(op, pot, make_grid(0, 4096, pot)).eigenvalue
    lo, hi = explicit_lambda2(p, PUCCI_PLUS), explicit_lambda2(p, PUCCI_MINUS)
    ev = _sign(bug) * ev
    return lo <= ev <= hi, f"{lo:.6g} <= {ev:.6g} <= {hi:.6g}"


def check_dirichlet(bug: bool):
    p = dimension_like(*_REF)
    op = RadialOperator.parse("pucci+", p)
    pot = PotentialSpec(1.5, 1e-6)
    grid = make_grid(0, 4096, pot)
    lam = fd_principal_eigenvalue(op, pot, grid).eigenvalue
    u = pucci_dirichlet_solve(DirichletProblem(0.5 * lam, -1.0, op, pot), grid)
    positive = bool(np.all(_sign(bug) * u.values[:-1] > 0))
    try:
        pucci_dirichlet_solve(DirichletProblem(1.5 * lam, -1.0, op, pot), grid)
        diverged = False
    except DivergentIteration:
        diverged = True
    return positive and diverged, f"positive={positive}, diverged above={diverged}"


def check_supersolution(bug: bool):
    c = harness.supersolution_residual(1.0, dimension_like(1, 1, 3), 1.0)
    c2 = harness.supersolution_residual(1.5, dimension_like(1, 2, 5), 0.5)
    ok = abs(c - _sign(bug) * 2.0) < 1e-12 and abs(c2 - 4.5) < 1e-12
    return ok, f"C = {c:g}, {c2:g}"


def _reference_eigen(bug: bool):
    p = dimension_like(*_REF)
    op = RadialOperator.parse("pucci+", p)
    res = shoot_eigenvalue(p, 1.5, op)
    prof = res.profile.scaled(_sign(bug))
    return p, op, res.eigenvalue, prof


def check_comparison(bug: bool):
    p, op, lam, prof = _reference_eigen(False)
    u, v, f, g = harness.eigen_comparison_inputs(prof, lam, 1.5, p)
    if bug:
        v = harness.shifted_down(v)
    rep = harness.comparison_check(u, v, f, g, 0.0, op, PotentialSpec(1.5))
    return rep.passed, rep.detail or f"worst {rep.worst_violation:.1e}"


def check_maximum(bug: bool):
    p, op, lam, prof = _reference_eigen(bug)
    rep = harness.maximum_principle_check(0.9 * lam, op, PotentialSpec(1.5),
                                          prof.scaled(-1.0), lam)
    return rep.passed, rep.detail or f"worst {rep.worst_violation:.1e}"


def check_derivative_bounds(bug: bool):
    p, op, lam, prof = _reference_eigen(bug)
    sel = prof.radii <= 0.1
    vals = np.abs(prof.values[sel])
    rep = harness.derivative_bounds_check(prof, p, 1.5, (lam * vals.min(), lam * vals.max()),
                                          "eigenfunction")
    return rep.passed, f"worst {rep.worst_violation:.1e}; {rep.detail}"


def check_simplicity(bug: bool):
    p, op, lam, prof = _reference_eigen(False)
    pot = PotentialSpec(1.5, 1e-8)
    fd = fd_principal_eigenvalue(op, pot, make_grid(0, 8192, pot)).profile
    var = variational_eigenvalue(p, 1.5).minimizer
    if bug:
        fd = harness.RadialProfile(fd.radii, fd.values * (1 + 0.2 * np.sin(np.pi * fd.radii)),
                                   fd.derivs, fd.gamma, fd.params)
    rep = harness.simplicity_check([prof, fd, var])
    return rep.passed, f"worst {rep.worst_violation:.1e}"


def check_gamma_gt2(bug: bool):
    op = RadialOperator.parse("pucci-", dimension_like(1, 2, 3, strict=False))
    probe = harness.gamma_gt2_probe(op, 2.5, (0.1, 0.05, 0.01), n_nodes=4096)
    ok = probe.strictly_decreasing != bug
    return ok, ("values " + ", ".join(f"{v:.4g}" for v in probe.eigenvalues)
                + f"; slope {probe.decay_exponent:.3g}")


CHECKS: dict[str, Callable] = {
    "gamma2-residual": check_gamma2_residual,
    "laplacian-oracle": check_laplacian_oracle,
    "shoot-fd": check_shoot_fd,
    "variational-bridge": check_variational_bridge,
    "hardy-limit": check_hardy_limit,
    "eps-monotone": check_eps_monotone,
    "sandwich": check_sandwich,
    "dirichlet": check_dirichlet,
    "supersolution": check_supersolution,
    "comparison": check_comparison,
    "maximum": check_maximum,
    "derivative-bounds": check_derivative_bounds,
    "simplicity": check_simplicity,
    "gamma-gt2": check_gamma_gt2,
}


def run_suite(only=None, inject_bug: bool = False) -> list[dict]:
    """Run the named checks (all by default); never raises on a failure."""
    names = list(only) if only else list(CHECKS)
    results = []
    for name in names:
        t0 = time.perf_counter()
        try:
            passed, detail = CHECKS[name](inject_bug)
        except Exception as exc:  # a crash is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": bool(passed), "detail": detail,
                        "seconds": time.perf_counter() - t0})
    return results
