"""Finite-volume engine on regularized domains.

Each linear branch ``a u'' + (N-1) b u'/r`` is written in flux form
``a r^-k (r^k u')'`` with ``k = (N-1) b / a`` and discretized by finite
volumes, which yields an M-matrix for every branch. The nonlinear operator
is the pointwise max (convex kinds) or min (concave kinds) over the four
branch combinations, resolved by Howard's policy iteration.

Two regularizations are supported: an annulus ``[delta, 1]`` with the bare
weight and Dirichlet data at both ends, and a ball with the smoothed weight
``(r^2 + eps^2)^(-gamma/2)`` and a zero-flux condition at a tiny inner
radius.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .core import CUSTOM, PotentialSpec, RadialOperator
from .errors import (
    DivergentIteration,
    NoConvergence,
    PolicyCycle,
    SingularSystem,
    UnsupportedOperator,
)
from .extrapolate import richardson_gamma_limit
from .profile import EigenResult, RadialProfile

log = logging.getLogger(__name__)

SEED_ENV = "SINGULAR_EIG_SEED"


@dataclass(frozen=True, eq=False)
class AnnulusGrid:
    """Radial grid on ``[delta, 1]`` or on a ball with smoothed potential.

    For ``delta = 0`` the first node is a small ``r_min > 0`` carrying a
    zero-flux condition.
    """

    delta: float
    n_nodes: int
    nodes: np.ndarray
    potential: PotentialSpec

    @property
    def is_ball(self) -> bool:
        return self.delta == 0

    @property
    def weight(self) -> np.ndarray:
        return self.potential.weight(self.nodes)


def make_grid(delta: float, n_nodes: int, potential: PotentialSpec,
              r_min: float | None = None, r_c: float = 0.05) -> AnnulusGrid:
    """Log-linear graded grid.

    Nodes are uniform in ``s(r) = ln r + r / r_c``: geometric near the inner
    boundary and nearly uniform near ``r = 1``.

    Parameters
    ----------
    delta : float
        Inner radius; 0 requests the smoothed ball.
    n_nodes : int
        Total node count including both ends.
    potential : PotentialSpec
        Must have ``smoothing > 0`` when ``delta = 0``.
    r_min : float, optional
        Inner node of the ball; defaults to ``min(1e-6, eps / 100)``.
    """
    if delta < 0 or delta >= 1:
        raise ValueError("delta must lie in [0, 1)")
    if delta == 0 and potential.smoothing <= 0 and potential.gamma > 0:
        raise ValueError("a grid touching 0 needs a smoothed potential (eps > 0)")
    if n_nodes < 5:
        raise ValueError("need at least 5 nodes")
    if delta > 0:
        inner = delta
    else:
        eps = potential.smoothing if potential.smoothing > 0 else 1e-4
        inner = r_min if r_min is not None else min(1e-6, eps * 1e-2)
    s0 = math.log(inner) + inner / r_c
    s1 = 1.0 / r_c
    s = np.linspace(s0, s1, n_nodes)
    x = s.copy()
    for _ in range(100):
        ex = np.exp(x)
        step = (x + ex / r_c - s) / (1 + ex / r_c)
        x -= step
        if np.max(np.abs(step)) < 1e-15:
            break
    nodes = np.exp(x)
    nodes[0] = inner
    nodes[-1] = 1.0
    return AnnulusGrid(float(delta), int(n_nodes), nodes, potential)


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    """``F(D^2 u) - beta w u + mu w u = f w`` with ``u = boundary_value``."""

    mu: float
    rhs: RadialProfile | Callable | float | np.ndarray
    operator: RadialOperator
    potential: PotentialSpec
    beta: float = 0.0
    boundary_value: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


def _controls(operator: RadialOperator):
    if operator.kind == CUSTOM:
        raise UnsupportedOperator("the grid solver needs a piecewise-linear operator")
    a_pos, a_neg, b_pos, b_neg = operator.coefficients
    ctrl = [(a_pos, b_pos), (a_pos, b_neg), (a_neg, b_pos), (a_neg, b_neg)]
    return np.array(ctrl), operator.is_convex


def flux_stencil(nodes: np.ndarray, a, k, neumann_inner: bool):
    """Finite-volume stencil of ``a r^-k (r^k u')'`` at every node.

    ``a`` and ``k`` are scalars or per-node arrays. Returns
    ``(lower, diag, upper)`` with boundary rows left as zeros, except the
    first row when ``neumann_inner`` (zero flux through ``nodes[0]``).
    """
    r = nodes
    n = r.shape[0]
    a = np.broadcast_to(np.asarray(a, dtype=float), (n,))
    k = np.broadcast_to(np.asarray(k, dtype=float), (n,))
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    i = np.arange(1, n - 1)
    rp = 0.5 * (r[i] + r[i + 1]) / r[i]
    rm = 0.5 * (r[i - 1] + r[i]) / r[i]
    ki = k[i]
    vol = r[i] * (rp ** (ki + 1) - rm ** (ki + 1)) / (ki + 1)
    lower[i] = a[i] * rm ** ki / (r[i] - r[i - 1]) / vol
    upper[i] = a[i] * rp ** ki / (r[i + 1] - r[i]) / vol
    diag[i] = -(lower[i] + upper[i])
    if neumann_inner:
        rp0 = 0.5 * (r[0] + r[1]) / r[0]
        k0 = k[0]
        vol0 = r[0] * (rp0 ** (k0 + 1) - 1.0) / (k0 + 1)
        upper[0] = a[0] * rp0 ** k0 / (r[1] - r[0]) / vol0
        diag[0] = -upper[0]
    return lower, diag, upper


def _all_stencils(operator: RadialOperator, nodes: np.ndarray, neumann: bool):
    ctrl, convex = _controls(operator)
    nm1 = operator.params.dim - 1
    st = np.empty((len(ctrl), 3, nodes.shape[0]))
    for c, (a, b) in enumerate(ctrl):
        st[c] = flux_stencil(nodes, a, nm1 * b / a, neumann)
    return st, convex


def _apply(st: np.ndarray, u: np.ndarray) -> np.ndarray:
    # st has shape (controls, 3, n); returns (controls, n)
    out = st[:, 1] * u
    out[:, 1:] += st[:, 0, 1:] * u[:-1]
    out[:, :-1] += st[:, 2, :-1] * u[1:]
    return out


def _rounding_noise(st: np.ndarray, u: np.ndarray) -> np.ndarray:
    # floating-point error bound for evaluating the stencil on u
    return 64 * np.finfo(float).eps * _apply(np.abs(st), np.abs(u)).max(axis=0)


def apply_operator(operator: RadialOperator, radii: np.ndarray,
                   values: np.ndarray, neumann_inner: bool = False,
                   return_noise: bool = False):
    """Discrete ``F(D^2 u)`` at every node (boundary rows are NaN).

    The same monotone stencil the solvers use, evaluated on raw values.
    With ``return_noise`` also returns the per-node rounding-error bound of
    the evaluation, which dominates on very fine cells.
    """
    st, convex = _all_stencils(operator, np.asarray(radii, float), neumann_inner)
    u = np.asarray(values, float)
    vals = _apply(st, u)
    out = vals.max(axis=0) if convex else vals.min(axis=0)
    out[-1] = np.nan
    if not neumann_inner:
        out[0] = np.nan
    if return_noise:
        return out, _rounding_noise(st, u)
    return out


class _HowardSolver:
    """Policy iteration for ``F_h(u) - z u = g`` with Dirichlet data.

    ``z >= 0`` is a per-node zero-order coefficient. Policies persist
    between calls so repeated solves warm-start.
    """

    def __init__(self, operator: RadialOperator, grid: AnnulusGrid,
                 max_policy_iters: int = 200):
        self.grid = grid
        self.neumann = grid.is_ball
        self.st, self.convex = _all_stencils(operator, grid.nodes, self.neumann)
        n = grid.nodes.shape[0]
        self.policy = np.zeros(n, dtype=np.int64)
        self.max_policy_iters = max_policy_iters
        self.first = 0 if self.neumann else 1
        self.policy_iterations = 0

    def solve(self, g: np.ndarray, z: np.ndarray | float = 0.0,
              inner_value: float = 0.0, outer_value: float = 0.0) -> np.ndarray:
        st = self.st
        n = g.shape[0]
        lo, hi = self.first, n - 1
        z = np.broadcast_to(np.asarray(z, dtype=float), (n,))
        idx = np.arange(n)
        seen = set()
        u = np.zeros(n)
        for it in range(self.max_policy_iters):
            pol = self.policy
            lower = st[pol, 0, idx][lo:hi]
            diag = st[pol, 1, idx][lo:hi] - z[lo:hi]
            upper = st[pol, 2, idx][lo:hi]
            rhs = g[lo:hi].copy()
            if lo == 1:
                rhs[0] -= lower[0] * inner_value
            rhs[-1] -= upper[-1] * outer_value
            lower = lower.copy()
            upper = upper.copy()
            lower[0] = 0.0
            upper[-1] = 0.0
            x, flag = kernels.solve_tridiagonal(lower, diag, upper, rhs)
            if flag != 0 or not np.all(np.isfinite(x)):
                raise SingularSystem("tridiagonal solve failed")
            u = np.empty(n)
            u[lo:hi] = x
            u[-1] = outer_value
            if lo == 1:
                u[0] = inner_value
            vals = _apply(st, u)
            best = vals.argmax(axis=0) if self.convex else vals.argmin(axis=0)
            cur = vals[pol, idx]
            top = vals[best, idx]
            # switch only when the gain beats the rounding noise of the stencil
            noise = _rounding_noise(st, u)
            gain = (top - cur) if self.convex else (cur - top)
            new = np.where(gain > noise, best, pol)
            new[:lo] = pol[:lo]
            new[hi:] = pol[hi:]
            self.policy_iterations += 1
            if np.array_equal(new, pol):
                return u
            key = new.tobytes()
            if key in seen:
                raise PolicyCycle("policy iteration revisited an assignment")
            seen.add(key)
            self.policy = new
        raise PolicyCycle(f"no policy fixed point within {self.max_policy_iters} iterations")


def _node_values(spec, grid: AnnulusGrid) -> np.ndarray:
    r = grid.nodes
    if isinstance(spec, RadialProfile):
        return spec.sample(r)
    if callable(spec):
        return np.asarray(spec(r), dtype=float) * np.ones_like(r)
    arr = np.asarray(spec, dtype=float)
    if arr.ndim == 0:
        return np.full_like(r, float(arr))
    if arr.shape != r.shape:
        raise ValueError("per-node array has the wrong length")
    return arr


def _profile(grid: AnnulusGrid, u: np.ndarray, params, gamma) -> RadialProfile:
    du = np.gradient(u, grid.nodes, edge_order=2)
    if grid.is_ball:
        du[0] = 0.0
    return RadialProfile(grid.nodes.copy(), u, du, gamma, params)


def linear_radial_solve(grid: AnnulusGrid, second_order, first_order, rhs,
                        inner_value: float = 0.0, outer_value: float = 0.0,
                        params=None) -> RadialProfile:
    """Solve ``a(r) u'' + b(r) u'/r = rhs`` on the grid.

    ``b`` already contains the ``(N - 1)`` factor. Dirichlet data at
    ``r = 1`` and at ``delta`` (annulus); zero flux at the inner node of a
    ball grid.

    Raises
    ------
    SingularSystem
        On a zero pivot or nonpositive coefficients.
    """
    a = _node_values(second_order, grid)
    b = _node_values(first_order, grid)
    if np.any(a <= 0) or np.any(b < 0):
        raise SingularSystem("coefficients must satisfy a > 0 and b >= 0")
    f = _node_values(rhs, grid)
    lower, diag, upper = flux_stencil(grid.nodes, a, b / a, grid.is_ball)
    n = grid.nodes.shape[0]
    lo = 0 if grid.is_ball else 1
    hi = n - 1
    lw, dg, up = lower[lo:hi].copy(), diag[lo:hi].copy(), upper[lo:hi].copy()
    g = f[lo:hi].copy()
    if lo == 1:
        g[0] -= lw[0] * inner_value
    g[-1] -= up[-1] * outer_value
    lw[0] = 0.0
    up[-1] = 0.0
    x, flag = kernels.solve_tridiagonal(lw, dg, up, g)
    if flag != 0 or not np.all(np.isfinite(x)):
        raise SingularSystem("tridiagonal solve failed")
    u = np.empty(n)
    u[lo:hi] = x
    u[-1] = outer_value
    if lo == 1:
        u[0] = inner_value
    return _profile(grid, u, params, grid.potential.gamma)


def _seed_value() -> int:
    raw = os.environ.get(SEED_ENV, "0").strip() or "0"
    return int(raw)


def fd_principal_eigenvalue(operator: RadialOperator, potential: PotentialSpec,
                            grid: AnnulusGrid, max_iters: int = 500,
                            tol: float = 1e-10, start: np.ndarray | None = None,
                            seed: int | None = None,
                            vector_tol: float = 1e-10) -> EigenResult:
    """Principal eigenpair by nonlinear inverse power iteration.

    ``v_{k+1}`` solves ``F_h(v_{k+1}) = -w v_k`` with zero boundary data and
    is normalized in the sup norm; the estimate is ``1 / |v_{k+1}|_inf``.

    Parameters
    ----------
    start : ndarray, optional
        Positive initial vector; a random positive vector is drawn from
        ``numpy.random.default_rng(seed)`` otherwise, ``seed`` defaulting to
        the ``SINGULAR_EIG_SEED`` environment variable (0 if unset).

    vector_tol : float
        The iteration also waits for the normalized iterate to settle to
        this sup-norm change, since the eigenvalue converges faster than
        the eigenvector.

    Raises
    ------
    NoConvergence
        If the relative change stays above ``tol`` after ``max_iters``.
    """
    if potential != grid.potential:
        raise ValueError("potential does not match the grid's potential")
    n = grid.nodes.shape[0]
    w = grid.weight
    if start is None:
        rng = np.random.default_rng(_seed_value() if seed is None else seed)
        v = rng.uniform(0.5, 1.5, n)
    else:
        v = np.abs(np.asarray(start, dtype=float)).copy()
    v[-1] = 0.0
    if not grid.is_ball:
        v[0] = 0.0
    v /= np.max(v)
    solver = _HowardSolver(operator, grid)
    lam_old = math.nan
    history = []
    for it in range(1, max_iters + 1):
        y = solver.solve(-w * v)
        norm = float(np.max(np.abs(y)))
        lam = 1.0 / norm
        y /= norm
        shift = float(np.max(np.abs(y - v)))
        v = y
        history.append(lam)
        if it > 1 and abs(lam - lam_old) <= tol * lam and shift <= vector_tol:
            break
        lam_old = lam
    else:
        raise NoConvergence(
            f"inverse iteration not converged after {max_iters} iterations "
            f"(last change {abs(lam - lam_old) / lam:.3e})")
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    prof = _profile(grid, v, operator.params, potential.gamma)
    diag = {
        "iterations": it,
        "policy_iterations": solver.policy_iterations,
        "history": history,
        "delta": grid.delta,
        "eps": potential.smoothing,
        "n_nodes": n,
        "r_inner": float(grid.nodes[0]),
        "operator": operator.label,
    }
    return EigenResult(lam, prof, "finite_difference", None, diag)


def pucci_dirichlet_solve(problem: DirichletProblem, grid: AnnulusGrid,
                          max_iters: int = 500, tol: float = 1e-12,
                          lambda_estimate: float | None = None,
                          growth_limit: float = 1e6,
                          return_info: bool = False):
    """Solve the Dirichlet problem by the outer ``mu``-recursion.

    ``u_{n+1}`` solves ``F(D^2 u_{n+1}) - beta w u_{n+1} = (f - mu u_n) w``
    with ``u_{n+1} = b`` on the boundary; each step is a policy-iteration
    solve. Below the principal eigenvalue the iterates converge
    monotonically; above it they blow up.

    Raises
    ------
    DivergentIteration
        When the sup norm exceeds ``growth_limit`` times its first value.
    NoConvergence
        When neither convergence nor blow-up occurs within ``max_iters``.
    """
    if problem.potential != grid.potential:
        raise ValueError("potential does not match the grid's potential")
    if lambda_estimate is not None and problem.mu >= lambda_estimate:
        log.warning("mu = %g is not below the eigenvalue estimate %g; "
                    "the recursion is expected to diverge", problem.mu,
                    lambda_estimate)
    w = grid.weight
    f = _node_values(problem.rhs, grid)
    z = problem.beta * w
    bval = problem.boundary_value
    solver = _HowardSolver(problem.operator, grid)
    u = np.zeros_like(grid.nodes)
    first_norm = None
    norms = []
    for it in range(1, max_iters + 1):
        u_new = solver.solve((f - problem.mu * u) * w, z, bval, bval)
        norm = float(np.max(np.abs(u_new)))
        norms.append(norm)
        if first_norm is None:
            first_norm = max(norm, 1e-300)
        if not np.isfinite(norm) or norm > growth_limit * first_norm:
            raise DivergentIteration(
                f"sup norm grew by more than {growth_limit:g} after {it} "
                f"iterations (mu = {problem.mu:g})", it, norms)
        change = float(np.max(np.abs(u_new - u)))
        u = u_new
        if change <= tol * max(norm, 1e-300):
            break
    else:
        raise NoConvergence(f"Dirichlet recursion not settled in {max_iters} iterations")
    prof = _profile(grid, u, problem.operator.params, grid.potential.gamma)
    if return_info:
        return prof, {"iterations": it, "norms": norms,
                      "policy_iterations": solver.policy_iterations}
    return prof


@dataclass
class SweepTable:
    """Rows of a stability sweep plus summary flags.

    ``monotone`` is True when every consecutive pair that differs in a
    single regularization parameter moves in the proven direction
    (eigenvalue increasing in ``delta`` and in ``eps``). ``limit`` is a
    Richardson estimate when the schedule walks ``gamma`` toward 2 at fixed
    regularization, else ``None``.
    """

    rows: list = field(default_factory=list)
    monotone: bool | None = None
    strictly_decreasing: bool | None = None
    limit: float | None = None
    varying: str | None = None


def _varying(a, b):
    diff = [name for name, x, y in zip(("gamma", "delta", "eps"), a, b) if x != y]
    return diff[0] if len(diff) == 1 else None


def stability_sweep(operator: RadialOperator,
                    schedule: Sequence[tuple[float, float, float]],
                    n_nodes: int = 8192, **kwargs) -> SweepTable:
    """Finite-difference eigenvalues along a ``(gamma, delta, eps)`` schedule.

    Errors at individual points are recorded in the row (``error``) rather
    than raised.
    """
    if not schedule:
        raise ValueError("empty schedule")
    table = SweepTable()
    for gamma, delta, eps in schedule:
        row = {"gamma": gamma, "delta": delta, "eps": eps}
        try:
            pot = PotentialSpec(gamma, eps if delta == 0 else 0.0)
            grid = make_grid(delta, n_nodes, pot)
            res = fd_principal_eigenvalue(operator, pot, grid, **kwargs)
            row["eigenvalue"] = res.eigenvalue
            row["iterations"] = res.diagnostics["iterations"]
        except Exception as exc:  # recorded per row
            row["eigenvalue"] = math.nan
            row["error"] = f"{type(exc).__name__}: {exc}"
        table.rows.append(row)
    vals = [r["eigenvalue"] for r in table.rows]
    keys = [(r["gamma"], r["delta"], r["eps"]) for r in table.rows]
    ok = True
    seen_axis = set()
    for (ka, va), (kb, vb) in zip(zip(keys, vals), zip(keys[1:], vals[1:])):
        axis = _varying(ka, kb)
        seen_axis.add(axis)
        if axis in ("delta", "eps"):
            idx = 1 if axis == "delta" else 2
            up = (kb[idx] - ka[idx]) * (vb - va) > 0
            ok = ok and bool(up)
    table.varying = seen_axis.pop() if len(seen_axis) == 1 else None
    if table.varying in ("delta", "eps"):
        table.monotone = ok
    table.strictly_decreasing = bool(np.all(np.diff(vals) < 0)) if len(vals) > 1 else None
    if table.varying == "gamma" and len(vals) >= 3 and all(g < 2 for g, _, _ in keys):
        table.limit = richardson_gamma_limit([k[0] for k in keys[-3:]], vals[-3:])
    return table
