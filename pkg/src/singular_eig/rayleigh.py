"""Weighted Rayleigh quotient on the unit interval.

    R[u] = int_0^1 u'^2 r^(N~-1) dr / int_0^1 u^2 r^(N~-1-gamma) dr,
    u(1) = 0,

minimized with linear finite elements on a geometric mesh. For the Pucci
operators ``c * min R`` is the principal eigenvalue whenever the
eigenfunction stays in the convex branch, with ``(c, N~) = (L, N+)`` for
M+ and ``(l, N-)`` for M-.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import PUCCI_MINUS, PUCCI_PLUS, PucciParams
from .errors import MeshTooCoarse, NoConvergence, UnsupportedOperator, ZeroDenominator
from .profile import RadialProfile

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True, eq=False)
class WeightedMesh:
    """Mesh on [0, 1] with the stiffness and mass weights sampled at nodes.

    ``nodes[0] = 0`` is a natural-boundary node, ``nodes[-1] = 1`` carries
    the Dirichlet condition.
    """

    nodes: np.ndarray
    stiffness_weight: np.ndarray
    mass_weight: np.ndarray
    n_tilde: float
    gamma: float

    @property
    def size(self) -> int:
        return self.nodes.shape[0]


def geometric_mesh(n_nodes: int, n_tilde: float, gamma: float,
                   r_min: float = 1e-8) -> WeightedMesh:
    """Nodes ``0, q^(n-2), ..., q, 1`` with ``q^(n-2) = r_min``."""
    if n_nodes < 3:
        raise ValueError("need at least 3 nodes")
    if not 0 < r_min < 1:
        raise ValueError("r_min must lie in (0, 1)")
    if not n_tilde > gamma:
        raise ValueError("the mass weight is not integrable at 0 (need N~ > gamma)")
    expo = np.linspace(math.log(r_min), 0.0, n_nodes - 1)
    nodes = np.concatenate([[0.0], np.exp(expo)])
    nodes[-1] = 1.0
    stiff = nodes ** (n_tilde - 1)
    mass = np.zeros_like(nodes)
    mass[1:] = nodes[1:] ** (n_tilde - 1 - gamma)
    return WeightedMesh(nodes, stiff, mass, float(n_tilde), float(gamma))


def _element_integrals(mesh: WeightedMesh):
    """Exact stiffness weights and mass blocks per element.

    Returns ``(k, m00, m01, m11)`` where element ``e`` contributes
    ``k[e] [[1, -1], [-1, 1]]`` to K and ``[[m00, m01], [m01, m11]]`` to M.
    """
    r = mesh.nodes
    nt, g = mesh.n_tilde, mesh.gamma
    a, b = r[:-1], r[1:]
    h = b - a
    # int_a^b r^(N~-1) dr / h^2, written to avoid cancellation for thin elements
    k = np.empty_like(h)
    first = a == 0
    k[first] = b[first] ** nt / nt / h[first] ** 2
    rest = ~first
    ratio = h[rest] / a[rest]
    k[rest] = a[rest] ** nt * np.expm1(nt * np.log1p(ratio)) / nt / h[rest] ** 2
    p = nt - 1 - g
    m00 = np.empty_like(h)
    m01 = np.empty_like(h)
    m11 = np.empty_like(h)
    # first element [0, b]: closed form with phi0 = 1 - r/b, phi1 = r/b
    bb = b[first]
    scale = bb ** (p + 1)
    m00[first] = scale * (1 / (p + 1) - 2 / (p + 2) + 1 / (p + 3))
    m01[first] = scale * (1 / (p + 2) - 1 / (p + 3))
    m11[first] = scale / (p + 3)
    # others: Gauss-Legendre, exact to round-off for these smooth weights
    s = 0.5 * (_GL_X + 1.0)
    wq = 0.5 * _GL_W
    ar, hr = a[rest][:, None], h[rest][:, None]
    x = ar + hr * s[None, :]
    wt = x ** p * wq[None, :] * hr
    phi1 = s[None, :]
    phi0 = 1.0 - phi1
    m00[rest] = np.sum(wt * phi0 * phi0, axis=1)
    m01[rest] = np.sum(wt * phi0 * phi1, axis=1)
    m11[rest] = np.sum(wt * phi1 * phi1, axis=1)
    return k, m00, m01, m11


def assemble(mesh: WeightedMesh):
    """Tridiagonal stiffness and mass on the free nodes (all but r = 1).

    Returns ``(k_diag, k_off, m_diag, m_off)``.
    """
    k, m00, m01, m11 = _element_integrals(mesh)
    n = mesh.size
    kd = np.zeros(n)
    md = np.zeros(n)
    kd[:-1] += k
    kd[1:] += k
    md[:-1] += m00
    md[1:] += m11
    ko = -k
    mo = m01
    return kd[:-1], ko[:-1], md[:-1], mo[:-1]


def fem_quotient(values: np.ndarray, mesh: WeightedMesh) -> float:
    """Rayleigh quotient of the piecewise-linear interpolant of ``values``."""
    kd, ko, md, mo = assemble(mesh)
    u = np.asarray(values, dtype=float)[:-1]
    num = u @ kernels._sym_matvec(kd, ko, u)
    den = u @ kernels._sym_matvec(md, mo, u)
    if not den > 0:
        raise ZeroDenominator("weighted mass of the profile is zero")
    return float(num / den)


def rayleigh_quotient(profile: RadialProfile, mesh: WeightedMesh,
                      points: int = 4) -> float:
    """Quotient of a smooth profile by composite Gauss quadrature.

    The profile's cubic Hermite interpolant (values and ``u'``) is
    integrated element by element on the mesh. Elements below the first
    profile node are skipped.

    Raises
    ------
    ZeroDenominator
        If the weighted mass vanishes.
    """
    x_gl, w_gl = np.polynomial.legendre.leggauss(points)
    s = 0.5 * (x_gl + 1.0)
    wq = 0.5 * w_gl
    r, u, du = profile.radii, profile.values, profile.derivs
    nodes = mesh.nodes
    a, b = nodes[:-1], nodes[1:]
    keep = a >= r[0]
    a, b = a[keep], b[keep]
    h = (b - a)[:, None]
    x = a[:, None] + h * s[None, :]
    xf = x.ravel()
    k = np.clip(np.searchsorted(r, xf) - 1, 0, len(r) - 2)
    hh = r[k + 1] - r[k]
    t = (xf - r[k]) / hh
    # derivative of the cubic Hermite interpolant
    dval = ((6 * t * t - 6 * t) * u[k] + (3 * t * t - 4 * t + 1) * hh * du[k]
            + (6 * t - 6 * t * t) * u[k + 1] + (3 * t * t - 2 * t) * hh * du[k + 1]) / hh
    val = profile.sample(xf)
    dval = dval.reshape(x.shape)
    val = val.reshape(x.shape)
    nt, g = mesh.n_tilde, mesh.gamma
    # square after weighting: u' alone can overflow on deep meshes
    num = np.sum(h * wq[None, :] * (dval * x ** (0.5 * (nt - 1))) ** 2)
    den = np.sum(h * wq[None, :] * (val * x ** (0.5 * (nt - 1 - g))) ** 2)
    if not den > 0:
        raise ZeroDenominator("weighted mass of the profile is zero")
    return float(num / den)


@dataclass(eq=False)
class VariationalResult:
    """Smallest eigenpair of the discrete pencil.

    ``bridge_eigenvalue`` is ``c * lambda_var`` with ``c`` the ellipticity
    constant of the operator's convex branch. ``exploratory`` marks
    ``gamma <= 1``, where that identification is not claimed.
    """

    lambda_var: float
    minimizer: RadialProfile
    quotient_history: np.ndarray
    mesh: WeightedMesh
    bridge_eigenvalue: float
    exploratory: bool
    diagnostics: dict = field(default_factory=dict)


def _variational_constants(params: PucciParams, operator_kind: str):
    if operator_kind in (PUCCI_PLUS, "pucci+"):
        return params.lambda_max, params.n_tilde_plus
    if operator_kind in (PUCCI_MINUS, "pucci-"):
        return params.lambda_min, params.n_tilde_minus
    raise UnsupportedOperator(f"variational engine supports the Pucci operators, "
                              f"got {operator_kind!r}")


def variational_eigenvalue(params: PucciParams, gamma: float,
                           mesh_size: int = 4096, operator_kind: str = PUCCI_PLUS,
                           r_min: float | None = None, tol: float = 1e-12,
                           max_iter: int = 20000,
                           separation: float = 1e-10) -> VariationalResult:
    """Minimize the weighted quotient on a geometric mesh.

    Parameters
    ----------
    params : PucciParams
    gamma : float
        Exponent in ``[0, 2)``; values ``<= 1`` are labeled exploratory.
    mesh_size : int
        Number of mesh nodes including 0 and 1.
    operator_kind : str
        Selects ``(L, N+)`` or ``(l, N-)``.
    r_min : float, optional
        Smallest positive node. Defaults to 1e-8, moved further toward 0
        close to gamma = 2, where the minimizer's transition layer sits at
        ``ln(1/r)`` of order ``(2 - gamma)^(-1/3)``.

    Raises
    ------
    MeshTooCoarse
        If the two smallest discrete eigenvalues are not separated.
    NoConvergence
        If inverse iteration stalls.
    """
    if not 0 <= gamma < 2:
        raise ValueError(f"variational engine needs 0 <= gamma < 2, got {gamma}")
    c, nt = _variational_constants(params, operator_kind)
    if r_min is None:
        r_min = default_r_min(nt, gamma)
    mesh = geometric_mesh(mesh_size, nt, gamma, r_min)
    kd, ko, md, mo = assemble(mesh)
    x0 = 1.0 - mesh.nodes[:-1] ** 2 + 1e-3
    history = np.empty(max_iter)
    q, x, iters, status = kernels.inverse_iteration(kd, ko, md, mo, x0, tol,
                                                    max_iter, history)
    if status == 2:
        raise NoConvergence("singular pivot in the stiffness solve")
    if status == 1:
        raise NoConvergence(f"inverse iteration did not settle in {max_iter} steps")
    below_lo = kernels.count_below(kd, ko, md, mo, q * (1 - separation))
    below_hi = kernels.count_below(kd, ko, md, mo, q * (1 + separation))
    if below_lo != 0 or below_hi != 1:
        raise MeshTooCoarse(
            f"smallest eigenvalue not isolated (counts {below_lo}, {below_hi})")
    if x[np.argmax(np.abs(x))] < 0:
        x = -x
    vals = np.concatenate([x, [0.0]])
    vals = np.maximum(vals, 0.0)
    vals /= math.sqrt(vals[:-1] @ kernels._sym_matvec(md, mo, vals[:-1]))
    derivs = np.gradient(vals, mesh.nodes, edge_order=2)
    derivs[0] = 0.0
    r = mesh.nodes.copy()
    r[0] = 0.0
    # the node at 0 is dropped from the profile (radii must be positive)
    minimizer = RadialProfile(r[1:], vals[1:], derivs[1:], gamma, params,
                              origin_value=float(vals[0]))
    return VariationalResult(
        float(q), minimizer, history[:iters].copy(), mesh, c * float(q),
        gamma <= 1, {"iterations": int(iters), "r_min": r_min,
                     "operator": operator_kind})


def default_r_min(n_tilde: float, gamma: float) -> float:
    """Smallest mesh node: 1e-8, or deeper as gamma approaches 2."""
    h = 2.0 - gamma
    nu = max(n_tilde - 2.0, 1e-3) / h
    # small orders vary like r^h down to the origin; 1e-8 in r^h suffices
    depth = min(8.0 * nu ** (-2.0 / 3.0), math.log(1e8)) / h
    return math.exp(-min(max(math.log(1e8), depth), 700.0))


def hardy_limit(params: PucciParams) -> float:
    """``((N+ - 2)/2)^2``."""
    return (0.5 * (params.n_tilde_plus - 2.0)) ** 2


@dataclass
class ShapeReport:
    monotone: bool
    convex: bool
    monotone_violations: np.ndarray
    convex_violations: np.ndarray
    worst_increase: float
    worst_concavity: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.convex


def minimizer_shape_check(result, tol: float = 1e-8) -> ShapeReport:
    """Check the minimizer is nonincreasing and convex on the interior.

    Accepts a :class:`VariationalResult` or a bare :class:`RadialProfile`.
    Second differences use the nonuniform three-point formula and are
    compared against ``-tol`` scaled by the profile's sup norm; violation
    indices refer to ``radii``.
    """
    prof = result.minimizer if isinstance(result, VariationalResult) else result
    r, u = prof.radii, prof.values
    scale = max(float(np.max(np.abs(u))), 1e-300)
    du = np.diff(u)
    inc = np.nonzero(du > tol * scale)[0] + 1
    h0 = r[1:-1] - r[:-2]
    h1 = r[2:] - r[1:-1]
    # divided second difference times the local spacing squared
    d2 = 2 * (h0 * u[2:] - (h0 + h1) * u[1:-1] + h1 * u[:-2]) / (h0 * h1 * (h0 + h1))
    d2n = d2 * h0 * h1
    conc = np.nonzero(d2n < -tol * scale)[0] + 1
    return ShapeReport(
        inc.size == 0, conc.size == 0, inc, conc,
        float(du.max(initial=0.0)) / scale,
        float(-min(d2n.min(initial=0.0), 0.0)) / scale)
