"""Sampled radial functions and eigen-solver results."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import PucciParams


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial function sampled on a strictly increasing grid.

    Attributes
    ----------
    radii, values, derivs : ndarray
        Nodes, ``u`` and ``u'``.
    gamma : float
        Exponent of the potential the profile was computed for.
    params : PucciParams
    second_derivs : ndarray, optional
        ``u''`` when the producing engine knows it pointwise (shooting).
    origin_value : float, optional
        ``u(0)`` when the profile extends continuously to the origin.
    """

    radii: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    gamma: float
    params: PucciParams
    second_derivs: np.ndarray | None = None
    origin_value: float | None = None

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "derivs", np.asarray(self.derivs, dtype=float))
        if self.second_derivs is not None:
            object.__setattr__(self, "second_derivs",
                               np.asarray(self.second_derivs, dtype=float))
        n = r.shape[0]
        if self.values.shape != (n,) or self.derivs.shape != (n,):
            raise ValueError("radii, values and derivs must have equal length")
        if self.second_derivs is not None and self.second_derivs.shape != (n,):
            raise ValueError("second_derivs has the wrong length")
        if n > 1 and np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")

    def __len__(self) -> int:
        return self.radii.shape[0]

    def scaled(self, factor: float) -> "RadialProfile":
        s2 = None if self.second_derivs is None else factor * self.second_derivs
        u0 = None if self.origin_value is None else factor * self.origin_value
        return RadialProfile(self.radii, factor * self.values,
                             factor * self.derivs, self.gamma, self.params,
                             s2, u0)

    def sample(self, radii) -> np.ndarray:
        """Piecewise cubic Hermite interpolation of ``u``.

        Points below the first node use ``origin_value`` (linear blend) when
        known, else the first value. Points past the last node are clamped.
        """
        x = np.atleast_1d(np.asarray(radii, dtype=float))
        r, u, du = self.radii, self.values, self.derivs
        out = np.empty_like(x)
        k = np.clip(np.searchsorted(r, x) - 1, 0, len(r) - 2)
        h = r[k + 1] - r[k]
        s = (x - r[k]) / h
        inside = (x >= r[0]) & (x <= r[-1])
        ss = s[inside]
        kk = k[inside]
        hh = h[inside]
        out[inside] = ((1 + 2 * ss) * (1 - ss) ** 2 * u[kk]
                       + ss * (1 - ss) ** 2 * hh * du[kk]
                       + ss * ss * (3 - 2 * ss) * u[kk + 1]
                       + ss * ss * (ss - 1) * hh * du[kk + 1])
        below = x < r[0]
        if np.any(below):
            if self.origin_value is not None:
                frac = x[below] / r[0]
                out[below] = self.origin_value + frac * (u[0] - self.origin_value)
            else:
                out[below] = u[0]
        out[x > r[-1]] = u[-1]
        return out


@dataclass(eq=False)
class EigenResult:
    """Eigenvalue estimate, optional first zero, eigenfunction and diagnostics."""

    eigenvalue: float
    profile: RadialProfile
    engine: str
    first_zero: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.eigenvalue > 0:
            raise ValueError(f"eigenvalue must be positive, got {self.eigenvalue}")
