"""Sequence acceleration for eigenvalue limits."""
from __future__ import annotations

from typing import Sequence

import numpy as np


def richardson_gamma_limit(gammas: Sequence[float], values: Sequence[float],
                           power: float = 2.0 / 3.0) -> float:
    """Extrapolate eigenvalues at ``gamma < 2`` to ``gamma = 2``.

    The principal eigenvalue behaves like a power series in
    ``s = (2 - gamma)^power`` near the critical exponent (the leading
    correction comes from the transition region of a Bessel zero of large
    order, hence the default 2/3). With ``k`` points a degree ``k - 1``
    polynomial in ``s`` is fitted exactly and evaluated at ``s = 0``.
    """
    g = np.asarray(gammas, dtype=float)
    v = np.asarray(values, dtype=float)
    if g.shape != v.shape or g.size < 2:
        raise ValueError("need at least two (gamma, value) pairs of equal length")
    if np.any(g >= 2):
        raise ValueError("extrapolation points must satisfy gamma < 2")
    s = (2.0 - g) ** power
    if np.unique(s).size != s.size:
        raise ValueError("duplicate gamma values")
    coeffs = np.polyfit(s, v, s.size - 1)
    return float(coeffs[-1])


def aitken(values: Sequence[float]) -> float:
    """Aitken delta-squared estimate from the last three terms."""
    x0, x1, x2 = (float(x) for x in values[-3:])
    den = x2 - 2 * x1 + x0
    if den == 0:
        return x2
    return x2 - (x2 - x1) ** 2 / den
