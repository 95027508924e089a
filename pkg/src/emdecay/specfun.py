"""Special functions used throughout: erfc, scaled erfc, spherical Bessel j_l.

Thin validation wrappers over scipy.special. The one policy decision that
matters numerically: every expression of the form exp(k^2 t) * erfc(k sqrt(t))
must be evaluated through erfcx, never as the explicit product, because the
exponential overflows near k^2 t ~ 700 while the product stays O(1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp


def erfc(x):
    """Complementary error function; accepts scalars or arrays."""
    return _sp.erfc(x)


def erfcx(x):
    """Scaled complementary error function exp(x^2) erfc(x) for x >= 0.

    Negative arguments are rejected: no caller needs them, and the scaled
    form grows like exp(x^2) there, which would silently reintroduce the
    overflow this function exists to avoid.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("erfcx requires x >= 0")
    out = _sp.erfcx(x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BesselEval:
    """Spherical Bessel values j_0(x)..j_{l_max}(x) at a single point."""

    l_max: int
    x: float
    values: np.ndarray


def spherical_bessel_j(l_max: int, x: float) -> BesselEval:
    """Evaluate j_0..j_{l_max} at x >= 0, with exact closed forms at x=0."""
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    orders = np.arange(l_max + 1)
    if x == 0.0:
        vals = np.zeros(l_max + 1)
        vals[0] = 1.0
    else:
        vals = _sp.spherical_jn(orders, x)
    return BesselEval(l_max=l_max, x=float(x), values=vals)
