"""Log-log power-law slope fitting and crossover estimation for decay curves.

Slopes are read the way they are read off published decay plots: ordinary
least squares on log V vs log t with uniform weights inside a caller
chosen time window. Two windows yield a crossover estimate from the
intersection of the fitted asymptotes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError

# slope bands for regime labeling
_REGIMES = (("early-early", -0.5), ("late-early", -1.5))
_REGIME_HALFWIDTH = 0.15


@dataclass(frozen=True)
class FitReport:
    """Fitted log-log slopes per window, with an optional crossover estimate.

    slopes[i], slope_stderrs[i] and intercepts[i] belong to windows[i]
    (time bounds in seconds); crossover_estimate is the intersection time
    of the first two fitted asymptotes when two windows were supplied.
    """

    windows: tuple
    slopes: tuple
    slope_stderrs: tuple
    intercepts: tuple
    regime_labels: tuple
    crossover_estimate: float | None = None


def fit_power_law(t, V, window):
    """OLS slope/intercept/stderr of log V vs log t inside a time window.

    Raises NumericError when the window leaves the data span, holds fewer
    than 5 samples, or contains nonpositive values.
    """
    t = np.asarray(t, dtype=float)
    V = np.asarray(V, dtype=float)
    lo, hi = float(window[0]), float(window[1])
    if not (lo > 0 and hi > lo):
        raise ValueError(f"window must satisfy 0 < lo < hi, got ({lo}, {hi})")
    if lo < t[0] or hi > t[-1]:
        raise NumericError(f"window ({lo:.3g}, {hi:.3g}) outside data span "
                           f"({t[0]:.3g}, {t[-1]:.3g})")
    mask = (t >= lo) & (t <= hi)
    n = int(mask.sum())
    if n < 5:
        raise NumericError(f"too few points in window ({lo:.3g}, {hi:.3g}): {n} < 5")
    if np.any(V[mask] <= 0):
        raise NumericError(f"nonpositive values inside window ({lo:.3g}, {hi:.3g})")
    x = np.log(t[mask])
    y = np.log(V[mask])
    A = np.column_stack([x, np.ones(n)])
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    if n > 2:
        sigma2 = resid @ resid / (n - 2)
        cov = sigma2 * np.linalg.inv(A.T @ A)
        stderr = math.sqrt(max(cov[0, 0], 0.0))
    else:
        stderr = 0.0
    return float(coef[0]), float(coef[1]), stderr


def _label(slope):
    for name, center in _REGIMES:
        if abs(slope - center) <= _REGIME_HALFWIDTH:
            return name
    return "transition"


def fit_windows(t, V, windows) -> FitReport:
    """Fit one or more windows; two windows add the asymptote crossover."""
    if len(windows) == 0:
        raise ValueError("at least one window is required")
    slopes, stderrs, intercepts, labels = [], [], [], []
    for w in windows:
        s, b, e = fit_power_law(t, V, w)
        slopes.append(s)
        stderrs.append(e)
        intercepts.append(b)
        labels.append(_label(s))
    crossover = None
    if len(windows) >= 2:
        s1, s2 = slopes[0], slopes[1]
        if abs(s1 - s2) < 1e-12:
            raise NumericError("fitted asymptotes are parallel; no crossover")
        crossover = math.exp((intercepts[1] - intercepts[0]) / (s1 - s2))
    return FitReport(windows=tuple(tuple(map(float, w)) for w in windows),
                     slopes=tuple(slopes), slope_stderrs=tuple(stderrs),
                     intercepts=tuple(intercepts), regime_labels=tuple(labels),
                     crossover_estimate=crossover)
