"""Exact decay solution for a homogeneous conducting permeable sphere.

The interior field of multipole order l decays as a sum over radial
overtones. Matching a regular interior solution j_l(zeta r / L_c) to a
decaying exterior multipole potential r^{-(l+1)}, with normal B and
tangential H continuous across the surface, gives the characteristic
equation for the dimensionless decay rates zeta_{ln}:

    zeta * j_{l-1}(zeta) + l * (mu_c/mu_b - 1) * j_l(zeta) = 0.

At unit permeability contrast this collapses to j_{l-1}(zeta) = 0. The
per-multipole relaxation function is the overtone series

    H_l(tau) = sum_n a_n exp(-zeta_n^2 tau) / zeta_n^2,
    a_n = j_l^2 / (j_l^2 - j_{l+1} j_{l-1})   (evaluated at zeta_n),

with tau = t / tau_c, and the closed-form initial value
H_l(0) = (mu_b/2mu_c) / [l + (l+1) mu_b/mu_c]. The series converges only
like 1/zeta_n^2 near tau = 0, so every evaluation reports an explicit
truncation bound alongside the value.

Surface-mode labels for the sphere: kappa_lm = l / sqrt(tau_mag) with
multiplicity 2l+1, transverse eigenvalue lambda_lm = l(l+1) / (L_c^2 mu_c
sqrt(D_c)), and mode length scale L_lm = L_c / l.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special as _sp

from .errors import NumericError
from .params import TargetParams, derive_timescales

_RESIDUAL_TOL = 1e-12
_BRACKET_STEP = math.pi / 8  # scan step; guards against near-tangent root pairs
_SCAN_START = 1e-3  # zeta = 0 is excluded: not a decay mode


def characteristic_residual(l, mu_ratio, z):
    """Characteristic function whose positive zeros are the decay rates.

    Normalized by max(1, mu_ratio) so the residual magnitude stays O(1)
    across permeability contrasts; vectorized over z.
    """
    z = np.asarray(z, dtype=float)
    jlm1 = _sp.spherical_jn(l - 1, z)
    jl = _sp.spherical_jn(l, z)
    return (z * jlm1 + l * (mu_ratio - 1.0) * jl) / max(1.0, mu_ratio)


def _characteristic_deriv(l, mu_ratio, z):
    z = np.asarray(z, dtype=float)
    jlm1 = _sp.spherical_jn(l - 1, z)
    dlm1 = _sp.spherical_jn(l - 1, z, derivative=True)
    dl = _sp.spherical_jn(l, z, derivative=True)
    return (jlm1 + z * dlm1 + l * (mu_ratio - 1.0) * dl) / max(1.0, mu_ratio)


@dataclass(frozen=True)
class SphereSpectrum:
    """Decay-rate roots and series coefficients for one multipole order."""

    l: int
    mu_ratio: float
    roots: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        r = self.roots
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("roots must be positive and strictly increasing")
        if len(self.coefficients) != len(r):
            raise ValueError("coefficients must pair one-to-one with roots")


class SeriesValue(NamedTuple):
    """A truncated series value with its tail (truncation) error bound."""

    value: float
    tail_bound: float


def find_roots(l: int, mu_ratio: float, N: int = 200) -> SphereSpectrum:
    """Find the N smallest positive decay-rate roots for multipole order l.

    Brackets sign changes on a pi/8 scan grid, bisects each bracket to
    width 1e-6, then polishes with Newton steps using the analytic
    derivative. Every root must satisfy |residual| < 1e-12; the series
    coefficients a_n are computed at the polished roots.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if mu_ratio <= 0:
        raise ValueError(f"mu_ratio must be > 0, got {mu_ratio}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")

    z_hi = (N + 2) * math.pi + l
    grid = np.arange(_SCAN_START, z_hi, _BRACKET_STEP)
    f = characteristic_residual(l, mu_ratio, grid)
    sign_change = np.nonzero(f[:-1] * f[1:] < 0)[0]
    if len(sign_change) < N:
        raise NumericError(
            f"bracketing scan isolated only {len(sign_change)} of {N} roots "
            f"on ({_SCAN_START}, {z_hi:.3f}) with step pi/8 (l={l}, mu_ratio={mu_ratio})")
    lo = grid[sign_change[:N]].copy()
    hi = grid[sign_change[:N] + 1].copy()
    flo = f[sign_change[:N]].copy()

    # vectorized bisection down to bracket width 1e-6
    while np.max(hi - lo) > 1e-6:
        mid = 0.5 * (lo + hi)
        fmid = characteristic_residual(l, mu_ratio, mid)
        left = flo * fmid <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fmid)

    z = 0.5 * (lo + hi)
    for _ in range(12):
        res = characteristic_residual(l, mu_ratio, z)
        if np.max(np.abs(res)) < 1e-13:
            break
        step = res / _characteristic_deriv(l, mu_ratio, z)
        z = np.clip(z - step, lo, hi)
    res = np.abs(characteristic_residual(l, mu_ratio, z))
    if np.max(res) >= _RESIDUAL_TOL:
        k = int(np.argmax(res))
        raise NumericError(
            f"root polish stalled at zeta={z[k]:.12g} (l={l}, mu_ratio={mu_ratio}), "
            f"residual {res[k]:.3e} >= {_RESIDUAL_TOL}")

    jl = _sp.spherical_jn(l, z)
    jp = _sp.spherical_jn(l + 1, z)
    jm = _sp.spherical_jn(l - 1, z)
    den = jl ** 2 - jp * jm
    scale = jl ** 2 + np.abs(jp * jm)
    bad = np.abs(den) < 1e-12 * scale
    if np.any(bad):
        k = int(np.nonzero(bad)[0][0])
        raise NumericError(
            f"degenerate coefficient denominator at root {k + 1} "
            f"(zeta={z[k]:.12g}, j_l={jl[k]:.3e}, j_(l+1)={jp[k]:.3e}, "
            f"j_(l-1)={jm[k]:.3e}); defective root suspected")
    a = jl ** 2 / den
    if np.any(a <= 0):
        warnings.warn(
            f"nonpositive series coefficient encountered (l={l}, mu_ratio={mu_ratio}); "
            "the relaxation series may not be monotone", stacklevel=2)
    return SphereSpectrum(l=l, mu_ratio=float(mu_ratio), roots=z, coefficients=a)


def H_l_zero(l: int, mu_ratio: float) -> float:
    """Closed-form initial value of the relaxation series, H_l(0)."""
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if mu_ratio <= 0:
        raise ValueError(f"mu_ratio must be > 0, got {mu_ratio}")
    return 1.0 / (2.0 * mu_ratio * l + 2.0 * (l + 1))


def _tail_bound(roots, coeffs, tau):
    """Upper bound on the dropped series tail past the last computed root.

    Later roots are spaced by at least min(pi, last observed spacing), and
    the coefficients approach 1 at large overtone index (from below for
    contrast >= 1); the multiplier adapts to the observed tail coefficients
    with a 5% safety margin. The k-sum is closed with an integral
    overestimate of its own remainder, so the whole expression is a true
    upper bound for the dropped terms.
    """
    zN = roots[-1]
    delta = min(math.pi, roots[-1] - roots[-2]) if len(roots) > 1 else 3.0
    c_tail = 1.05 * max(1.0, float(np.max(coeffs[-10:])))
    k = np.arange(1, 201)
    s = float(np.sum(1.0 / (zN + k * delta) ** 2))
    s += 1.0 / (delta * (zN + 200 * delta))
    return c_tail * math.exp(-zN ** 2 * tau) * s


def H_l(spec: SphereSpectrum, tau: float) -> SeriesValue:
    """Evaluate the relaxation series at dimensionless time tau = t/tau_c.

    Returns the truncated sum over the available roots together with an
    upper bound on the truncation error.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    z2 = spec.roots ** 2
    terms = spec.coefficients * np.exp(-z2 * tau) / z2
    return SeriesValue(value=float(np.sum(terms)),
                       tail_bound=_tail_bound(spec.roots, spec.coefficients, tau))


@dataclass(frozen=True)
class SphereModeLabels:
    """Surface-mode labels (l, m) with eigenvalues and length scale."""

    l: int
    m: int
    kappa_lm: float  # s^-1/2
    lambda_lm: float
    L_lm: float  # m


def sphere_mode_labels(p: TargetParams, l_max: int) -> list[SphereModeLabels]:
    """Analytic sphere surface-mode labels for 1 <= l <= l_max, |m| <= l."""
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    d = derive_timescales(p)
    out = []
    for l in range(1, l_max + 1):
        kappa = l / math.sqrt(d.tau_mag)
        lam = l * (l + 1) / (p.L_c ** 2 * p.mu_c * math.sqrt(d.D_c))
        for m in range(-l, l + 1):
            out.append(SphereModeLabels(l=l, m=m, kappa_lm=kappa,
                                        lambda_lm=lam, L_lm=p.L_c / l))
    return out


@dataclass(frozen=True)
class ScreeningCurrent:
    """Azimuthal screening current K_phi(theta) = amplitude * sin(theta).

    Frozen-interior solution for a uniform axial primary field H0 that is
    switched off instantly: the interior field keeps its magnetostatic
    value H_interior = 3 mu_b H0 / (mu_c + 2 mu_b), the exterior collapses
    to the decaying dipole fixed by flux continuity, and the surface
    current is the tangential-H jump. The contrast factors cancel, leaving
    amplitude = (3/2) H0 for every permeability ratio.
    """

    amplitude: float
    H_interior: float
    dipole_coefficient: float  # exterior potential is dipole_coefficient * cos(theta) / r^2

    def __call__(self, theta):
        return self.amplitude * np.sin(theta)


def initial_screening_sphere(p: TargetParams, H0: float,
                             geometry: str = "sphere") -> ScreeningCurrent:
    """Surface current at pulse termination for a uniform axial field H0."""
    if geometry != "sphere":
        raise ValueError(f"only spherical targets are supported, got geometry={geometry!r}")
    H_in = 3.0 * p.mu_b * H0 / (p.mu_c + 2.0 * p.mu_b)
    dip = p.L_c ** 3 * p.mu_c * H_in / (2.0 * p.mu_b)
    return ScreeningCurrent(amplitude=1.5 * H0, H_interior=H_in, dipole_coefficient=dip)
