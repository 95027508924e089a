"""Physical parameters and derived timescales for a conducting permeable target.

All quantities are SI. The target is characterized by its relative
permeability mu_c, conductivity sigma_c and length scale L_c (sphere
radius for spherical targets); the background by mu_b and optionally
sigma_b. Derived from these are the magnetic diffusion constant

    D_c = 1 / (mu0 * mu_c * sigma_c),

the bulk decay time tau_c = L_c^2 / D_c, and the crossover time

    tau_mag = tau_c * (mu_b / mu_c)^2,

which separates the t^{-1/2} early response from the t^{-3/2} falloff
of magnetic surface modes. For high-contrast targets (mu_c >> mu_b)
tau_mag is far shorter than tau_c.
"""
from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass

MU_0 = 4.0e-7 * math.pi  # vacuum permeability, H/m


@dataclass(frozen=True)
class TargetParams:
    """Target and background material properties.

    mu_c, mu_b are relative permeabilities (dimensionless), sigma_c the
    target conductivity in S/m, L_c the target length scale in meters.
    sigma_b and the sensor-target distance R are optional metadata; they
    do not enter any computation here.
    """

    mu_c: float
    mu_b: float
    sigma_c: float
    L_c: float
    sigma_b: float | None = None
    R: float | None = None

    def __post_init__(self):
        for name in ("mu_c", "mu_b", "sigma_c", "L_c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if self.sigma_b is not None and (not math.isfinite(self.sigma_b) or self.sigma_b < 0):
            raise ValueError(f"sigma_b must be >= 0, got {self.sigma_b!r}")
        if self.R is not None and (not math.isfinite(self.R) or self.R <= 0):
            raise ValueError(f"R must be > 0, got {self.R!r}")

    @property
    def mu_ratio(self) -> float:
        """Permeability contrast mu_c / mu_b."""
        return self.mu_c / self.mu_b


@dataclass(frozen=True)
class DerivedTimescales:
    """Diffusion constant and characteristic times derived from TargetParams.

    tau_e_estimate is a heuristic onset time for bulk effects, taken as
    tau_c over the square of the slowest decay root (pi^2 when no
    spectrum is supplied). It is a labeled estimate, not a theory value.
    """

    D_c: float
    tau_c: float
    tau_mag: float
    tau_e_estimate: float
    D_b: float | None = None
    tau_b: float | None = None


def derive_timescales(p: TargetParams, zeta_11: float | None = None) -> DerivedTimescales:
    """Compute diffusion constant and timescales from material properties.

    zeta_11, if given, is the slowest sphere decay root; it sharpens the
    bulk-onset estimate tau_e_estimate = tau_c / zeta_11^2. Without it
    the root defaults to pi (its value at unit permeability contrast).
    """
    D_c = 1.0 / (MU_0 * p.mu_c * p.sigma_c)
    tau_c = p.L_c ** 2 / D_c
    tau_mag = tau_c * (p.mu_b / p.mu_c) ** 2
    z = math.pi if zeta_11 is None else float(zeta_11)
    if z <= 0:
        raise ValueError(f"zeta_11 must be positive, got {zeta_11!r}")
    tau_e = tau_c / z ** 2

    D_b = None
    tau_b = None
    if p.sigma_b is not None and p.sigma_b > 0:
        D_b = 1.0 / (MU_0 * p.mu_b * p.sigma_b)
        if p.R is not None:
            tau_b = p.R ** 2 / D_b
    return DerivedTimescales(D_c=D_c, tau_c=tau_c, tau_mag=tau_mag,
                             tau_e_estimate=tau_e, D_b=D_b, tau_b=tau_b)


def epsilon_of_t(d: DerivedTimescales, L_c: float, t):
    """Boundary-layer small parameter sqrt(D_c * t) / L_c.

    Vanishes at t=0, reaches 1 at t=tau_c and mu_b/mu_c at t=tau_mag.
    Accepts scalars or arrays of times.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    out = np.sqrt(d.D_c * t) / L_c
    return float(out) if out.ndim == 0 else out
