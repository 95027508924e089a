"""Early-time boundary-layer response of surface modes.

After the primary pulse terminates, each surface mode relaxes by diffusing
into the conductor. In the scaled depth coordinate Z = z / sqrt(D_c) <= 0
the per-mode profile obeys the 1D diffusion equation with the mixed
boundary condition (d/dZ + kappa) H = 1 at Z = 0, and is given in closed
form by

    H(Z,t;kappa) = (1/kappa) [ erfc(|Z|/sqrt(4t))
                               - erfcx(kappa sqrt(t) + |Z|/(2 sqrt(t)))
                                 * exp(-Z^2/4t) ],

with the kappa = 0 limit sqrt(4t/pi) exp(-Z^2/4t) - |Z| erfc(|Z|/sqrt(4t)).
The erfcx rearrangement keeps every factor bounded for Z <= 0, t > 0; the
naive form overflows once kappa^2 t exceeds ~700.

The boundary trace H(0,t;kappa) = (1/kappa)(1 - erfcx(kappa sqrt(t))) rises
like sqrt(4t/pi) while kappa^2 t << 1 and saturates at 1/kappa afterwards;
its time derivative correspondingly crosses over from t^{-1/2} to t^{-3/2}
near t = 1/kappa^2, which is the signature these models exist to predict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import TargetParams, derive_timescales
from .specfun import erfc, erfcx
from .sphere import H_l_zero

_KZ_SWITCH = 1e-6  # below this kappa*sqrt(t), the 1/kappa form loses precision
_SERIES_SWITCH = 5e3  # above this kappa*sqrt(t), direct subtraction cancels


@dataclass(frozen=True)
class ProfileQuery:
    """A single profile evaluation point: interior depth Z <= 0, time t > 0."""

    Z: float
    t: float
    kappa: float = 0.0

    def __post_init__(self):
        if self.Z > 0:
            raise ValueError(f"Z must be <= 0 (interior coordinate), got {self.Z}")
        if self.t <= 0:
            raise ValueError(f"t must be > 0, got {self.t}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")


def _profile(Z, t, kappa):
    """Vectorized profile evaluation; arguments assumed valid and broadcastable."""
    Z, t, kappa = np.broadcast_arrays(np.asarray(Z, float), np.asarray(t, float),
                                      np.asarray(kappa, float))
    absZ = np.abs(Z)
    st = np.sqrt(t)
    arg = absZ / (2.0 * st)
    gauss = np.exp(-arg ** 2)
    x = kappa * st
    small = x < _KZ_SWITCH
    out = np.sqrt(4.0 * t / math.pi) * gauss - absZ * erfc(arg)
    if np.any(~small):
        ksafe = np.where(small, 1.0, kappa)
        big = (erfc(arg) - erfcx(x + arg) * gauss) / ksafe
        out = np.where(small, out, big)
    return out


def profile_H(q: ProfileQuery) -> float:
    """Diffusion profile H(Z,t;kappa), continuous in kappa through zero."""
    return float(_profile(q.Z, q.t, q.kappa))


def _check_time_kappa(t, kappa):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be > 0")
    if np.any(np.asarray(kappa) < 0):
        raise ValueError("kappa must be >= 0")


def boundary_H(t, kappa):
    """Boundary trace H(0,t;kappa); scalars or arrays."""
    _check_time_kappa(t, kappa)
    t = np.asarray(t, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    x = kappa * np.sqrt(t)
    small = x < _KZ_SWITCH
    out = np.sqrt(4.0 * t / math.pi) * np.ones_like(x)
    if np.any(~small):
        ksafe = np.where(small, 1.0, kappa)
        out = np.where(small, out, (1.0 - erfcx(x)) / ksafe)
    return float(out) if out.ndim == 0 else out


def boundary_dH_dt(t, kappa):
    """Time derivative of the boundary trace: 1/sqrt(pi t) - kappa erfcx(kappa sqrt(t)).

    For kappa sqrt(t) >= 5000 the two terms agree to ~8 digits and the
    subtraction is replaced by its asymptotic series, which is accurate to
    machine precision there.
    """
    _check_time_kappa(t, kappa)
    t = np.asarray(t, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    x = kappa * np.sqrt(t)
    base = 1.0 / np.sqrt(math.pi * t)
    deep = x >= _SERIES_SWITCH
    xsafe = np.where(deep, x, 1.0)
    out = base - kappa * erfcx(np.where(deep, 0.0, x))
    if np.any(deep):
        ix2 = 1.0 / xsafe ** 2
        series = base * 0.5 * ix2 * (1.0 - 1.5 * ix2 + 3.75 * ix2 ** 2)
        out = np.where(deep, series, out)
    return float(out) if out.ndim == 0 else out


def early_time_H_l(p: TargetParams, l: int, t) -> float:
    """Early-time approximation to the sphere relaxation function.

    H_l(0) minus the boundary-layer drawdown of the (l, m) surface mode:
    H_l(0) - boundary_H(t, kappa_l) / (2 sqrt(tau_c)), kappa_l = l / sqrt(tau_mag).
    Accepts scalar or array t in seconds.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    d = derive_timescales(p)
    kappa_l = l / math.sqrt(d.tau_mag)
    return H_l_zero(l, p.mu_ratio) - boundary_H(t, kappa_l) / (2.0 * math.sqrt(d.tau_c))


def asymptote_early_H_l(p: TargetParams, l: int, t):
    """Early-early asymptote: universal sqrt(t) drawdown, H_l(0) - sqrt(t/(pi tau_c))."""
    d = derive_timescales(p)
    return H_l_zero(l, p.mu_ratio) - np.sqrt(np.asarray(t, float) / (math.pi * d.tau_c))


def asymptote_late_H_l(p: TargetParams, l: int, t):
    """Late-early asymptote: saturated mode with its t^{-1/2} approach."""
    d = derive_timescales(p)
    kappa_l = l / math.sqrt(d.tau_mag)
    t = np.asarray(t, dtype=float)
    sat = (1.0 - 1.0 / np.sqrt(math.pi * kappa_l ** 2 * t)) / kappa_l
    return H_l_zero(l, p.mu_ratio) - sat / (2.0 * math.sqrt(d.tau_c))


@dataclass(frozen=True)
class ModeAmplitudes:
    """Per-mode screening-current amplitudes.

    Alpha modes (ids "a1", "a2", ...) carry amplitudes K1 paired with their
    eigenvalues kappa; beta modes (ids "b1", ...) carry amplitudes K2 and
    relax with the kappa = 0 profile. recon_residual, when set, is the
    relative misfit of reconstructing the source field from these
    amplitudes.
    """

    mode_ids: tuple
    K1: np.ndarray
    kappa: np.ndarray
    K2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    recon_residual: float | None = None

    def __post_init__(self):
        if len(self.K1) != len(self.kappa):
            raise ValueError("K1 and kappa must have equal length")
        if len(self.mode_ids) != len(self.K1) + len(self.K2):
            raise ValueError("mode_ids must cover all alpha and beta modes")
        if np.any(np.asarray(self.kappa) < 0):
            raise ValueError("kappa entries must be >= 0")

    @classmethod
    def from_parts(cls, K1, kappa, K2=(), recon_residual=None):
        K1 = np.asarray(K1, dtype=float)
        K2 = np.asarray(K2, dtype=float)
        ids = tuple(f"a{i + 1}" for i in range(len(K1)))
        ids += tuple(f"b{i + 1}" for i in range(len(K2)))
        return cls(mode_ids=ids, K1=K1, kappa=np.asarray(kappa, dtype=float),
                   K2=K2, recon_residual=recon_residual)

    def _locate(self, n):
        try:
            pos = self.mode_ids.index(n)
        except ValueError:
            raise KeyError(f"unknown mode id {n!r}") from None
        if pos < len(self.K1):
            return 1, pos
        return 2, pos - len(self.K1)


def mode_profile_A(amp: ModeAmplitudes, n, Z, t) -> float:
    """Interior vector-potential profile of one mode: -K * H(Z,t;kappa_or_zero)."""
    family, j = amp._locate(n)
    if family == 1:
        K, kap = amp.K1[j], amp.kappa[j]
    else:
        K, kap = amp.K2[j], 0.0
    return -float(K) * profile_H(ProfileQuery(Z=Z, t=t, kappa=float(kap)))


@dataclass(frozen=True)
class DecayCurve:
    """Sampled time series tagged with the model that produced it."""

    times: np.ndarray
    values: np.ndarray
    model_tag: str

    _TAGS = ("exact", "early", "asymptote-early", "asymptote-late")

    def __post_init__(self):
        t = np.asarray(self.times)
        if len(t) != len(self.values):
            raise ValueError("times and values must have equal length")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("times must be positive and strictly increasing")
        if self.model_tag not in self._TAGS:
            raise ValueError(f"model_tag must be one of {self._TAGS}, got {self.model_tag!r}")


def synthesize_response(amp: ModeAmplitudes, couplings, times) -> DecayCurve:
    """Receiver voltage from alpha modes: V(t) = sum_n c_n K1_n dH/dt(t; kappa_n).

    Beta modes produce no external field and are excluded. Couplings are
    opaque receiver coefficients aligned with the alpha modes; summation
    order is fixed by mode order for reproducibility.
    """
    c = np.asarray(couplings, dtype=float)
    if len(c) != len(amp.K1):
        raise ValueError(f"couplings length {len(c)} does not match "
                         f"{len(amp.K1)} alpha modes")
    times = np.asarray(times, dtype=float)
    V = np.zeros_like(times)
    for n in range(len(c)):
        V += c[n] * amp.K1[n] * boundary_dH_dt(times, amp.kappa[n])
    return DecayCurve(times=times, values=V, model_tag="early")


def pde_residual(q: ProfileQuery, h: float = 1e-4) -> float:
    """Relative finite-difference residual of (d/dt - d^2/dZ^2) on the profile.

    Central differences with steps h*t in time and h*sqrt(4t) in depth,
    normalized by the time-derivative magnitude. Diagnostic only; the
    query point must sit far enough inside that Z + h*sqrt(4t) <= 0.
    """
    h_t = h * q.t
    h_z = h * math.sqrt(4.0 * q.t)
    if q.Z + h_z > 0:
        raise ValueError("query point too close to the boundary for the requested step")
    k = q.kappa
    dt = (_profile(q.Z, q.t + h_t, k) - _profile(q.Z, q.t - h_t, k)) / (2.0 * h_t)
    dzz = (_profile(q.Z + h_z, q.t, k) - 2.0 * _profile(q.Z, q.t, k)
           + _profile(q.Z - h_z, q.t, k)) / h_z ** 2
    return float((dt - dzz) / max(abs(dt), 1e-300))


def boundary_flux_residual(t: float, kappa: float, h: float = 3e-4) -> float:
    """Deviation of the one-sided flux (d/dZ + kappa) H at Z = 0- from 1.

    Second-order one-sided difference from the interior side; diagnostic
    companion to pde_residual.
    """
    _check_time_kappa(t, kappa)
    d = h * math.sqrt(4.0 * t)
    h0 = _profile(0.0, t, kappa)
    dz = (3.0 * h0 - 4.0 * _profile(-d, t, kappa) + _profile(-2.0 * d, t, kappa)) / (2.0 * d)
    return float(dz + kappa * h0 - 1.0)
