"""Command-line front end.

Verbs: spectrum | decay | fit | fig3 | modes. Configuration comes from
built-in defaults, overridden by a flat key=value config file (--config),
overridden in turn by CLI flags. Every command writes CSV with one header
row, comma delimiter and 17-significant-digit scientific notation, so
identical configurations produce byte-identical output. Unless --no-plot
is given, a PNG rendering of each table is written next to it.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import plots
from .earlytime import (DecayCurve, asymptote_early_H_l, asymptote_late_H_l,
                        early_time_H_l)
from .errors import ConfigError, NumericError
from .fitting import fit_windows
from .mesh import load_off, make_icosphere
from .params import TargetParams, derive_timescales
from .sphere import find_roots
from .surface import (analytic_sphere_kappa, solve_scalar_modes,
                      sphere_radius_if_sphere)

_DEFAULTS = {
    "mu_c": 100.0, "mu_b": 1.0, "sigma_c": 1.0e7, "L_c": 0.05,
    "mu_ratio": None,
    "tmin": 1.0e-6, "tmax": 1.0, "points": 200, "spacing": "log",
    "l_max": 5, "mesh_level": 3, "modes": 10, "out": ".",
}

_INT_KEYS = {"points", "l_max", "mesh_level", "modes"}
_FLOAT_KEYS = {"mu_c", "mu_b", "sigma_c", "L_c", "mu_ratio", "tmin", "tmax"}
_STR_KEYS = {"spacing", "out"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration shared by all commands."""

    mu_c: float
    mu_b: float
    sigma_c: float
    L_c: float
    tmin: float
    tmax: float
    points: int
    spacing: str
    l_max: int
    mesh_level: int
    modes: int
    out: str
    no_plot: bool = False

    def validate(self):
        checks = [
            ("tmin", self.tmin > 0, "must be > 0"),
            ("tmax", self.tmax > self.tmin, "must be > tmin"),
            ("points", self.points >= 2, "must be >= 2"),
            ("spacing", self.spacing in ("log", "linear"), "must be 'log' or 'linear'"),
            ("l_max", self.l_max >= 1, "must be >= 1"),
            ("mesh_level", self.mesh_level >= 0, "must be >= 0"),
            ("modes", self.modes >= 1, "must be >= 1"),
            ("mu_c", self.mu_c > 0, "must be > 0"),
            ("mu_b", self.mu_b > 0, "must be > 0"),
            ("sigma_c", self.sigma_c > 0, "must be > 0"),
            ("L_c", self.L_c > 0, "must be > 0"),
        ]
        for field, ok, msg in checks:
            if not ok:
                raise ConfigError(field, f"{msg} (got {getattr(self, field)!r})")

    @property
    def target(self) -> TargetParams:
        return TargetParams(mu_c=self.mu_c, mu_b=self.mu_b,
                            sigma_c=self.sigma_c, L_c=self.L_c)

    def time_grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.tmin, self.tmax, self.points)
        return np.linspace(self.tmin, self.tmax, self.points)


def parse_config_file(path) -> dict:
    """Flat key=value file; '#' comments; unknown keys are rejected."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError("config", f"line {lineno}: expected key=value, got {raw.strip()!r}")
            key, val = (s.strip() for s in line.split('=', 1))
            if key not in _INT_KEYS | _FLOAT_KEYS | _STR_KEYS:
                raise ConfigError(key, f"unknown key (line {lineno})")
            try:
                if key in _INT_KEYS:
                    out[key] = int(val)
                elif key in _FLOAT_KEYS:
                    out[key] = float(val)
                else:
                    out[key] = val
            except ValueError:
                raise ConfigError(key, f"cannot parse {val!r} (line {lineno})") from None
    return out


def build_config(args) -> RunConfig:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(parse_config_file(args.config))
    for key in (_INT_KEYS | _FLOAT_KEYS | _STR_KEYS):
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    if merged.get("mu_ratio") is not None:
        merged["mu_c"] = merged["mu_ratio"] * merged["mu_b"]
    merged.pop("mu_ratio")
    cfg = RunConfig(no_plot=bool(getattr(args, "no_plot", False)), **merged)
    cfg.validate()
    return cfg


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.16e}"


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    print(f"wrote {path}")


def _outdir(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def cmd_spectrum(cfg: RunConfig, args=None):
    """Decay-rate roots with per-mode decay and crossover times."""
    p = cfg.target
    d = derive_timescales(p)
    rows = []
    for l in range(1, cfg.l_max + 1):
        spec = find_roots(l, p.mu_ratio, N=cfg.modes)
        kappa_l = l / math.sqrt(d.tau_mag)
        tau_cross = 1.0 / kappa_l ** 2
        for n, zeta in enumerate(spec.roots, start=1):
            rows.append((l, n, zeta, d.tau_c / zeta ** 2, kappa_l, tau_cross))
    out = _outdir(cfg)
    path = os.path.join(out, "spectrum.csv")
    _write_csv(path, "l,n,zeta,tau_decay,kappa,tau_cross", rows)
    if not cfg.no_plot:
        png = os.path.join(out, "spectrum.png")
        plots.render_spectrum(rows, png)
        print(f"wrote {png}")
    return rows


_EXACT_ROOTS = 500  # overtones kept in the reference series columns


def _decay_columns(p: TargetParams, tau, l_values, with_truncated=False):
    """Per-l relaxation curves: exact series, early-time, both asymptotes."""
    d = derive_timescales(p)
    t = tau * d.tau_c
    blocks = {}
    for l in l_values:
        spec = find_roots(l, p.mu_ratio, N=_EXACT_ROOTS)
        z2 = spec.roots ** 2
        exact = np.exp(-np.outer(tau, z2)) @ (spec.coefficients / z2)
        if np.any(exact <= 0) or np.any(np.diff(exact) >= 0):
            raise NumericError(f"exact relaxation curve for l={l} is not a positive "
                               "decreasing decay; series evaluation is suspect")
        cols = {
            "exact": exact,
            "early": early_time_H_l(p, l, t),
            "early_early": asymptote_early_H_l(p, l, t),
            "late_early": asymptote_late_H_l(p, l, t),
        }
        if with_truncated:
            cols["exact3"] = np.exp(-np.outer(tau, z2[:3])) @ (spec.coefficients[:3] / z2[:3])
        # route the curves through the tagged container so its invariants run
        DecayCurve(times=t, values=cols["exact"], model_tag="exact")
        DecayCurve(times=t, values=cols["early"], model_tag="early")
        DecayCurve(times=t, values=cols["early_early"], model_tag="asymptote-early")
        DecayCurve(times=t, values=cols["late_early"], model_tag="asymptote-late")
        blocks[l] = cols
    return blocks


def _decay_rows(tau, blocks, names):
    rows = []
    for i, tv in enumerate(tau):
        row = [tv]
        for l in sorted(blocks):
            for name in names:
                if name in blocks[l]:
                    row.append(blocks[l][name][i])
        rows.append(row)
    return rows


def cmd_decay(cfg: RunConfig, args=None):
    """Exact vs early-time relaxation curves over a dimensionless time grid."""
    p = cfg.target
    tau = cfg.time_grid()
    l_values = range(1, cfg.l_max + 1)
    blocks = _decay_columns(p, tau, l_values)
    names = ("exact", "early", "early_early", "late_early")
    header = "tau," + ",".join(f"{n}_l{l}" for l in sorted(blocks) for n in names)
    out = _outdir(cfg)
    path = os.path.join(out, "decay.csv")
    _write_csv(path, header, _decay_rows(tau, blocks, names))
    if not cfg.no_plot:
        png = os.path.join(out, "decay.png")
        plots.render_decay(tau, blocks, png, title=f"mu_c/mu_b = {p.mu_ratio:g}")
        print(f"wrote {png}")
    return blocks


def cmd_fig3(cfg: RunConfig, args):
    """Full comparison bundle for one permeability-ratio panel.

    Panels are mu_c/mu_b in {1, 5, 100}; the ratio-1 panel also includes
    the exact series truncated at 3 overtones.
    """
    panel = args.panel
    if panel not in (1, 5, 100):
        raise ConfigError("panel", f"must be one of 1, 5, 100 (got {panel!r})")
    p = TargetParams(mu_c=panel * cfg.mu_b, mu_b=cfg.mu_b,
                     sigma_c=cfg.sigma_c, L_c=cfg.L_c)
    tau = cfg.time_grid()
    blocks = _decay_columns(p, tau, range(1, cfg.l_max + 1),
                            with_truncated=(panel == 1))
    names = ("exact", "early", "early_early", "late_early")
    if panel == 1:
        names = names + ("exact3",)
    header = "tau," + ",".join(f"{n}_l{l}" for l in sorted(blocks) for n in names)
    out = _outdir(cfg)
    path = os.path.join(out, f"fig3_panel{panel}.csv")
    _write_csv(path, header, _decay_rows(tau, blocks, names))
    if not cfg.no_plot:
        png = os.path.join(out, f"fig3_panel{panel}.png")
        plots.render_decay(tau, blocks, png, title=f"mu_c/mu_b = {panel}")
        print(f"wrote {png}")
    return blocks


def _load_fit_csv(path):
    try:
        with open(path) as fh:
            header = fh.readline().strip()
    except FileNotFoundError:
        raise
    if header != "t,V":
        raise OSError(f"{path}: expected header 't,V', got {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise OSError(f"{path}: expected two columns, got {data.shape[1]}")
    t, V = data[:, 0], data[:, 1]
    if np.any(np.diff(t) <= 0):
        raise NumericError(f"{path}: t column must be strictly increasing")
    return t, V


def cmd_fit(cfg: RunConfig, args):
    """Power-law slope report for a measured or synthesized decay CSV."""
    windows = []
    for w in args.window or []:
        try:
            lo, hi = (float(s) for s in w.split(":"))
        except ValueError:
            raise ConfigError("window", f"expected LO:HI, got {w!r}") from None
        windows.append((lo, hi))
    if not windows:
        raise ConfigError("window", "at least one --window LO:HI is required")
    t, V = _load_fit_csv(args.csv)
    report = fit_windows(t, V, windows)
    out = _outdir(cfg)
    path = os.path.join(out, "fit_report.csv")
    cross = report.crossover_estimate
    rows = []
    for i in range(len(report.windows)):
        rows.append((report.windows[i][0], report.windows[i][1], report.slopes[i],
                     report.slope_stderrs[i], math.nan if cross is None else cross))
    _write_csv(path, "window_lo,window_hi,slope,slope_stderr,crossover_estimate", rows)
    for i, lab in enumerate(report.regime_labels):
        print(f"window {report.windows[i][0]:g}..{report.windows[i][1]:g}: "
              f"slope {report.slopes[i]:+.4f} +- {report.slope_stderrs[i]:.1e} [{lab}]")
    if cross is not None:
        print(f"crossover estimate: {cross:.6g} s")
    if not cfg.no_plot:
        png = os.path.join(out, "fit_report.png")
        plots.render_fit(t, V, report, png)
        print(f"wrote {png}")
    return report


def cmd_modes(cfg: RunConfig, args=None):
    """Discretized surface-mode spectrum with sphere reference errors."""
    p = cfg.target
    mesh_path = getattr(args, "mesh", None) if args is not None else None
    if mesh_path:
        try:
            mesh = load_off(mesh_path)
        except ValueError as e:
            raise OSError(str(e)) from None
    else:
        mesh = make_icosphere(cfg.L_c, cfg.mesh_level)
    basis = solve_scalar_modes(mesh, p, cfg.modes)
    if np.any(basis.kappa <= 0):
        raise NumericError("constant mode leaked into the reported spectrum")
    radius = sphere_radius_if_sphere(mesh)
    rows = []
    analytic_col = []
    for i, (k, mult) in enumerate(zip(basis.kappa, basis.multiplets), start=1):
        if radius is not None:
            ka = analytic_sphere_kappa(p, int(mult) + 1, radius)
            err = abs(k - ka) / ka
        else:
            ka, err = math.nan, math.nan
        analytic_col.append(ka)
        rows.append((i, k, int(mult), ka, err))
    out = _outdir(cfg)
    path = os.path.join(out, "modes.csv")
    _write_csv(path, "n,kappa,multiplet,kappa_analytic,rel_err", rows)
    if not cfg.no_plot:
        png = os.path.join(out, "modes.png")
        plots.render_modes(basis.kappa, basis.multiplets,
                           analytic_col if radius is not None else None, png)
        print(f"wrote {png}")
    return rows


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="emdecay",
        description="Early-time electromagnetic decay: sphere spectra, "
                    "boundary-layer curves, surface modes, slope fits.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--out", help="output directory (default: current)")
        sp.add_argument("--tmin", type=float, help="grid start (tau for decay/fig3)")
        sp.add_argument("--tmax", type=float, help="grid end")
        sp.add_argument("--points", type=int, help="grid size")
        sp.add_argument("--mu-ratio", dest="mu_ratio", type=float,
                        help="permeability contrast mu_c/mu_b (sets mu_c)")
        sp.add_argument("--l-max", dest="l_max", type=int, help="largest multipole order")
        sp.add_argument("--mesh-level", dest="mesh_level", type=int,
                        help="icosphere subdivision level")
        sp.add_argument("--modes", type=int, help="root / eigenmode count")
        sp.add_argument("--no-plot", action="store_true", help="skip PNG rendering")

    sp = sub.add_parser("spectrum", help="decay-rate root table")
    common(sp)
    sp.set_defaults(handler=cmd_spectrum)

    sp = sub.add_parser("decay", help="exact vs early-time relaxation curves")
    common(sp)
    sp.set_defaults(handler=cmd_decay)

    sp = sub.add_parser("fit", help="log-log slope fit of a t,V CSV")
    sp.add_argument("csv", help="input CSV with header 't,V'")
    sp.add_argument("--window", action="append", metavar="LO:HI",
                    help="fit window in seconds; repeat for a crossover estimate")
    common(sp)
    sp.set_defaults(handler=cmd_fit)

    sp = sub.add_parser("fig3", help="one comparison panel (mu ratio 1, 5 or 100)")
    sp.add_argument("--panel", type=int, required=True, choices=(1, 5, 100))
    common(sp)
    sp.set_defaults(handler=cmd_fig3)

    sp = sub.add_parser("modes", help="discretized surface-mode spectrum")
    sp.add_argument("--mesh", help="OFF mesh file (default: built-in icosphere)")
    common(sp)
    sp.set_defaults(handler=cmd_modes)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = build_config(args)
        args.handler(cfg, args)
        return 0
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
