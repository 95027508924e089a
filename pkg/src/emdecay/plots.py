"""Figure rendering for the CLI: PNG files written next to the CSV output."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_spectrum(rows, path):
    """Decay time per overtone, one trace per multipole order."""
    fig, ax = plt.subplots(figsize=(6, 4))
    by_l = {}
    for (l, n, zeta, tau_decay, kappa, tau_cross) in rows:
        by_l.setdefault(l, []).append((n, tau_decay))
    for l, pts in sorted(by_l.items()):
        ns, taus = zip(*pts)
        ax.semilogy(ns, taus, "o-", ms=3, label=f"l={l}")
    ax.set_xlabel("overtone n")
    ax.set_ylabel("decay time [s]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_decay(tau, blocks, path, title=None):
    """Relaxation curves: exact vs early-time and its asymptotes, per l."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    colors = plt.cm.viridis([i / max(len(blocks) - 1, 1) for i in range(len(blocks))])
    for color, (l, cols) in zip(colors, sorted(blocks.items())):
        ax.loglog(tau, cols["exact"], "-", color=color, label=f"exact l={l}")
        ax.loglog(tau, cols["early"], "--", color=color, lw=1)
        if "exact3" in cols:
            ax.loglog(tau, cols["exact3"], ":", color=color, lw=1)
    ax.set_xlabel("t / tau_c")
    ax.set_ylabel("H_l")
    ax.set_ylim(bottom=1e-7)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_fit(t, V, report, path):
    """Data with fitted power-law asymptotes and crossover marker."""
    import numpy as np

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(t, V, ".", ms=3, color="0.4", label="data")
    for (w, s, b, lab) in zip(report.windows, report.slopes,
                              report.intercepts, report.regime_labels):
        tt = np.geomspace(w[0], w[1], 50)
        ax.loglog(tt, np.exp(b) * tt ** s, lw=2,
                  label=f"slope {s:.3f} ({lab})")
    if report.crossover_estimate is not None:
        ax.axvline(report.crossover_estimate, color="r", ls=":", lw=1,
                   label="crossover")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("V")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_modes(kappa, multiplets, analytic, path):
    """Computed surface-mode eigenvalues against analytic sphere values."""
    fig, ax = plt.subplots(figsize=(6, 4))
    idx = range(1, len(kappa) + 1)
    ax.plot(idx, kappa, "o", label="computed")
    if analytic is not None:
        ax.plot(idx, analytic, "_", ms=14, color="r", label="analytic sphere")
    for i, m in enumerate(multiplets):
        ax.annotate(str(m), (i + 1, kappa[i]), textcoords="offset points",
                    xytext=(0, 6), fontsize=7, ha="center")
    ax.set_xlabel("mode index")
    ax.set_ylabel("kappa [s$^{-1/2}$]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
