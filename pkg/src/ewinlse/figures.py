"""Matplotlib rendering of report figures (log-log error plots, densities).

Figures accompany the delimited output; the CSV/JSON files remain the
canonical record and rendering can be disabled entirely (CLI ``--no-figures``).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_convergence_figure",
    "save_strichartz_figure",
    "save_density_figure",
]

_NORM_LABELS = {"l2": r"$L^2$", "h1": r"$H^1$"}
_MARKERS = ("o", "s", "^", "d")


def save_convergence_figure(report, path: Path) -> Path:
    """Log-log error-vs-step plot with first- and half-order guide lines."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    taus = None
    for i, kind in enumerate(report.norms):
        taus, errs = report.errors_for(kind)
        if len(taus) == 0:
            continue
        label = _NORM_LABELS.get(kind, kind)
        fit = report.fits[kind]
        if not fit.degenerate:
            label += f" (order {fit.slope:.2f})"
        ax.loglog(taus, errs, marker=_MARKERS[i % len(_MARKERS)], label=label)
    if taus is not None and len(taus) >= 2:
        t = np.array([taus.max(), taus.min()])
        _, e0 = report.errors_for(report.norms[0])
        if len(e0):
            anchor = e0[0]
            ax.loglog(t, anchor * (t / t[0]), "k--", lw=0.8, label=r"$O(\tau)$")
            ax.loglog(t, anchor * np.sqrt(t / t[0]), "k:", lw=0.8,
                      label=r"$O(\tau^{1/2})$")
    ax.set_xlabel(r"time step $\tau$")
    ax.set_ylabel("error at final time")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_strichartz_figure(reports, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    for i, rep in enumerate(reports):
        taus = [t for t, _ in rep.rows]
        ax.semilogx(taus, rep.ratios, marker=_MARKERS[i % len(_MARKERS)],
                    label=f"(q, r) = ({rep.pair[0]}, {rep.pair[1]})")
    ax.set_xlabel(r"time step $\tau$")
    ax.set_ylabel("space-time norm ratio")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_density_figure(field, t: float, path: Path, centers=None) -> Path:
    """Density heat map (2D) or profile (1D) of a field snapshot."""
    grid = field.grid
    rho = np.abs(field.values) ** 2
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    if grid.d == 1:
        ax.plot(grid.axis_nodes[0], rho)
        ax.set_xlabel("x")
        ax.set_ylabel(r"$|\psi|^2$")
    elif grid.d == 2:
        (a0, b0), (a1, b1) = grid.bounds
        im = ax.imshow(rho.T, origin="lower", extent=(a0, b0, a1, b1),
                       cmap="viridis", aspect="equal")
        fig.colorbar(im, ax=ax, shrink=0.85)
        if centers is not None:
            pts = np.asarray(centers)
            ax.plot(pts[:, 0], pts[:, 1], "r+", ms=8, mew=1.5)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    else:
        mid = grid.n[2] // 2
        (a0, b0), (a1, b1) = grid.bounds[0], grid.bounds[1]
        im = ax.imshow(rho[:, :, mid].T, origin="lower",
                       extent=(a0, b0, a1, b1), cmap="viridis", aspect="equal")
        fig.colorbar(im, ax=ax, shrink=0.85)
        ax.set_xlabel("x")
        ax.set_ylabel("y (mid-z slice)")
    ax.set_title(f"t = {t:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
