"""Figure rendering for run outputs.

Every CLI report writes PNG figures next to its delimited data files: heat
maps of the propagator weight matrix, sup-M decay profiles, and the
disorder-averaged correlator / entropy curves.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

plt.rcParams.update(
    {
        "figure.figsize": (5.0, 3.6),
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "savefig.dpi": 150,
        "savefig.bbox": "tight",
    }
)


def save_heatmap(path, matrix: np.ndarray, title: str) -> None:
    """Log-scale heat map of a propagator weight matrix M(t)."""
    fig, ax = plt.subplots()
    clipped = np.maximum(matrix, 1e-12)
    image = ax.imshow(clipped, norm=LogNorm(vmin=1e-9, vmax=2.0), origin="lower", cmap="magma")
    ax.set_xlabel("site j")
    ax.set_ylabel("site l")
    ax.set_title(title)
    ax.grid(False)
    fig.colorbar(image, ax=ax, label="M(t)")
    fig.savefig(path)
    plt.close(fig)


def save_lightcone_profiles(path, summaries) -> None:
    """Semilog decay of the disorder-averaged sup-M versus ring distance."""
    fig, ax = plt.subplots()
    for summary in summaries:
        d = summary.distances[1:]
        mean = summary.mean_sup[1:]
        err = summary.stderr_sup[1:]
        ax.errorbar(d, mean, yerr=err, fmt=".", ms=3, label=f"eps={summary.epsilon:g}")
        fit = summary.fit
        if not fit.no_decay:
            ax.plot(d, fit.prefactor * np.exp(-fit.mu * d**fit.zeta), "--", lw=1)
    ax.set_yscale("log")
    ax.set_xlabel("ring distance |l - j|")
    ax.set_ylabel("sup over t of M")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)


def save_series(path, rows, ylabel: str, logy: bool = False) -> None:
    """Errorbar curves of disorder-averaged values from CSV-shaped rows.

    Picks the x axis automatically: region width D when several widths are
    present, else time, else disorder strength.
    """
    rows = list(rows)
    if not rows:
        return
    widths = sorted({r["D"] for r in rows})
    times = sorted({r["t"] for r in rows})
    if len(widths) > 1:
        x_key, group_keys = "D", ("epsilon", "t")
    elif len(times) > 1:
        x_key, group_keys = "t", ("epsilon", "D")
    else:
        x_key, group_keys = "epsilon", ("t", "D")
    fig, ax = plt.subplots()
    groups = sorted({tuple(r[k] for k in group_keys) for r in rows})
    for group in groups:
        sub = [r for r in rows if tuple(r[k] for k in group_keys) == group]
        sub.sort(key=lambda r: r[x_key])
        x = [r[x_key] for r in sub]
        y = [r["mean"] for r in sub]
        err = [r["stderr"] if r["stderr"] is not None else 0.0 for r in sub]
        label = ", ".join(f"{k}={v:g}" for k, v in zip(group_keys, group))
        ax.errorbar(x, y, yerr=err, marker="o", ms=3, lw=1, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x_key)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=7)
    fig.savefig(path)
    plt.close(fig)
