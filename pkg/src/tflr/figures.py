"""Figure rendering for the benchmark reports (written next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import ScalingFit


def speedup_figure(speedups: dict[int, float], path, title: str = "") -> None:
    """Speed-up factor against sample size, with the unity line marked in gold."""
    sizes = sorted(speedups)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(sizes, [speedups[n] for n in sizes], marker="o", color="tab:blue")
    ax.axhline(1.0, color="goldenrod", lw=1.5)
    ax.set_xlabel("sample size n")
    ax.set_ylabel("EM time / CIRLS time")
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def scaling_figure(times: dict[str, dict[int, float]],
                   fits: dict[str, ScalingFit | None], path,
                   title: str = "") -> None:
    """Mean running time per size on log-log axes, with fitted power laws."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    colors = {"em": "tab:red", "cirls": "tab:blue"}
    for solver, per_size in times.items():
        sizes = np.array(sorted(per_size))
        vals = np.array([per_size[n] for n in sizes])
        color = colors.get(solver)
        ax.loglog(sizes, vals, "o", color=color, label=solver)
        fit = fits.get(solver)
        if fit is not None:
            grid = np.geomspace(sizes.min(), sizes.max(), 50)
            ax.loglog(grid, np.exp(fit.alpha) * grid ** fit.beta, "-", color=color,
                      alpha=0.7,
                      label=f"{solver} fit: beta={fit.beta:.2f}, R2={fit.r_squared:.2f}")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("mean time per fit (s)")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
