"""PNG figures for crossover sweeps, energy traces and timing grids."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_crossover(rows, path, title: str | None = None) -> None:
    """Mean generation time (log scale) and success counts against fraction."""
    f = [r.f for r in rows]
    fig, (ax_t, ax_s) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax_t.semilogy(f, [r.rsa_mean for r in rows], "o-", label="RSA")
    ax_t.semilogy(f, [r.md_mean for r in rows], "s-", label="MD")
    ax_t.set_ylabel("mean time of successful runs [s]")
    ax_t.legend()
    ax_s.plot(f, [r.rsa_success for r in rows], "o-", label="RSA")
    ax_s.plot(f, [r.md_success for r in rows], "s-", label="MD")
    ax_s.set_xlabel("volume fraction")
    ax_s.set_ylabel("successful runs")
    if rows:
        ax_s.set_ylim(-0.5, rows[0].runs + 0.5)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_energy_trace(trace, path, overlap=None) -> None:
    """Potential and kinetic energy per step; ``overlap`` is an optional
    ``(steps, volumes)`` pair drawn on a second axis."""
    t = np.asarray(trace, dtype=float).reshape(-1, 4)
    fig, ax = plt.subplots(figsize=(6, 4))
    pos = t[:, 1] > 0
    ax.semilogy(t[pos, 0], t[pos, 1], label="potential energy")
    kin = t[:, 2] > 0
    ax.semilogy(t[kin, 0], t[kin, 2], label="kinetic energy", alpha=0.7)
    ax.set_xlabel("step")
    ax.set_ylabel("energy")
    if overlap is not None:
        steps, vol = overlap
        ax2 = ax.twinx()
        ax2.plot(steps, vol, "k.", ms=3, label="overlap volume")
        ax2.set_ylabel("overlap volume")
        ax2.legend(loc="upper center")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_time_grid(result, path) -> None:
    """Heat map of mean time per (f_s, f_c) cell; blank where no run succeeded."""
    fs = sorted({c.f_s for c in result.cells})
    fc = sorted({c.f_c for c in result.cells})
    grid = np.full((len(fs), len(fc)), np.nan)
    for c in result.cells:
        m = c.mean_time
        if not math.isnan(m):
            grid[fs.index(c.f_s), fc.index(c.f_c)] = m
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(np.log10(grid), origin="lower", cmap="viridis")
    ax.set_xticks(range(len(fc)), [f"{v:g}" for v in fc], rotation=90)
    ax.set_yticks(range(len(fs)), [f"{v:g}" for v in fs])
    ax.set_xlabel("cylinder fraction")
    ax.set_ylabel("sphere fraction")
    fig.colorbar(im, label="log10 mean time [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
