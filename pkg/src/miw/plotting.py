"""Figure rendering for the CLI report path.

Uses the Agg backend only and pins everything that could vary between
reruns (size, dpi, PNG metadata), because output files are promised to
be byte identical for identical runs.
"""

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_worldlines",
    "save_energy",
    "save_density_overlay",
    "save_relaxation",
    "save_comparison",
]

_FIGSIZE = (7.0, 4.4)
_DPI = 110
_META = {"Software": "miw"}


def _new_axes(xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return fig, ax


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def save_worldlines(path, times, positions, title="world trajectories", barrier_width=None):
    """Fan of x_n(t) curves; optionally shade a barrier region at the origin."""
    fig, ax = _new_axes("t", "x", title)
    if barrier_width is not None:
        ax.axhspan(-barrier_width, barrier_width, color="0.85", zorder=0)
    for n in range(positions.shape[1]):
        ax.plot(times, positions[:, n], lw=0.8, color="tab:blue", alpha=0.7)
    return _finish(fig, path)


def save_energy(path, times, kinetic, classical, interworld, title="energy budget"):
    fig, ax = _new_axes("t", "energy", title)
    total = np.asarray(kinetic) + np.asarray(classical) + np.asarray(interworld)
    ax.plot(times, kinetic, label="kinetic")
    ax.plot(times, classical, label="external")
    ax.plot(times, interworld, label="interworld")
    ax.plot(times, total, label="total", color="black", lw=1.4)
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_density_overlay(path, positions, grid_x=None, grid_density=None,
                         title="empirical density"):
    """Step density of an ordered configuration, optionally over an exact one."""
    from .analysis import step_density

    fig, ax = _new_axes("x", "density", title)
    edges, heights = step_density(positions)
    ax.stairs(heights, edges, fill=True, alpha=0.45, color="tab:blue",
              label="worlds")
    if grid_x is not None and grid_density is not None:
        ax.plot(grid_x, grid_density, color="tab:red", lw=1.2, label="reference")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_relaxation(path, energy_history, target=None, title="relaxation"):
    fig, ax = _new_axes("iteration", "energy error", title)
    e = np.asarray(energy_history, dtype=float)
    ref = target if target is not None else e[-1]
    err = np.abs(e - ref)
    err = np.where(err > 0.0, err, np.nan)  # log scale, drop exact zeros
    ax.semilogy(np.arange(e.size), err)
    return _finish(fig, path)


def save_comparison(path, times, per_world_max, mean_abs, wasserstein,
                    title="deviation from guided reference"):
    fig, ax = _new_axes("t", "deviation", title)
    ax.plot(times, per_world_max, label="max over worlds")
    ax.plot(times, mean_abs, label="mean over worlds")
    ax.plot(times, wasserstein, label="density transport distance")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)
