"""Empirical densities, transport distances, fits, and comparison reports.

All functions work on plain arrays so they compose freely with both the
ensemble trajectories and the reference solver output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .interaction import (
    interworld_potential,
    uncertainty_floor,
    uncertainty_product,
    zero_point_energy_bound,
)

__all__ = [
    "step_density",
    "node_density",
    "quantile_positions",
    "wasserstein_sorted",
    "wasserstein_atoms_vs_density",
    "MaximaCount",
    "count_interference_maxima",
    "quadratic_fit",
    "spreading_coefficients",
    "ehrenfest_deviation",
    "BoundsReport",
    "bounds_report",
    "ComparisonReport",
    "compare_positions",
    "equivariance_profile",
]


# ---------------------------------------------------------------------------
# densities and quantiles


def _ordered(positions):
    x = np.asarray(positions, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ConfigError("positions must be one dimensional, length >= 2")
    if np.any(np.diff(x) <= 0.0):
        raise ConfigError("positions must be strictly increasing")
    return x


def step_density(positions):
    """Gap based empirical density.

    Each of the N-1 interior gaps carries probability 1/N, so the
    height over [x_i, x_{i+1}] is 1/(N (x_{i+1} - x_i)) and the total
    mass is (N-1)/N.  Returns (edges, heights) with len(heights) =
    len(edges) - 1.
    """
    x = _ordered(positions)
    return x.copy(), 1.0 / (x.size * np.diff(x))


def node_density(positions):
    """Linearly smoothed density: cumulative-fraction slope at each world.

    Interior worlds get the centered slope 2/(N (x_{n+1} - x_{n-1})),
    the edge worlds the one sided slope.  Pairs with ``positions`` as
    the nodes of a piecewise linear density.
    """
    x = _ordered(positions)
    n = x.size
    d = np.empty(n)
    d[1:-1] = 2.0 / (n * (x[2:] - x[:-2]))
    d[0] = 1.0 / (n * (x[1] - x[0]))
    d[-1] = 1.0 / (n * (x[-1] - x[-2]))
    return d


def quantile_positions(x, density, n):
    """Positions of the n midpoint quantiles (k - 1/2)/n of a grid density.

    The cumulative is trapezoidal and gets deduplicated before the
    inverse interpolation, so densities with flat zero stretches are
    fine (the left edge of a flat stretch wins).
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(density, dtype=float)
    if x.shape != d.shape or x.ndim != 1 or x.size < 2:
        raise ConfigError("x and density must be matching 1d arrays")
    if np.any(d < 0.0):
        raise ConfigError("density must be nonnegative")
    n = int(n)
    if n < 1:
        raise ConfigError("n must be positive")
    segments = 0.5 * (d[1:] + d[:-1]) * np.diff(x)
    cdf = np.concatenate(([0.0], np.cumsum(segments)))
    if cdf[-1] <= 0.0:
        raise ConfigError("density integrates to zero")
    cdf /= cdf[-1]
    keep = np.concatenate(([True], np.diff(cdf) > 0.0))
    u = (np.arange(1, n + 1) - 0.5) / n
    return np.interp(u, cdf[keep], x[keep])


# ---------------------------------------------------------------------------
# transport distances


def wasserstein_sorted(a, b):
    """W1 between two equal size uniform weight atom sets."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ConfigError("atom sets must have equal size")
    return float(np.mean(np.abs(a - b)))


def wasserstein_atoms_vs_density(atoms, x, density):
    """W1 between a uniform weight atom set and a grid density.

    Integral of |F_atoms - F_density| over the grid, trapezoid rule,
    with the grid cumulative normalized to one.
    """
    atoms = np.sort(np.asarray(atoms, dtype=float))
    x = np.asarray(x, dtype=float)
    d = np.asarray(density, dtype=float)
    emp = np.searchsorted(atoms, x, side="right") / atoms.size
    segments = 0.5 * (d[1:] + d[:-1]) * np.diff(x)
    cdf = np.concatenate(([0.0], np.cumsum(segments)))
    cdf /= cdf[-1]
    return float(np.trapezoid(np.abs(emp - cdf), x))


# ---------------------------------------------------------------------------
# interference counting


@dataclass(frozen=True)
class MaximaCount:
    """Raw and merged local maxima of a height sequence."""

    raw: int
    merged: int
    indices: tuple


def count_interference_maxima(values, merge_threshold=0.5, floor_rel=1.0e-6):
    """Count local maxima, then merge peaks not separated by deep valleys.

    A run of equal values is one candidate (its center index stands for
    it); ends count when the sequence falls away from them.  Two
    adjacent peaks stay distinct only if the valley between them drops
    below ``merge_threshold`` times the smaller peak, otherwise the
    taller one absorbs the other.  Values below ``floor_rel`` times the
    global maximum are treated as exactly zero first, so roundoff
    wiggles in far tails never register.  Returns a MaximaCount.
    """
    h = np.asarray(values, dtype=float)
    if h.ndim != 1 or h.size < 1:
        raise ConfigError("values must be a nonempty 1d array")
    top = h.max()
    if floor_rel > 0.0 and top > 0.0:
        h = np.where(h >= floor_rel * top, h, 0.0)

    peaks = []
    i = 0
    n = h.size
    while i < n:
        j = i
        while j + 1 < n and h[j + 1] == h[i]:
            j += 1
        left_ok = i == 0 or h[i - 1] < h[i]
        right_ok = j == n - 1 or h[j + 1] < h[i]
        if left_ok and right_ok and not (i == 0 and j == n - 1):
            peaks.append((i + j) // 2)
        i = j + 1

    merged = []
    for p in peaks:
        if not merged:
            merged.append(p)
            continue
        q = merged[-1]
        valley = float(h[q : p + 1].min())
        if valley >= merge_threshold * min(h[p], h[q]):
            if h[p] > h[q]:
                merged[-1] = p  # shallow valley: keep the taller peak
        else:
            merged.append(p)
    return MaximaCount(raw=len(peaks), merged=len(merged), indices=tuple(merged))


# ---------------------------------------------------------------------------
# fits and closed form checks


def quadratic_fit(times, values):
    """Least squares c0 + c1 t + c2 t^2; returns (c0, c1, c2)."""
    c = np.polynomial.polynomial.polyfit(
        np.asarray(times, dtype=float), np.asarray(values, dtype=float), 2
    )
    return float(c[0]), float(c[1]), float(c[2])


def spreading_coefficients(positions, momenta, mass=1.0, hbar=1.0):
    """Exact quadratic coefficients of the free flight ensemble variance.

    V(t) = c0 + c1 t + c2 t^2 with c0 the initial variance, c1 twice the
    position momentum covariance over m, and c2 = (2/m)(<E> - <p>^2/2m)
    where <E> is the conserved energy per world.  Exact because the
    coupling is homogeneous of degree -2, which closes the second moment
    hierarchy.
    """
    x = np.asarray(positions, dtype=float)
    p = np.asarray(momenta, dtype=float)
    n = x.size
    c0 = float(np.var(x))
    cov = float(np.mean(x * p) - np.mean(x) * np.mean(p))
    c1 = 2.0 * cov / mass
    kinetic = float(np.dot(p, p)) / (2.0 * mass)
    u = interworld_potential(x, mass=mass, hbar=hbar)
    e_per_world = (kinetic + u) / n
    p_bar = float(np.mean(p))
    c2 = (2.0 / mass) * (e_per_world - p_bar * p_bar / (2.0 * mass))
    return c0, c1, c2


def ehrenfest_deviation(times, centroids, x_bar0, p_bar0, mass=1.0, omega=1.0):
    """Largest gap between the ensemble centroid and the one body orbit.

    In a harmonic trap the centroid must follow
    x_bar0 cos(w t) + (p_bar0 / m w) sin(w t) exactly, because the
    coupling forces cancel in the ensemble sum.
    """
    t = np.asarray(times, dtype=float)
    analytic = x_bar0 * np.cos(omega * t) + p_bar0 / (mass * omega) * np.sin(
        omega * t
    )
    return float(np.max(np.abs(np.asarray(centroids, dtype=float) - analytic)))


# ---------------------------------------------------------------------------
# invariant sweeps and comparison reports


@dataclass
class BoundsReport:
    """Per frame check of the two sharp inequalities of the coupling.

    Margins are relative: (value - bound) / bound.  A frame violates
    when a margin falls below -1e-12 (pure roundoff slack; the
    inequalities are exact mathematics).
    """

    n_frames: int
    min_energy_margin: float
    min_product_margin: float
    violations: int

    def ok(self):
        return self.violations == 0


def bounds_report(positions_history, mass=1.0, hbar=1.0, slack=1.0e-12):
    frames = np.atleast_2d(np.asarray(positions_history, dtype=float))
    e_margins = np.empty(frames.shape[0])
    p_margins = np.empty(frames.shape[0])
    for i, x in enumerate(frames):
        u = interworld_potential(x, mass=mass, hbar=hbar)
        bound = zero_point_energy_bound(x, mass=mass, hbar=hbar)
        e_margins[i] = (u - bound) / bound
        prod = uncertainty_product(x, hbar=hbar)
        floor = uncertainty_floor(x.size, hbar=hbar)
        p_margins[i] = (prod - floor) / floor
    violations = int(np.sum(e_margins < -slack) + np.sum(p_margins < -slack))
    return BoundsReport(
        n_frames=frames.shape[0],
        min_energy_margin=float(e_margins.min()),
        min_product_margin=float(p_margins.min()),
        violations=violations,
    )


@dataclass
class ComparisonReport:
    """World trajectories versus guided reference samples, frame by frame."""

    times: np.ndarray
    per_world_max_deviation: np.ndarray
    mean_abs_deviation: np.ndarray
    wasserstein_density_distance: np.ndarray

    def as_dict(self):
        return {
            "times": self.times.tolist(),
            "per_world_max_deviation": self.per_world_max_deviation.tolist(),
            "mean_abs_deviation": self.mean_abs_deviation.tolist(),
            "wasserstein_density_distance": self.wasserstein_density_distance.tolist(),
        }


def compare_positions(times, world_positions, guided_positions, ref):
    """Build a ComparisonReport.

    ``world_positions`` and ``guided_positions`` are (frames, n) arrays
    on the same time grid; ``ref`` supplies the exact density for the
    transport distance column.
    """
    times = np.asarray(times, dtype=float)
    a = np.asarray(world_positions, dtype=float)
    b = np.asarray(guided_positions, dtype=float)
    if a.shape != b.shape or a.shape[0] != times.size:
        raise ConfigError("trajectory arrays must share one time grid")
    dev = np.abs(a - b)
    w1 = np.empty(times.size)
    for i in range(times.size):
        w1[i] = wasserstein_atoms_vs_density(a[i], ref.x, ref.density(i))
    return ComparisonReport(
        times=times,
        per_world_max_deviation=dev.max(axis=1),
        mean_abs_deviation=dev.mean(axis=1),
        wasserstein_density_distance=w1,
    )


def equivariance_profile(ref, sample_positions):
    """W1 between guided samples and the exact density, per frame,
    normalized by the current density width."""
    samples = np.asarray(sample_positions, dtype=float)
    if samples.shape[0] != ref.n_frames:
        raise ConfigError("sample history must match the reference frames")
    out = np.empty(ref.n_frames)
    for i in range(ref.n_frames):
        w1 = wasserstein_atoms_vs_density(samples[i], ref.x, ref.density(i))
        out[i] = w1 / ref.density_std(i)
    return out
