"""Interworld coupling for ordered ensembles of one dimensional worlds.

The coupling depends on positions only through the inverse gaps
g_n = 1/(x_{n+1} - x_n).  With b = hbar^2 / (8 m) the potential is

    U(x) = b * sum_n (g_n - g_{n-1})^2,

where g vanishes outside the interior (the outermost worlds see empty
space on one side).  The gradient has a closed form, the "nonclassical"
momentum p_n = (hbar/2)(g_n - g_{n-1}) satisfies U = sum p_n^2 / (2 m)
identically, and two sharp inequalities follow: a zero point bound on U
in terms of the ensemble spread, and an uncertainty style product bound.
All functions take a strictly increasing position array.
"""

import numpy as np

__all__ = [
    "interworld_potential",
    "interworld_force",
    "nonclassical_momentum",
    "zero_point_energy_bound",
    "uncertainty_product",
    "uncertainty_floor",
]


def _padded_inverse_gaps(positions):
    # g array padded with two zeros on each side so the second difference
    # stencil below never branches at the ends
    x = np.asarray(positions, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two worlds")
    gaps = np.diff(x)
    if np.any(gaps <= 0.0):
        raise ValueError("positions must be strictly increasing")
    g = np.zeros(n + 4)
    g[3 : n + 2] = 1.0 / gaps
    return g, n


def interworld_potential(positions, mass=1.0, hbar=1.0):
    """Total interworld potential energy of an ordered configuration."""
    g, n = _padded_inverse_gaps(positions)
    d = g[3 : n + 3] - g[2 : n + 2]
    return hbar * hbar / (8.0 * mass) * float(np.dot(d, d))


def interworld_force(positions, mass=1.0, hbar=1.0):
    """Exact gradient force -dU/dx_n, one entry per world.

    The force telescopes: its sum is zero to machine precision, so the
    ensemble centroid never feels the coupling.
    """
    g, n = _padded_inverse_gaps(positions)
    # sig[i] is the flux g_i^2 (g_{i+1} - 2 g_i + g_{i-1}); the force on
    # world n is b times the flux difference across it, b = hbar^2/(4m)
    sig = g[2 : n + 3] ** 2 * (g[3 : n + 4] - 2.0 * g[2 : n + 3] + g[1 : n + 2])
    return hbar * hbar / (4.0 * mass) * (sig[1:] - sig[:-1])


def nonclassical_momentum(positions, hbar=1.0):
    """Per world momentum scale carried by the coupling.

    Sums to zero exactly, and sum p^2/(2m) reproduces the potential.
    """
    g, n = _padded_inverse_gaps(positions)
    return 0.5 * hbar * (g[3 : n + 3] - g[2 : n + 2])


def zero_point_energy_bound(positions, mass=1.0, hbar=1.0):
    """Lower bound on U implied by the ensemble spread.

    U >= hbar^2 (N-1)^2 / (8 m N V) with V the (1/N convention) position
    variance.  Saturated by the harmonic ground configuration.
    """
    x = np.asarray(positions, dtype=float)
    n = x.size
    variance = float(np.var(x))
    if variance == 0.0:
        raise ValueError("ensemble spread is zero")
    return hbar * hbar * (n - 1) ** 2 / (8.0 * mass * n * variance)


def uncertainty_product(positions, hbar=1.0):
    """Spread product sqrt(V) * rms nonclassical momentum.

    Bounded below by ``uncertainty_floor``; equality at the harmonic
    ground configuration.
    """
    x = np.asarray(positions, dtype=float)
    p = nonclassical_momentum(x, hbar=hbar)
    dx = float(np.std(x))
    dp = float(np.sqrt(np.mean(p * p)))  # p sums to zero identically
    return dx * dp


def uncertainty_floor(n_worlds, hbar=1.0):
    """The sharp lower bound (1 - 1/N) hbar / 2 on the spread product."""
    return (1.0 - 1.0 / n_worlds) * hbar / 2.0
