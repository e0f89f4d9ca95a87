"""Stationary configurations of the harmonic trap.

Two routes to the same configuration: an exact construction that solves
the stationarity conditions by recurrence plus bisection, and an
iterative relaxation that quenches the dynamics until the net force
vanishes.  The exact route is the oracle for the iterative one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ConfigError, CrossingError
from .interaction import interworld_force, interworld_potential

__all__ = [
    "harmonic_ground_positions",
    "ground_energy_per_world",
    "relaxation_seed",
    "relax_to_ground",
    "RelaxationResult",
]

def _half_config(xi1, half):
    # Builds the left half of the dimensionless configuration from its
    # outermost entry.  Each new gap is the negative reciprocal of the
    # running sum; a nonnegative running sum means xi1 was too shallow
    # and the recurrence has blown up.
    xi = np.empty(half)
    xi[0] = xi1
    s = xi1
    for k in range(1, half):
        if s >= 0.0:
            return None
        xi[k] = xi[k - 1] - 1.0 / s
        s += xi[k]
    if s >= 0.0:
        # the last entry overshot the origin; the sum is never used as a
        # divisor at this point, so catch the blowup explicitly
        return None
    return xi


def _objective(xi1, n_worlds):
    # Half-sum condition: the left half must carry (N-1)/2 of the total
    # squared spread.  Blown-up recurrences sort below the root.
    xi = _half_config(xi1, n_worlds // 2)
    if xi is None:
        return -np.inf
    return float(np.dot(xi, xi)) - (n_worlds - 1) / 2.0


def _dimensionless_ground(n_worlds):
    n = int(n_worlds)
    if n < 2:
        raise ConfigError("need at least two worlds")
    a = -np.sqrt(n - 1.0)
    b = -np.sqrt((n - 1.0) / n)
    fa = _objective(a, n)
    fb = _objective(b, n)
    eps = np.finfo(float).eps
    if abs(fb) <= 64.0 * eps * n:
        root = b  # root sits exactly on the narrow bracket edge (N = 2)
    else:
        if not (fa > 0.0 > fb):
            raise ConfigError(f"bisection bracket failed for N = {n}")
        lo, hi = a, b
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = _objective(mid, n)
            if fm == 0.0:
                lo = hi = mid
                break
            if fm > 0.0:
                lo = mid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
    half = _half_config(root, n // 2)
    while half is None:
        # step off a blown-up endpoint by one ulp toward the wide side
        root = np.nextafter(root, a)
        half = _half_config(root, n // 2)
    if n % 2:
        return np.concatenate((half, [0.0], -half[::-1]))
    return np.concatenate((half, -half[::-1]))


def harmonic_ground_positions(n_worlds, mass=1.0, omega=1.0, hbar=1.0):
    """Exact stationary positions in a harmonic trap.

    Parameters
    ----------
    n_worlds : int
        Number of worlds, at least two.
    mass, omega, hbar : float
        Trap parameters; all must be positive here (with no coupling
        there is no spread-out stationary configuration).

    Returns
    -------
    ndarray
        Strictly increasing positions, symmetric about the origin, at
        which trap and interworld forces cancel identically.
    """
    if mass <= 0.0 or omega <= 0.0 or hbar <= 0.0:
        raise ConfigError("mass, omega and hbar must be positive")
    xi = _dimensionless_ground(n_worlds)
    return xi * np.sqrt(hbar / (2.0 * mass * omega))


def ground_energy_per_world(n_worlds, omega=1.0, hbar=1.0):
    """Stationary energy per world, (1 - 1/N) hbar omega / 2."""
    return (1.0 - 1.0 / n_worlds) * hbar * omega / 2.0


def relaxation_seed(n_worlds, mass=1.0, omega=1.0, hbar=1.0):
    """Quantile positions of the trap's minimum uncertainty density.

    A convenient ordered starting configuration for ``relax_to_ground``.
    """
    if mass <= 0.0 or omega <= 0.0 or hbar <= 0.0:
        raise ConfigError("mass, omega and hbar must be positive")
    u = (np.arange(1, n_worlds + 1) - 0.5) / n_worlds
    return norm.ppf(u) * np.sqrt(hbar / (2.0 * mass * omega))


@dataclass
class RelaxationResult:
    """Outcome of a relaxation run."""

    positions: np.ndarray
    converged: bool
    iterations: int
    max_force: float
    energy: float
    energy_history: np.ndarray


def relax_to_ground(
    positions,
    mass=1.0,
    omega=1.0,
    hbar=1.0,
    dt=0.05,
    force_tol=1.0e-10,
    max_iterations=20000,
):
    """Quench an ordered configuration to the harmonic stationary state.

    Each iteration integrates the full dynamics across one window ``dt``
    (velocity Verlet substeps, count adapted to the current lattice
    stiffness) and then discards the momenta.  Convergence means the
    largest residual force fell below ``force_tol``.  Never raises on a
    stalled run; inspect ``RelaxationResult.converged``.
    """
    x = np.array(positions, dtype=float, copy=True)
    if x.ndim != 1 or x.size < 2:
        raise ConfigError("positions must be one dimensional, length >= 2")
    if np.any(np.diff(x) <= 0.0):
        raise ConfigError("positions must be strictly increasing")
    if mass <= 0.0 or omega <= 0.0 or hbar <= 0.0:
        raise ConfigError("mass, omega and hbar must be positive")
    if dt <= 0.0 or force_tol <= 0.0:
        raise ConfigError("dt and force_tol must be positive")

    spring = mass * omega * omega

    def force(xi):
        return -spring * xi + interworld_force(xi, mass=mass, hbar=hbar)

    def energy(xi):
        trap = 0.5 * spring * float(np.dot(xi, xi))
        return trap + interworld_potential(xi, mass=mass, hbar=hbar)

    history = []
    f = force(x)
    fmax = float(np.max(np.abs(f)))
    history.append(energy(x))
    iterations = 0
    while fmax > force_tol and iterations < max_iterations:
        # substep count from the stiffest interworld mode of the current
        # lattice; sqrt(6) hbar / (m g^2) overestimates it by ~1.3x
        g_min = float(np.min(np.diff(x)))
        est = np.sqrt(6.0) * hbar / (mass * g_min * g_min)
        n_inner = max(8, int(np.ceil(1.5 * dt * max(est, omega))))
        h = dt / n_inner
        p = np.zeros_like(x)
        for _ in range(n_inner):
            p += 0.5 * h * f
            x += h * p / mass
            if np.any(np.diff(x) <= 0.0):
                raise CrossingError(
                    f"worlds crossed during relaxation iteration {iterations}"
                )
            f = force(x)
            p += 0.5 * h * f
        # momenta are discarded here; that is the quench
        iterations += 1
        fmax = float(np.max(np.abs(f)))
        history.append(energy(x))

    return RelaxationResult(
        positions=x,
        converged=bool(fmax <= force_tol),
        iterations=iterations,
        max_force=fmax,
        energy=history[-1],
        energy_history=np.asarray(history),
    )
