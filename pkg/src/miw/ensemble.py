"""Ordered world ensembles and their empirical statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .interaction import interworld_potential, nonclassical_momentum

__all__ = ["WorldEnsemble"]


def _checked_1d(values, name):
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ConfigError(f"{name} must be one dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be finite")
    return arr


@dataclass
class WorldEnsemble:
    """N worlds on a line: strictly increasing positions plus momenta.

    Parameters
    ----------
    positions : array_like
        World positions, strictly increasing, at least two of them.
    momenta : array_like
        Conjugate momenta, same shape as ``positions``.
    mass : float, optional
        Common particle mass, positive.
    hbar : float, optional
        Coupling scale.  Zero is allowed and switches the interworld
        interaction off (the classical limit); negative is rejected.
    """

    positions: np.ndarray
    momenta: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        self.positions = _checked_1d(self.positions, "positions")
        self.momenta = _checked_1d(self.momenta, "momenta")
        if self.positions.size < 2:
            raise ConfigError("need at least two worlds")
        if self.momenta.shape != self.positions.shape:
            raise ConfigError(
                f"momenta shape {self.momenta.shape} does not match "
                f"positions shape {self.positions.shape}"
            )
        if np.any(np.diff(self.positions) <= 0.0):
            raise ConfigError("positions must be strictly increasing")
        self.mass = float(self.mass)
        self.hbar = float(self.hbar)
        if not np.isfinite(self.mass) or self.mass <= 0.0:
            raise ConfigError("mass must be positive and finite")
        if not np.isfinite(self.hbar) or self.hbar < 0.0:
            raise ConfigError("hbar must be nonnegative and finite")

    @classmethod
    def at_rest(cls, positions, mass=1.0, hbar=1.0):
        """Ensemble with all momenta zero."""
        x = np.asarray(positions, dtype=float)
        return cls(x, np.zeros_like(x), mass=mass, hbar=hbar)

    @property
    def n_worlds(self):
        return self.positions.size

    def copy(self):
        return WorldEnsemble(
            self.positions, self.momenta, mass=self.mass, hbar=self.hbar
        )

    # empirical moments, 1/N convention throughout

    def centroid(self):
        return float(np.mean(self.positions))

    def mean_momentum(self):
        return float(np.mean(self.momenta))

    def position_variance(self):
        return float(np.var(self.positions))

    def position_momentum_covariance(self):
        x, p = self.positions, self.momenta
        return float(np.mean(x * p) - np.mean(x) * np.mean(p))

    def nonclassical_momentum(self):
        """Per world momentum scale carried by the interworld coupling."""
        return nonclassical_momentum(self.positions, hbar=self.hbar)

    def interworld_energy(self):
        return interworld_potential(self.positions, mass=self.mass, hbar=self.hbar)

    def kinetic_energy(self):
        return float(np.dot(self.momenta, self.momenta)) / (2.0 * self.mass)
