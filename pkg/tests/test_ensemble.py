import numpy as np
import pytest

from miw.ensemble import WorldEnsemble
from miw.errors import ConfigError
from miw.interaction import interworld_potential, nonclassical_momentum


def test_validation():
    good = np.array([0.0, 1.0, 2.5])
    with pytest.raises(ConfigError):
        WorldEnsemble(good[::-1].copy(), np.zeros(3))
    with pytest.raises(ConfigError):
        WorldEnsemble(np.array([0.0, 0.0, 1.0]), np.zeros(3))
    with pytest.raises(ConfigError):
        WorldEnsemble(good, np.zeros(2))
    with pytest.raises(ConfigError):
        WorldEnsemble(np.array([1.0]), np.array([0.0]))
    with pytest.raises(ConfigError):
        WorldEnsemble(np.array([0.0, np.nan]), np.zeros(2))
    with pytest.raises(ConfigError):
        WorldEnsemble(good, np.zeros(3), mass=0.0)
    with pytest.raises(ConfigError):
        WorldEnsemble(good, np.zeros(3), hbar=-1.0)


def test_at_rest_and_copy():
    x = np.array([-1.0, 0.3, 2.0])
    ens = WorldEnsemble.at_rest(x, mass=2.0)
    assert np.all(ens.momenta == 0.0)
    assert ens.n_worlds == 3
    other = ens.copy()
    other.positions[0] = -5.0
    assert ens.positions[0] == -1.0


def test_moments_match_numpy(make_ordered, rng):
    x = make_ordered(12)
    p = rng.normal(size=12)
    ens = WorldEnsemble(x, p)
    assert ens.centroid() == pytest.approx(x.mean())
    assert ens.mean_momentum() == pytest.approx(p.mean())
    # 1/N convention throughout
    assert ens.position_variance() == pytest.approx(np.var(x))
    cov = np.mean((x - x.mean()) * (p - p.mean()))
    assert ens.position_momentum_covariance() == pytest.approx(cov)


def test_energies(make_ordered, rng):
    x = make_ordered(8)
    p = rng.normal(size=8)
    ens = WorldEnsemble(x, p, mass=1.5, hbar=0.7)
    assert ens.kinetic_energy() == pytest.approx(np.sum(p**2) / 3.0)
    assert ens.interworld_energy() == pytest.approx(
        interworld_potential(x, mass=1.5, hbar=0.7)
    )
    assert ens.nonclassical_momentum() == pytest.approx(
        nonclassical_momentum(x, hbar=0.7)
    )


def test_classical_limit_is_uncoupled():
    x = np.array([0.0, 1.0, 3.0])
    ens = WorldEnsemble.at_rest(x, hbar=0.0)
    assert ens.interworld_energy() == 0.0
    assert np.all(ens.nonclassical_momentum() == 0.0)
