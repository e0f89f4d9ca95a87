import numpy as np
import pytest

from miw.dynamics import Harmonic
from miw.errors import ConfigError
from miw.groundstate import (
    ground_energy_per_world,
    harmonic_ground_positions,
    relax_to_ground,
    relaxation_seed,
)
from miw.interaction import interworld_force, interworld_potential


def total_force(x, mass, omega, hbar):
    return -mass * omega**2 * x + interworld_force(x, mass=mass, hbar=hbar)


def test_three_worlds_closed_form():
    for mass, omega, hbar in [(1.0, 1.0, 1.0), (2.0, 0.5, 1.0), (1.0, 3.0, 0.7)]:
        x = harmonic_ground_positions(3, mass=mass, omega=omega, hbar=hbar)
        unit = np.sqrt(hbar / (2.0 * mass * omega))
        assert x == pytest.approx(np.array([-1.0, 0.0, 1.0]) * unit, abs=1e-12 * unit)


def test_four_worlds_closed_form():
    # outermost dimensionless coordinate solves 4 y^2 - 7 y + 2 = 0
    xi1 = -np.sqrt((7.0 + np.sqrt(17.0)) / 8.0)
    x = harmonic_ground_positions(4)
    unit = np.sqrt(0.5)
    xi = x / unit
    assert xi[0] == pytest.approx(xi1, abs=1e-12)
    assert xi[3] == pytest.approx(-xi1, abs=1e-12)
    assert xi[1] == pytest.approx(xi1 - 1.0 / xi1, abs=1e-12)


def test_configuration_is_stationary_and_antisymmetric():
    for n in (2, 5, 11, 41, 64):
        x = harmonic_ground_positions(n)
        assert np.all(np.diff(x) > 0.0)
        assert x == pytest.approx(-x[::-1], abs=1e-13)
        # positions carry ~1e-13 recurrence roundoff, which the cubic
        # force sensitivity amplifies; the energy itself is variational
        f = total_force(x, 1.0, 1.0, 1.0)
        assert np.max(np.abs(f)) < 1e-7


def test_energy_per_world_formula():
    for n in range(2, 65):
        x = harmonic_ground_positions(n)
        trap = float(np.sum(Harmonic(omega=1.0).value(x)))
        u = interworld_potential(x)
        measured = (trap + u) / n
        assert measured == pytest.approx(
            ground_energy_per_world(n), rel=1e-12
        )
    assert ground_energy_per_world(11) == pytest.approx(5.0 / 11.0, rel=1e-15)


def test_rejects_bad_requests():
    with pytest.raises(ConfigError):
        harmonic_ground_positions(1)
    with pytest.raises(ConfigError):
        harmonic_ground_positions(5, omega=-1.0)


def test_relaxation_seed_is_ordered():
    x = relaxation_seed(21)
    assert np.all(np.diff(x) > 0.0)
    assert abs(x.mean()) < 1e-12


def test_relaxation_reaches_the_stationary_state():
    n = 5
    result = relax_to_ground(relaxation_seed(n), dt=0.05)
    assert result.converged
    exact = harmonic_ground_positions(n)
    assert result.positions == pytest.approx(exact, abs=1e-8)
    assert result.energy / n == pytest.approx(
        ground_energy_per_world(n), rel=1e-11
    )
    # the quench sheds energy overall and never stalls above the target
    assert result.energy_history[-1] < result.energy_history[0]


def test_relaxation_reports_stalls():
    result = relax_to_ground(relaxation_seed(5), max_iterations=3)
    assert not result.converged
    assert result.iterations == 3
