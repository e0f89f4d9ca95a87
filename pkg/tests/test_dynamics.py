import numpy as np
import pytest

from miw.dynamics import (
    Free,
    GaussianBarrier,
    Harmonic,
    evolve,
    free_pair_gap,
    predict_tunneling,
    simulate_tunneling,
)
from miw.ensemble import WorldEnsemble
from miw.errors import ConfigError, CrossingError
from miw.groundstate import harmonic_ground_positions


def test_potentials():
    x = np.array([-1.0, 0.5, 2.0])
    assert np.all(Free().value(x) == 0.0)
    assert np.all(Free().force(x) == 0.0)

    trap = Harmonic(omega=2.0, center=0.5)
    assert trap.value(x, mass=3.0) == pytest.approx(6.0 * (x - 0.5) ** 2)
    assert trap.force(x, mass=3.0) == pytest.approx(-12.0 * (x - 0.5))

    barrier = GaussianBarrier(height=2.0, width=0.5)
    assert barrier.value(np.array([0.0])) == pytest.approx([2.0])
    # the barrier pushes outward on either flank
    f = barrier.force(np.array([-0.3, 0.3]))
    assert f[0] < 0.0 < f[1]
    with pytest.raises(ConfigError):
        GaussianBarrier(height=1.0, width=0.0)
    with pytest.raises(ConfigError):
        Harmonic(omega=-1.0)


def test_energy_conservation_and_recording():
    x0 = harmonic_ground_positions(5) + 0.3
    ens = WorldEnsemble.at_rest(x0)
    traj = evolve(ens, Harmonic(omega=1.0), 1e-3, 6283, record_every=100)
    h = traj.hamiltonian
    assert traj.energy_drift() < 1e-6
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(6.283)
    # first frame, every hundredth step, and the final partial stride
    assert traj.n_frames == 6283 // 100 + 2
    assert np.max(np.abs(h - h[0])) / abs(h[0]) == pytest.approx(
        traj.energy_drift()
    )


def test_time_reversal():
    x0 = harmonic_ground_positions(7) + 0.2
    ens = WorldEnsemble.at_rest(x0)
    fwd = evolve(ens, Harmonic(omega=1.0), 1e-3, 500)
    turned = fwd.final_ensemble()
    turned.momenta *= -1.0
    back = evolve(turned, Harmonic(omega=1.0), 1e-3, 500)
    assert back.positions[-1] == pytest.approx(x0, abs=1e-10)


def test_centroid_follows_the_classical_oscillator():
    x0 = harmonic_ground_positions(5) + 0.4
    traj = evolve(WorldEnsemble.at_rest(x0), Harmonic(omega=1.0), 1e-3, 3000,
                  record_every=10)
    expected = 0.4 * np.cos(traj.times)
    assert np.max(np.abs(traj.centroids() - expected)) < 1e-6


def test_crossing_is_detected():
    # the coupling diverges at contact, so only an overshooting step can
    # swap neighbors; a huge dt forces exactly that
    ens = WorldEnsemble(np.array([0.0, 0.1]), np.array([100.0, -100.0]))
    with pytest.raises(CrossingError):
        evolve(ens, Free(), 0.1, 10)


def test_free_pair_gap_matches_evolution():
    q0 = 1.0
    ens = WorldEnsemble.at_rest(np.array([-q0 / 2.0, q0 / 2.0]))
    traj = evolve(ens, Free(), 1e-3, 2000, record_every=50)
    gaps = traj.positions[:, 1] - traj.positions[:, 0]
    expected = free_pair_gap(q0, traj.times)
    assert np.max(np.abs(gaps - expected)) < 1e-7


def test_tunneling_prediction_hand_cases():
    # boost = 0.5, threshold speed = 0.5
    assert predict_tunneling(1.1, 1.0, 0.125) == ("transmitted", "transmitted")
    assert predict_tunneling(0.8, 1.0, 0.125) == ("transmitted", "reflected")
    assert predict_tunneling(0.0, 1.0, 0.5) == ("reflected", "reflected")
    # zero incoming speed still transmits the leading world when the
    # boost alone clears the barrier
    assert predict_tunneling(0.0, 0.1, 10.0) == ("transmitted", "reflected")


def test_simulated_tunneling_matches_prediction():
    result = simulate_tunneling(1.0, 1.0, 0.2)
    assert (result.outcome_leading, result.outcome_trailing) == (
        "transmitted",
        "reflected",
    )
    assert result.matches_prediction
    assert result.energy_drift < 1e-8
    assert result.resolved


def test_tunneling_rejects_bad_parameters():
    with pytest.raises(ConfigError):
        simulate_tunneling(-0.1, 1.0, 1.0)
    with pytest.raises(ConfigError):
        simulate_tunneling(1.0, 0.0, 1.0)
