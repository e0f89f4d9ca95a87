"""Deterministic simulator for ensembles of classical worlds coupled by
an interworld repulsion, with a split step wave equation reference
solver and comparison tooling."""

from .ensemble import WorldEnsemble
from .errors import (
    ConfigError,
    CrossingError,
    GridTooSmallError,
    MiwError,
    NonConvergenceError,
    NormDriftError,
)
from .interaction import (
    interworld_force,
    interworld_potential,
    nonclassical_momentum,
    uncertainty_floor,
    uncertainty_product,
    zero_point_energy_bound,
)
from .groundstate import (
    RelaxationResult,
    ground_energy_per_world,
    harmonic_ground_positions,
    relax_to_ground,
    relaxation_seed,
)
from .dynamics import (
    Free,
    GaussianBarrier,
    Harmonic,
    Trajectory,
    TunnelingResult,
    energy_components,
    evolve,
    free_pair_gap,
    predict_tunneling,
    simulate_tunneling,
)
from .schrodinger_ref import (
    InitialStateSpec,
    ReferenceTrajectory,
    WavefunctionGrid,
    bohmian_velocity,
    build_initial_state,
    dbb_trajectories,
    free_gaussian_variance,
    quantum_force_amplitude_form,
    quantum_force_flux_form,
    split_step_evolve,
)
from .analysis import (
    BoundsReport,
    ComparisonReport,
    MaximaCount,
    bounds_report,
    compare_positions,
    count_interference_maxima,
    ehrenfest_deviation,
    equivariance_profile,
    node_density,
    quadratic_fit,
    quantile_positions,
    spreading_coefficients,
    step_density,
    wasserstein_atoms_vs_density,
    wasserstein_sorted,
)

__version__ = "1.0.0"
