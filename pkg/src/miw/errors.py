"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so the split between classes
matters: configuration problems are recoverable by the caller, numerical
aborts are not.
"""

__all__ = [
    "MiwError",
    "ConfigError",
    "CrossingError",
    "GridTooSmallError",
    "NormDriftError",
    "NonConvergenceError",
]


class MiwError(Exception):
    """Base class for everything raised deliberately by this package."""


class ConfigError(MiwError):
    """Invalid parameters or malformed input (CLI exit code 2)."""


class CrossingError(MiwError):
    """World ordering was violated during integration (CLI exit code 3)."""


class GridTooSmallError(MiwError):
    """Probability density reached the edge of the spatial grid (exit 3)."""


class NormDriftError(MiwError):
    """Wavefunction norm drifted beyond tolerance (CLI exit code 3)."""


class NonConvergenceError(MiwError):
    """An iteration budget ran out before convergence (CLI exit code 4)."""
