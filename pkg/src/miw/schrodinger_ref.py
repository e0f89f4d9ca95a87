"""Split step wave equation reference solver with trajectory readouts.

Everything here serves as the comparison target for the world ensemble
dynamics: a Strang split spectral propagator on a uniform grid, guided
trajectories advected by the probability current, and the two
algebraically equivalent forms of the pressure like force that the
density exerts on those trajectories.

Grid health is watched while evolving: the propagator is periodic, so
probability reaching the edge silently wraps; the boundary watchdog
turns that into a hard error instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, CrossingError, GridTooSmallError, NormDriftError

__all__ = [
    "WavefunctionGrid",
    "InitialStateSpec",
    "build_initial_state",
    "ReferenceTrajectory",
    "split_step_evolve",
    "bohmian_velocity",
    "dbb_trajectories",
    "quantum_force_amplitude_form",
    "quantum_force_flux_form",
    "free_gaussian_variance",
]


@dataclass
class WavefunctionGrid:
    """Complex amplitude sampled on a uniform grid."""

    x: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.x.ndim != 1 or self.x.size < 32:
            raise ConfigError("grid needs at least 32 points")
        if self.psi.shape != self.x.shape:
            raise ConfigError("psi shape does not match grid shape")
        d = np.diff(self.x)
        if d[0] <= 0.0 or np.any(np.abs(d - d[0]) > 1.0e-9 * d[0]):
            raise ConfigError("grid spacing must be uniform and positive")

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def n_points(self):
        return self.x.size

    def density(self):
        return np.abs(self.psi) ** 2

    def norm(self):
        """Total probability by trapezoid quadrature."""
        return float(np.trapezoid(self.density(), self.x))

    def normalized(self):
        return WavefunctionGrid(self.x, self.psi / np.sqrt(self.norm()))

    def check_health(self, norm_tol=1.0e-8, boundary_rel=1.0e-10):
        """Raise if probability leaked (norm) or reached the edges."""
        drift = abs(self.norm() - 1.0)
        if drift > norm_tol:
            raise NormDriftError(f"norm drifted by {drift:.3e} (tol {norm_tol:g})")
        dens = self.density()
        edge = max(dens[0], dens[-1])
        peak = float(dens.max())
        if peak > 0.0 and edge > boundary_rel * peak:
            raise GridTooSmallError(
                f"boundary density {edge / peak:.3e} of peak exceeds "
                f"{boundary_rel:g}; enlarge the grid"
            )


@dataclass
class InitialStateSpec:
    """Recipe for an initial amplitude.

    kind is one of "gaussian", "gaussian-pair", "oscillator-ground".
    sigma is the density standard deviation of one packet; a pair is the
    equal weight sum of two unit norm packets at center +/- separation/2,
    renormalized after the sum.  momentum applies a plane wave factor.
    """

    kind: str
    sigma: float = 1.0
    separation: float = 0.0
    center: float = 0.0
    momentum: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        self.kind = self.kind.strip().lower().replace("_", "-")
        if self.kind not in ("gaussian", "gaussian-pair", "oscillator-ground"):
            raise ConfigError(f"unknown initial state kind {self.kind!r}")
        if self.kind != "oscillator-ground" and self.sigma <= 0.0:
            raise ConfigError("sigma must be positive")
        if self.kind == "gaussian-pair" and self.separation <= 0.0:
            raise ConfigError("separation must be positive for a pair")
        if self.kind == "oscillator-ground" and self.omega <= 0.0:
            raise ConfigError("omega must be positive")


def _packet(x, center, sigma):
    # unit L2 norm, density std = sigma
    return (2.0 * np.pi * sigma * sigma) ** -0.25 * np.exp(
        -((x - center) ** 2) / (4.0 * sigma * sigma)
    )


def build_initial_state(spec, x_min, x_max, n_points, mass=1.0, hbar=1.0):
    """Sample an initial amplitude on a fresh uniform grid.

    The grid must extend at least ten packet widths beyond every packet
    center, otherwise GridTooSmallError is raised up front.
    """
    if mass <= 0.0 or hbar <= 0.0:
        raise ConfigError("mass and hbar must be positive")
    if not x_max > x_min:
        raise ConfigError("x_max must exceed x_min")
    n_points = int(n_points)
    x = np.linspace(float(x_min), float(x_max), n_points)

    if spec.kind == "oscillator-ground":
        sigma = float(np.sqrt(hbar / (2.0 * mass * spec.omega)))
    else:
        sigma = float(spec.sigma)
    if spec.kind == "gaussian-pair":
        centers = (spec.center - spec.separation / 2.0, spec.center + spec.separation / 2.0)
    else:
        centers = (spec.center,)

    lo_need = min(centers) - 10.0 * sigma
    hi_need = max(centers) + 10.0 * sigma
    if x_min > lo_need or x_max < hi_need:
        raise GridTooSmallError(
            f"grid [{x_min:g}, {x_max:g}] must cover "
            f"[{lo_need:g}, {hi_need:g}] (ten widths beyond the centers)"
        )

    psi = np.zeros_like(x, dtype=complex)
    for c in centers:
        psi += _packet(x, c, sigma)
    if spec.momentum != 0.0:
        psi = psi * np.exp(1j * spec.momentum * x / hbar)
    grid = WavefunctionGrid(x, psi)
    return grid.normalized()


@dataclass
class ReferenceTrajectory:
    """Recorded amplitude history of one reference run."""

    x: np.ndarray
    times: np.ndarray
    psis: np.ndarray
    mass: float
    hbar: float

    @property
    def n_frames(self):
        return self.times.size

    def density(self, frame):
        return np.abs(self.psis[frame]) ** 2

    def norm_drift(self):
        dens = np.abs(self.psis) ** 2
        norms = np.trapezoid(dens, self.x, axis=1)
        return float(np.max(np.abs(norms - 1.0)))

    def density_mean(self, frame):
        dens = self.density(frame)
        return float(np.trapezoid(self.x * dens, self.x) / np.trapezoid(dens, self.x))

    def density_std(self, frame):
        dens = self.density(frame)
        total = float(np.trapezoid(dens, self.x))
        mean = float(np.trapezoid(self.x * dens, self.x)) / total
        var = float(np.trapezoid((self.x - mean) ** 2 * dens, self.x)) / total
        return float(np.sqrt(var))


def split_step_evolve(
    grid,
    potential,
    dt,
    n_steps,
    record_every=1,
    mass=1.0,
    hbar=1.0,
    norm_tol=1.0e-8,
    boundary_rel=1.0e-10,
    t0=0.0,
):
    """Strang split propagation: half potential, full kinetic, half potential.

    Second order in dt.  Health (norm and boundary leakage) is checked at
    every recorded frame.  Frames are stored at step 0, every
    ``record_every`` steps, and at the final step.
    """
    if dt <= 0.0:
        raise ConfigError("dt must be positive")
    if mass <= 0.0 or hbar <= 0.0:
        raise ConfigError("mass and hbar must be positive")
    n_steps = int(n_steps)
    record_every = int(record_every)
    if n_steps < 0 or record_every < 1:
        raise ConfigError("n_steps must be >= 0 and record_every >= 1")

    x = grid.x
    v = potential.value(x, mass=mass)
    k = 2.0 * np.pi * np.fft.fftfreq(x.size, d=grid.dx)
    half_v = np.exp(-0.5j * dt * v / hbar)
    full_k = np.exp(-0.5j * dt * hbar * k * k / mass)

    psi = grid.psi.copy()
    times, psis = [], []

    def record(step):
        snap = WavefunctionGrid(x, psi)
        snap.check_health(norm_tol=norm_tol, boundary_rel=boundary_rel)
        times.append(t0 + step * dt)
        psis.append(psi.copy())

    record(0)
    for step in range(1, n_steps + 1):
        psi = half_v * np.fft.ifft(full_k * np.fft.fft(half_v * psi))
        if step % record_every == 0 or step == n_steps:
            record(step)

    return ReferenceTrajectory(
        x=x,
        times=np.asarray(times),
        psis=np.asarray(psis),
        mass=mass,
        hbar=hbar,
    )


def bohmian_velocity(x, psi, mass=1.0, hbar=1.0, support_rel=1.0e-12):
    """Guidance velocity (hbar/m) Im(psi'/psi) on the grid.

    The spectral derivative is used where the density is at least
    ``support_rel`` of its peak; in the starved tails the velocity is
    filled by linear interpolation from the supported region, which
    keeps trajectory integration bounded there.
    """
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    dx = x[1] - x[0]
    k = 2.0 * np.pi * np.fft.fftfreq(x.size, d=dx)
    dpsi = np.fft.ifft(1j * k * np.fft.fft(psi))
    dens = np.abs(psi) ** 2
    ok = dens >= support_rel * dens.max()
    v = np.zeros_like(x)
    v[ok] = hbar / mass * np.imag(dpsi[ok] / psi[ok])
    if not ok.all():
        v[~ok] = np.interp(x[~ok], x[ok], v[ok])
    return v


def dbb_trajectories(ref, x0):
    """Advect sample points through the recorded velocity field history.

    Classic fourth order Runge Kutta per recorded interval, with the
    midpoint field taken as the average of the two bracketing frames.
    Accuracy is set by the recording cadence.  Ordering of the samples
    is preserved exactly or the run aborts, since crossings would mean
    the cadence was too coarse for the field.

    Returns an array of shape (n_frames, n_samples).
    """
    y = np.array(x0, dtype=float, copy=True)
    if y.ndim != 1 or y.size < 1:
        raise ConfigError("x0 must be a nonempty 1d array")
    if y.size > 1 and np.any(np.diff(y) <= 0.0):
        raise ConfigError("x0 must be strictly increasing")

    splines = [
        CubicSpline(
            ref.x, bohmian_velocity(ref.x, ref.psis[i], mass=ref.mass, hbar=ref.hbar)
        )
        for i in range(ref.n_frames)
    ]
    out = np.empty((ref.n_frames, y.size))
    out[0] = y
    for i in range(ref.n_frames - 1):
        h = ref.times[i + 1] - ref.times[i]
        s0, s1 = splines[i], splines[i + 1]
        k1 = s0(y)
        k2 = 0.5 * (s0(y + 0.5 * h * k1) + s1(y + 0.5 * h * k1))
        k3 = 0.5 * (s0(y + 0.5 * h * k2) + s1(y + 0.5 * h * k2))
        k4 = s1(y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if y.size > 1 and np.any(np.diff(y) <= 0.0):
            raise CrossingError(
                f"guided samples crossed between frames {i} and {i + 1}; "
                "record more frames"
            )
        out[i + 1] = y
    return out


def _d1(f, dx):
    # fourth order five point first derivative; edge values are copies of
    # the nearest interior value (callers exclude the edges anyway)
    g = np.empty_like(f)
    g[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dx)
    g[:2] = g[2]
    g[-2:] = g[-3]
    return g


def quantum_force_amplitude_form(density, dx, mass=1.0, hbar=1.0):
    """Force from the density's pressure term, amplitude route.

    Minus the gradient of q = -(hbar^2/2m) (sqrt P)'' / sqrt P.
    Derivatives are local finite differences on purpose: spectral ones
    smear tail underflow across the whole line through the transform.
    """
    p = np.asarray(density, dtype=float)
    sq = np.sqrt(p)
    q = -(hbar * hbar / (2.0 * mass)) * _d1(_d1(sq, dx), dx) / sq
    return -_d1(q, dx)


def quantum_force_flux_form(density, dx, mass=1.0, hbar=1.0):
    """Same force, divergence of stress route.

    (hbar^2/4m) [P ((log P)')']' / P, algebraically identical to the
    amplitude route for smooth positive P.
    """
    p = np.asarray(density, dtype=float)
    slope = _d1(p, dx) / p
    return (hbar * hbar / (4.0 * mass)) * _d1(p * _d1(slope, dx), dx) / p


def free_gaussian_variance(sigma0, t, mass=1.0, hbar=1.0):
    """Density variance of a free packet: sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2)."""
    tau = hbar * np.asarray(t, dtype=float) / (2.0 * mass * sigma0 * sigma0)
    return sigma0 * sigma0 * (1.0 + tau * tau)
