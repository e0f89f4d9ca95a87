"""Command line interface: scenario configuration, execution, and export.

Every subcommand accepts a flat ``key = value`` config file through
--config; flags override file values, which override built in defaults
(file keys are the flag names with dashes turned into underscores).
Outputs land in --output-dir, else $MIW_OUTPUT_DIR, else a
./miw_<subcommand> directory.  Identical invocations produce byte
identical files: no timestamps, sorted JSON keys, 17 significant digit
CSV floats, pinned figure metadata.

Exit codes: 0 success, 2 configuration problem, 3 numerical abort
(world ordering, grid health, norm drift), 4 non convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analysis, plotting
from .dynamics import Free, GaussianBarrier, Harmonic, evolve, simulate_tunneling
from .ensemble import WorldEnsemble
from .errors import (
    ConfigError,
    CrossingError,
    GridTooSmallError,
    MiwError,
    NonConvergenceError,
    NormDriftError,
)
from .groundstate import (
    ground_energy_per_world,
    harmonic_ground_positions,
    relax_to_ground,
    relaxation_seed,
)
from .interaction import (
    interworld_potential,
    uncertainty_floor,
    uncertainty_product,
)
from .schrodinger_ref import (
    InitialStateSpec,
    build_initial_state,
    dbb_trajectories,
    split_step_evolve,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_NOCONV = 4

ENERGY_DRIFT_TOL = 1.0e-6
TUNNEL_DRIFT_TOL = 1.0e-8


# ---------------------------------------------------------------------------
# option plumbing


@dataclass(frozen=True)
class Opt:
    """One scalar option of a subcommand."""

    name: str
    typ: type
    default: object = None
    required: bool = False
    choices: tuple = ()
    help: str = ""

    @property
    def dest(self):
        return self.name.replace("-", "_")


def _common_opts():
    return [
        Opt("config", str, help="flat key = value file; flags override it"),
        Opt("output-dir", str, help="output directory (else $MIW_OUTPUT_DIR)"),
        Opt("format", str, default="csv", choices=("csv", "json"),
            help="tabular output format"),
    ]


def parse_config_file(path):
    opts = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        opts[key.strip()] = value.strip()
    return opts


def resolve_options(opts, args, errors):
    """Merge defaults, config file, and flags; convert and validate types.

    Appends messages to ``errors`` instead of raising so that every
    problem is reported in one pass.
    """
    raw = {}
    if getattr(args, "config", None):
        raw = parse_config_file(args.config)
    cfg = {}
    for opt in opts:
        if opt.name in ("config", "output-dir"):
            continue
        value = getattr(args, opt.dest, None)
        source = f"--{opt.name}"
        file_value = raw.pop(opt.dest, None)  # claim the key even when a flag wins
        if value is None and file_value is not None:
            value = file_value
            source = f"config key {opt.dest}"
        if value is None:
            if opt.required:
                errors.append(f"{opt.name}: required")
                continue
            cfg[opt.dest] = opt.default
            continue
        try:
            converted = opt.typ(value)
        except (TypeError, ValueError):
            errors.append(f"{source}: expected {opt.typ.__name__}, got {value!r}")
            continue
        if opt.choices and converted not in opt.choices:
            errors.append(
                f"{source}: must be one of {', '.join(map(str, opt.choices))}"
            )
            continue
        cfg[opt.dest] = converted
    for key in raw:
        errors.append(f"config key {key}: unknown")
    return cfg


def resolve_output_dir(args, command):
    if getattr(args, "output_dir", None):
        base = args.output_dir
    elif os.environ.get("MIW_OUTPUT_DIR"):
        base = os.environ["MIW_OUTPUT_DIR"]
    else:
        base = f"miw_{command.replace('-', '_')}"
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# writers


def _fmt(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def _native(obj):
    """Recursively convert numpy scalars and arrays for JSON."""
    if isinstance(obj, dict):
        return {k: _native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_native(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_table(outdir, stem, columns, rows, fmt):
    """Write one table as CSV (17 significant digits) or JSON."""
    if fmt == "json":
        path = outdir / f"{stem}.json"
        payload = {"columns": list(columns), "rows": _native([list(r) for r in rows])}
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return path
    path = outdir / f"{stem}.csv"
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_trajectory(outdir, times, positions, momenta, fmt):
    rows = []
    for i, t in enumerate(times):
        for n in range(positions.shape[1]):
            rows.append((t, n, positions[i, n], momenta[i, n]))
    return write_table(outdir, "trajectory", ("t", "world_index", "x", "p"), rows, fmt)


def write_energy(outdir, times, kinetic, classical, interworld, fmt):
    rows = []
    for i, t in enumerate(times):
        h = kinetic[i] + classical[i] + interworld[i]
        rows.append((t, h, kinetic[i], classical[i], interworld[i]))
    return write_table(
        outdir, "energy", ("t", "H", "kinetic", "classical_V", "interworld_U"), rows, fmt
    )


def write_summary(outdir, payload):
    path = outdir / "summary.json"
    path.write_text(json.dumps(_native(payload), sort_keys=True, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# shared scenario helpers


def _positions_from_amplitude(spec, n, half_width, grid_points, mass, hbar):
    """Midpoint quantiles of |psi0|^2 for an ordered starting ensemble."""
    grid = build_initial_state(spec, -half_width, half_width, grid_points,
                               mass=mass, hbar=hbar)
    return analysis.quantile_positions(grid.x, grid.density(), n)


def _random_positions(spec, n, half_width, grid_points, mass, hbar, seed):
    grid = build_initial_state(spec, -half_width, half_width, grid_points,
                               mass=mass, hbar=hbar)
    rng = np.random.default_rng(seed)
    u = np.sort(rng.random(n))
    d = grid.density()
    segments = 0.5 * (d[1:] + d[:-1]) * np.diff(grid.x)
    cdf = np.concatenate(([0.0], np.cumsum(segments)))
    cdf /= cdf[-1]
    keep = np.concatenate(([True], np.diff(cdf) > 0.0))
    return np.interp(u, cdf[keep], grid.x[keep])


def _fringe_dict(count):
    return {"raw": count.raw, "merged": count.merged}


def _bounds_dict(report):
    return {
        "frames": report.n_frames,
        "min_energy_margin": report.min_energy_margin,
        "min_product_margin": report.min_product_margin,
        "violations": report.violations,
        "ok": report.ok(),
    }


# ---------------------------------------------------------------------------
# subcommand: groundstate-exact


def opts_groundstate_exact():
    return _common_opts() + [
        Opt("n", int, required=True, help="number of worlds (>= 2)"),
        Opt("omega", float, default=1.0, help="trap frequency"),
        Opt("mass", float, default=1.0),
        Opt("hbar", float, default=1.0),
    ]


def validate_groundstate_exact(cfg, errors):
    if cfg.get("n") is not None and cfg["n"] < 2:
        errors.append("n: need at least two worlds")
    for key in ("omega", "mass", "hbar"):
        if cfg.get(key) is not None and cfg[key] <= 0.0:
            errors.append(f"{key}: must be positive")


def run_groundstate_exact(cfg, outdir):
    n, omega, mass, hbar = cfg["n"], cfg["omega"], cfg["mass"], cfg["hbar"]
    x = harmonic_ground_positions(n, mass=mass, omega=omega, hbar=hbar)
    p = np.zeros_like(x)
    trap = Harmonic(omega=omega)
    classical = float(np.sum(trap.value(x, mass=mass)))
    inter = interworld_potential(x, mass=mass, hbar=hbar)
    energy_per_world = (classical + inter) / n
    exact = ground_energy_per_world(n, omega=omega, hbar=hbar)
    bounds = analysis.bounds_report(x[None, :], mass=mass, hbar=hbar)
    product = uncertainty_product(x, hbar=hbar)
    floor = uncertainty_floor(n, hbar=hbar)

    fmt = cfg["format"]
    write_trajectory(outdir, np.array([0.0]), x[None, :], p[None, :], fmt)
    write_energy(outdir, np.array([0.0]), [0.0], [classical], [inter], fmt)
    figures = [
        plotting.save_density_overlay(
            outdir / "density.png", x, title="stationary configuration"
        ).name
    ]
    write_summary(outdir, {
        "command": "groundstate-exact",
        "version": __version__,
        "config": cfg,
        "energy_per_world": energy_per_world,
        "energy_per_world_exact": exact,
        "energy_rel_error": abs(energy_per_world - exact) / exact,
        "uncertainty_product": product,
        "uncertainty_floor": floor,
        "positions": x,
        "figures": figures,
        "invariants": {
            "ordering": True,
            "bounds": _bounds_dict(bounds),
            "energy_rel_error_ok": abs(energy_per_world - exact) / exact < 1.0e-12,
        },
    })
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommand: groundstate-relax


def opts_groundstate_relax():
    return _common_opts() + [
        Opt("n", int, required=True, help="number of worlds (>= 2)"),
        Opt("omega", float, default=1.0),
        Opt("mass", float, default=1.0),
        Opt("hbar", float, default=1.0),
        Opt("dt", float, default=0.05, help="quench window per iteration"),
        Opt("force-tol", float, default=1.0e-10),
        Opt("max-iterations", int, default=20000),
    ]


def validate_groundstate_relax(cfg, errors):
    validate_groundstate_exact(cfg, errors)
    if cfg.get("dt") is not None and cfg["dt"] <= 0.0:
        errors.append("dt: must be positive")
    if cfg.get("force_tol") is not None and cfg["force_tol"] <= 0.0:
        errors.append("force-tol: must be positive")
    if cfg.get("max_iterations") is not None and cfg["max_iterations"] < 1:
        errors.append("max-iterations: must be at least 1")


def run_groundstate_relax(cfg, outdir):
    n, omega, mass, hbar = cfg["n"], cfg["omega"], cfg["mass"], cfg["hbar"]
    seed_positions = relaxation_seed(n, mass=mass, omega=omega, hbar=hbar)
    result = relax_to_ground(
        seed_positions,
        mass=mass,
        omega=omega,
        hbar=hbar,
        dt=cfg["dt"],
        force_tol=cfg["force_tol"],
        max_iterations=cfg["max_iterations"],
    )
    x = result.positions
    exact = ground_energy_per_world(n, omega=omega, hbar=hbar)
    energy_per_world = result.energy / n
    rel_err = abs(energy_per_world - exact) / exact
    trap = Harmonic(omega=omega)
    classical = float(np.sum(trap.value(x, mass=mass)))
    inter = interworld_potential(x, mass=mass, hbar=hbar)
    t_final = result.iterations * cfg["dt"]

    fmt = cfg["format"]
    write_trajectory(outdir, np.array([t_final]), x[None, :],
                     np.zeros((1, n)), fmt)
    write_energy(outdir, np.array([t_final]), [0.0], [classical], [inter], fmt)
    write_table(
        outdir, "relaxation", ("iteration", "energy"),
        list(enumerate(result.energy_history)), fmt,
    )
    figures = [
        plotting.save_relaxation(
            outdir / "relaxation.png", result.energy_history, target=n * exact
        ).name,
        plotting.save_density_overlay(
            outdir / "density.png", x, title="relaxed configuration"
        ).name,
    ]
    write_summary(outdir, {
        "command": "groundstate-relax",
        "version": __version__,
        "config": cfg,
        "converged": result.converged,
        "iterations": result.iterations,
        "max_force": result.max_force,
        "energy_per_world": energy_per_world,
        "energy_per_world_exact": exact,
        "energy_rel_error": rel_err,
        "figures": figures,
        "invariants": {
            "ordering": True,
            "converged": result.converged,
            "energy_rel_error_ok": rel_err < 1.0e-9,
        },
    })
    if not result.converged:
        print(
            f"relaxation stopped at {result.iterations} iterations with "
            f"max force {result.max_force:.3e} > tol {cfg['force_tol']:g}",
            file=sys.stderr,
        )
        return EXIT_NOCONV
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommand: evolve


def opts_evolve():
    return _common_opts() + [
        Opt("scenario", str, default="oscillator",
            choices=("oscillator", "free", "double-slit")),
        Opt("n", int, required=True, help="number of worlds (>= 2)"),
        Opt("omega", float, default=1.0, help="trap frequency (oscillator)"),
        Opt("mass", float, default=1.0),
        Opt("hbar", float, default=1.0),
        Opt("sigma", float, default=1.0, help="packet width (free, double-slit)"),
        Opt("separation", float, default=4.0, help="packet separation (double-slit)"),
        Opt("offset", float, default=0.0, help="rigid initial displacement"),
        Opt("dt", float, default=1.0e-3, help="time step, natural units"),
        Opt("t-final", float, help="window length; double-slit counts in "
            "hbar/(2m) units (defaults: one period, 5, 16)"),
        Opt("record-every", int, default=20),
        Opt("sample", str, default="quantile", choices=("quantile", "random")),
        Opt("seed", int, default=0, help="generator seed for --sample random"),
    ]


def validate_evolve(cfg, errors):
    if cfg.get("n") is not None and cfg["n"] < 2:
        errors.append("n: need at least two worlds")
    for key in ("omega", "mass", "hbar", "sigma", "separation", "dt"):
        if cfg.get(key) is not None and cfg[key] <= 0.0:
            errors.append(f"{key}: must be positive")
    if cfg.get("t_final") is not None and cfg["t_final"] <= 0.0:
        errors.append("t-final: must be positive")
    if cfg.get("record_every") is not None and cfg["record_every"] < 1:
        errors.append("record-every: must be at least 1")
    if cfg.get("seed") is not None and cfg["seed"] < 0:
        errors.append("seed: must be nonnegative")


def _evolve_initial_positions(cfg):
    scenario = cfg["scenario"]
    n, mass, hbar = cfg["n"], cfg["mass"], cfg["hbar"]
    if scenario == "oscillator":
        return harmonic_ground_positions(n, mass=mass, omega=cfg["omega"], hbar=hbar)
    if scenario == "free":
        spec = InitialStateSpec(kind="gaussian", sigma=cfg["sigma"])
        half_width = 12.0 * cfg["sigma"]
    else:
        spec = InitialStateSpec(
            kind="gaussian-pair", sigma=cfg["sigma"], separation=cfg["separation"]
        )
        half_width = cfg["separation"] / 2.0 + 12.0 * cfg["sigma"]
    if cfg["sample"] == "random":
        return _random_positions(spec, n, half_width, 8192, mass, hbar, cfg["seed"])
    return _positions_from_amplitude(spec, n, half_width, 8192, mass, hbar)


def run_evolve(cfg, outdir):
    scenario = cfg["scenario"]
    mass, hbar = cfg["mass"], cfg["hbar"]
    # double-slit reports its time column in hbar/(2m) units
    time_scale = 2.0 * mass / hbar if scenario == "double-slit" else 1.0
    if cfg["t_final"] is None:
        defaults = {
            "oscillator": 2.0 * np.pi / cfg["omega"],
            "free": 5.0,
            "double-slit": 16.0,
        }
        cfg["t_final"] = defaults[scenario]
    t_final_natural = cfg["t_final"] / time_scale

    x0 = _evolve_initial_positions(cfg) + cfg["offset"]
    ens = WorldEnsemble.at_rest(x0, mass=mass, hbar=hbar)
    potential = Harmonic(omega=cfg["omega"]) if scenario == "oscillator" else Free()
    n_steps = max(1, int(round(t_final_natural / cfg["dt"])))
    traj = evolve(ens, potential, cfg["dt"], n_steps, record_every=cfg["record_every"])

    bounds = analysis.bounds_report(traj.positions, mass=mass, hbar=hbar)
    drift = traj.energy_drift()
    out_times = traj.times * time_scale

    fmt = cfg["format"]
    write_trajectory(outdir, out_times, traj.positions, traj.momenta, fmt)
    write_energy(outdir, out_times, traj.kinetic, traj.classical, traj.interworld, fmt)
    figures = [
        plotting.save_worldlines(outdir / "trajectory.png", out_times,
                                 traj.positions).name,
        plotting.save_energy(outdir / "energy.png", out_times, traj.kinetic,
                             traj.classical, traj.interworld).name,
        plotting.save_density_overlay(outdir / "density.png", traj.positions[-1],
                                      title="final empirical density").name,
    ]

    summary = {
        "command": "evolve",
        "version": __version__,
        "config": cfg,
        "time_unit": "hbar_over_2m" if scenario == "double-slit" else "natural",
        "frames": traj.n_frames,
        "energy_drift": drift,
        "final_variance": float(traj.positions[-1].var()),
        "figures": figures,
        "invariants": {
            "ordering": True,
            "energy_drift_ok": drift < ENERGY_DRIFT_TOL,
            "bounds": _bounds_dict(bounds),
        },
    }
    if scenario == "double-slit":
        _, heights = analysis.step_density(traj.positions[-1])
        summary["interference"] = _fringe_dict(
            analysis.count_interference_maxima(heights)
        )
    if scenario == "free":
        c = analysis.quadratic_fit(traj.times, traj.variances())
        p = analysis.spreading_coefficients(x0, np.zeros_like(x0),
                                            mass=mass, hbar=hbar)
        summary["spreading"] = {
            "fit": list(c),
            "predicted": list(p),
            "rel_errors": [abs(a - b) / max(abs(b), 1e-300) for a, b in zip(c, p)],
        }
    if scenario == "oscillator":
        summary["ehrenfest_deviation"] = analysis.ehrenfest_deviation(
            traj.times, traj.centroids(), float(np.mean(x0)), 0.0,
            mass=mass, omega=cfg["omega"],
        )
    if cfg["sample"] == "random":
        summary["seed"] = cfg["seed"]
    write_summary(outdir, summary)
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommand: tunnel


def opts_tunnel():
    return _common_opts() + [
        Opt("n", int, default=2, help="must be 2 for this scenario"),
        Opt("v0", float, required=True, help="initial velocity toward the barrier"),
        Opt("q0", float, required=True, help="initial world gap"),
        Opt("barrier-v0", float, required=True, help="barrier height"),
        Opt("barrier-width", float, default=1.0),
        Opt("mass", float, default=1.0),
        Opt("hbar", float, default=1.0),
        Opt("dt", float, help="time step; default adapts to q0"),
        Opt("max-time", float, default=20000.0),
    ]


def validate_tunnel(cfg, errors):
    if cfg.get("n") is not None and cfg["n"] != 2:
        errors.append("n: the tunneling scenario runs exactly two worlds")
    if cfg.get("v0") is not None and cfg["v0"] < 0.0:
        errors.append("v0: must be nonnegative")
    for key in ("q0", "barrier_v0", "barrier_width", "mass", "hbar"):
        if cfg.get(key) is not None and cfg[key] <= 0.0:
            errors.append(f"{key.replace('_', '-')}: must be positive")
    if cfg.get("dt") is not None and cfg["dt"] <= 0.0:
        errors.append("dt: must be positive")
    if cfg.get("max_time") is not None and cfg["max_time"] <= 0.0:
        errors.append("max-time: must be positive")


def run_tunnel(cfg, outdir):
    mass, hbar = cfg["mass"], cfg["hbar"]
    result = simulate_tunneling(
        cfg["v0"],
        cfg["q0"],
        cfg["barrier_v0"],
        barrier_width=cfg["barrier_width"],
        mass=mass,
        hbar=hbar,
        dt=cfg["dt"],
        max_time=cfg["max_time"],
    )
    barrier = GaussianBarrier(height=cfg["barrier_v0"], width=cfg["barrier_width"])
    kin = (result.momenta ** 2).sum(axis=1) / (2.0 * mass)
    cla = barrier.value(result.positions, mass=mass).sum(axis=1)
    iw = np.array([
        interworld_potential(x, mass=mass, hbar=hbar) for x in result.positions
    ])

    fmt = cfg["format"]
    write_trajectory(outdir, result.times, result.positions, result.momenta, fmt)
    write_energy(outdir, result.times, kin, cla, iw, fmt)
    figures = [
        plotting.save_worldlines(
            outdir / "trajectory.png", result.times, result.positions,
            title="two worlds at a barrier", barrier_width=cfg["barrier_width"],
        ).name,
    ]
    write_summary(outdir, {
        "command": "tunnel",
        "version": __version__,
        "config": cfg,
        "leading": result.outcome_leading,
        "trailing": result.outcome_trailing,
        "predicted_leading": result.predicted_leading,
        "predicted_trailing": result.predicted_trailing,
        "matches_prediction": result.matches_prediction,
        "boost": result.boost,
        "critical_speed": result.critical_speed,
        "energy_drift": result.energy_drift,
        "t_final": result.t_final,
        "figures": figures,
        "invariants": {
            "ordering": True,
            "resolved": result.resolved,
            "energy_drift_ok": result.energy_drift < TUNNEL_DRIFT_TOL,
            "matches_prediction": result.matches_prediction,
        },
    })
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommand: reference-evolve


def opts_reference_evolve():
    return _common_opts() + [
        Opt("scenario", str, default="double-slit",
            choices=("gaussian", "double-slit", "oscillator-ground")),
        Opt("sigma", float, default=1.0),
        Opt("separation", float, default=4.0),
        Opt("momentum", float, default=0.0),
        Opt("omega", float, default=1.0),
        Opt("mass", float, default=1.0),
        Opt("hbar", float, default=1.0),
        Opt("grid-points", int, default=4096),
        Opt("grid-half-width", float, help="defaults: 20, 40, 12 by scenario"),
        Opt("dt", float, help="defaults: 1e-3 (5e-4 for double-slit)"),
        Opt("t-final", float, help="double-slit counts in hbar/(2m) units"),
        Opt("record-every", int, help="defaults: 20 (40 for double-slit)"),
    ]


def validate_reference_evolve(cfg, errors):
    for key in ("sigma", "separation", "omega", "mass", "hbar"):
        if cfg.get(key) is not None and cfg[key] <= 0.0:
            errors.append(f"{key}: must be positive")
    if cfg.get("grid_points") is not None and cfg["grid_points"] < 32:
        errors.append("grid-points: need at least 32")
    for key in ("grid_half_width", "dt", "t_final"):
        if cfg.get(key) is not None and cfg[key] <= 0.0:
            errors.append(f"{key.replace('_', '-')}: must be positive")
    if cfg.get("record_every") is not None and cfg["record_every"] < 1:
        errors.append("record-every: must be at least 1")


def _reference_setup(cfg):
    """Initial grid, potential, and time scaling for a reference scenario."""
    scenario = cfg["scenario"]
    mass, hbar = cfg["mass"], cfg["hbar"]
    if scenario == "double-slit":
        spec = InitialStateSpec(kind="gaussian-pair", sigma=cfg["sigma"],
                                separation=cfg["separation"],
                                momentum=cfg["momentum"])
        half_width = cfg["grid_half_width"] or 40.0
        potential = Free()
        time_scale = 2.0 * mass / hbar
        dt = cfg["dt"] or 5.0e-4
        record_every = cfg["record_every"] or 40
        t_final = (cfg["t_final"] or 16.0) / time_scale
    elif scenario == "gaussian":
        spec = InitialStateSpec(kind="gaussian", sigma=cfg["sigma"],
                                momentum=cfg["momentum"])
        half_width = cfg["grid_half_width"] or 20.0
        potential = Free()
        time_scale = 1.0
        dt = cfg["dt"] or 1.0e-3
        record_every = cfg["record_every"] or 20
        t_final = cfg["t_final"] or 4.0
    else:
        spec = InitialStateSpec(kind="oscillator-ground", omega=cfg["omega"],
                                momentum=cfg["momentum"])
        half_width = cfg["grid_half_width"] or 12.0
        potential = Harmonic(omega=cfg["omega"])
        time_scale = 1.0
        dt = cfg["dt"] or 1.0e-3
        record_every = cfg["record_every"] or 20
        t_final = cfg["t_final"] or 2.0 * np.pi / cfg["omega"]
    grid = build_initial_state(spec, -half_width, half_width, cfg["grid_points"],
                               mass=mass, hbar=hbar)
    return grid, potential, time_scale, dt, record_every, t_final


def run_reference_evolve(cfg, outdir):
    scenario = cfg["scenario"]
    mass, hbar = cfg["mass"], cfg["hbar"]
    grid, potential, time_scale, dt, record_every, t_final = _reference_setup(cfg)
    n_steps = max(1, int(round(t_final / dt)))
    ref = split_step_evolve(grid, potential, dt, n_steps,
                            record_every=record_every, mass=mass, hbar=hbar)
    out_times = ref.times * time_scale

    moments_rows = []
    for i, t in enumerate(out_times):
        dens = ref.density(i)
        norm = float(np.trapezoid(dens, ref.x))
        moments_rows.append((t, norm, ref.density_mean(i), ref.density_std(i)))
    fmt = cfg["format"]
    write_table(outdir, "moments", ("t", "norm", "mean", "std"), moments_rows, fmt)
    final = ref.density(-1)
    write_table(
        outdir, "density", ("t", "x", "density"),
        [(out_times[-1], ref.x[i], final[i]) for i in range(ref.x.size)], fmt,
    )
    figures = [_save_reference_density(outdir, ref)]

    drift = ref.norm_drift()
    summary = {
        "command": "reference-evolve",
        "version": __version__,
        "config": cfg,
        "time_unit": "hbar_over_2m" if scenario == "double-slit" else "natural",
        "frames": int(ref.n_frames),
        "norm_drift": drift,
        "final_std": ref.density_std(-1),
        "figures": figures,
        "invariants": {
            "norm_drift_ok": drift < 1.0e-8,
            "boundary_ok": True,
        },
    }
    if scenario == "double-slit":
        summary["interference"] = _fringe_dict(
            analysis.count_interference_maxima(final)
        )
    if scenario == "gaussian" and cfg["momentum"] == 0.0:
        from .schrodinger_ref import free_gaussian_variance

        expected = free_gaussian_variance(cfg["sigma"], ref.times[-1],
                                          mass=mass, hbar=hbar)
        measured = ref.density_std(-1) ** 2
        summary["variance_law_rel_error"] = abs(measured - expected) / expected
    if scenario == "oscillator-ground":
        change = float(np.max(np.abs(ref.density(-1) - ref.density(0))))
        summary["density_max_change"] = change
    write_summary(outdir, summary)
    return EXIT_OK


def _save_reference_density(outdir, ref):
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.4), dpi=110)
    ax.plot(ref.x, ref.density(0), color="0.6", lw=1.0, label="initial")
    ax.plot(ref.x, ref.density(-1), color="tab:red", lw=1.2, label="final")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title("reference density")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = outdir / "density.png"
    fig.savefig(path, metadata={"Software": "miw"})
    plt.close(fig)
    return path.name


# ---------------------------------------------------------------------------
# subcommand: compare


def opts_compare():
    return _common_opts() + [
        Opt("n", int, default=41, help="number of worlds"),
        Opt("sigma", float, default=1.0),
        Opt("separation", float, default=4.0),
        Opt("mass", float, default=1.0),
        Opt("hbar", float, default=1.0),
        Opt("grid-points", int, default=4096),
        Opt("grid-half-width", float, default=40.0),
        Opt("dt", float, default=5.0e-4, help="natural units"),
        Opt("t-final", float, default=16.0, help="in hbar/(2m) units"),
        Opt("record-every", int, default=40),
    ]


def validate_compare(cfg, errors):
    if cfg.get("n") is not None and cfg["n"] < 2:
        errors.append("n: need at least two worlds")
    for key in ("sigma", "separation", "mass", "hbar", "grid_half_width",
                "dt", "t_final"):
        if cfg.get(key) is not None and cfg[key] <= 0.0:
            errors.append(f"{key.replace('_', '-')}: must be positive")
    if cfg.get("grid_points") is not None and cfg["grid_points"] < 32:
        errors.append("grid-points: need at least 32")
    if cfg.get("record_every") is not None and cfg["record_every"] < 1:
        errors.append("record-every: must be at least 1")


def run_compare(cfg, outdir):
    mass, hbar = cfg["mass"], cfg["hbar"]
    time_scale = 2.0 * mass / hbar
    t_final = cfg["t_final"] / time_scale
    n_steps = max(1, int(round(t_final / cfg["dt"])))

    spec = InitialStateSpec(kind="gaussian-pair", sigma=cfg["sigma"],
                            separation=cfg["separation"])
    grid = build_initial_state(spec, -cfg["grid_half_width"],
                               cfg["grid_half_width"], cfg["grid_points"],
                               mass=mass, hbar=hbar)
    x0 = analysis.quantile_positions(grid.x, grid.density(), cfg["n"])
    ens = WorldEnsemble.at_rest(x0, mass=mass, hbar=hbar)
    traj = evolve(ens, Free(), cfg["dt"], n_steps, record_every=cfg["record_every"])
    ref = split_step_evolve(grid, Free(), cfg["dt"], n_steps,
                            record_every=cfg["record_every"], mass=mass, hbar=hbar)
    guided = dbb_trajectories(ref, x0)

    report = analysis.compare_positions(traj.times, traj.positions, guided, ref)
    equiv = analysis.equivariance_profile(ref, guided)
    _, heights = analysis.step_density(traj.positions[-1])
    world_fringes = analysis.count_interference_maxima(heights)
    ref_fringes = analysis.count_interference_maxima(ref.density(-1))
    bounds = analysis.bounds_report(traj.positions, mass=mass, hbar=hbar)
    drift = traj.energy_drift()

    out_times = traj.times * time_scale
    fmt = cfg["format"]
    write_trajectory(outdir, out_times, traj.positions, traj.momenta, fmt)
    write_energy(outdir, out_times, traj.kinetic, traj.classical, traj.interworld, fmt)
    write_table(
        outdir, "comparison",
        ("t", "per_world_max_deviation", "mean_abs_deviation",
         "wasserstein_density_distance"),
        [
            (out_times[i], report.per_world_max_deviation[i],
             report.mean_abs_deviation[i], report.wasserstein_density_distance[i])
            for i in range(out_times.size)
        ],
        fmt,
    )
    figures = [
        plotting.save_comparison(
            outdir / "comparison.png", out_times, report.per_world_max_deviation,
            report.mean_abs_deviation, report.wasserstein_density_distance,
        ).name,
        plotting.save_density_overlay(
            outdir / "density.png", traj.positions[-1], grid_x=ref.x,
            grid_density=ref.density(-1), title="final densities",
        ).name,
    ]
    write_summary(outdir, {
        "command": "compare",
        "version": __version__,
        "config": cfg,
        "time_unit": "hbar_over_2m",
        "frames": traj.n_frames,
        "energy_drift": drift,
        "norm_drift": ref.norm_drift(),
        "final_max_deviation": report.per_world_max_deviation[-1],
        "final_mean_deviation": report.mean_abs_deviation[-1],
        "final_wasserstein": report.wasserstein_density_distance[-1],
        "equivariance_max": float(np.max(equiv)),
        "world_interference": _fringe_dict(world_fringes),
        "reference_interference": _fringe_dict(ref_fringes),
        "figures": figures,
        "invariants": {
            "ordering": True,
            "energy_drift_ok": drift < ENERGY_DRIFT_TOL,
            "norm_drift_ok": ref.norm_drift() < 1.0e-8,
            "bounds": _bounds_dict(bounds),
            "equivariance_ok": bool(np.max(equiv) < 0.05),
            "reference_interference_ok": ref_fringes.raw >= 3,
            "world_interference_ok": world_fringes.merged >= 3,
        },
    })
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and dispatch


_COMMANDS = {
    "groundstate-exact": (opts_groundstate_exact, validate_groundstate_exact,
                          run_groundstate_exact,
                          "exact stationary trap configuration"),
    "groundstate-relax": (opts_groundstate_relax, validate_groundstate_relax,
                          run_groundstate_relax,
                          "iterative quench to the trap ground configuration"),
    "evolve": (opts_evolve, validate_evolve, run_evolve,
               "integrate a world ensemble scenario"),
    "tunnel": (opts_tunnel, validate_tunnel, run_tunnel,
               "two worlds against a Gaussian barrier"),
    "reference-evolve": (opts_reference_evolve, validate_reference_evolve,
                         run_reference_evolve,
                         "split step reference propagation"),
    "compare": (opts_compare, validate_compare, run_compare,
                "world ensemble versus guided reference samples"),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="miw",
        description="deterministic many worlds ensemble simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (opts_fn, _, _, blurb) in _COMMANDS.items():
        sp = sub.add_parser(name, help=blurb)
        for opt in opts_fn():
            sp.add_argument(f"--{opt.name}", dest=opt.dest, default=None,
                            help=opt.help or None)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if exc.code is not None else 0
        return int(code) if code != 0 else 0
    opts_fn, validate_fn, run_fn, _ = _COMMANDS[args.command]
    try:
        errors = []
        cfg = resolve_options(opts_fn(), args, errors)
        if not errors:
            validate_fn(cfg, errors)
        if errors:
            for message in errors:
                print(f"config error: {message}", file=sys.stderr)
            return EXIT_CONFIG
        outdir = resolve_output_dir(args, args.command)
        return run_fn(cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CrossingError, GridTooSmallError, NormDriftError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NonConvergenceError as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except MiwError as exc:  # any future class defaults to a numeric abort
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
