"""Discrete-time charging control loop and the Monte Carlo harness.

One procedure starts at a random point of the charging profile and runs
until the battery is full while the receiver hops between positions. At
every step the monitor reports the preferred output power, the controller
reads the distance, and the source is driven at the power the active scheme
asks for. Source energy is integrated with the trapezoidal rule on a step
grid that also contains every period boundary and the CC/CV corner, so the
integrand is smooth inside each step.

Runs are reproducible per index: run ``k`` draws everything from
``SeedSequence(seed, spawn_key=(k,))``, and every scheme is evaluated on the
same start time and trajectory.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import battery as bat
from . import link
from .battery import ChargeProfileParams, ChargeState
from .coverage import ConeCoverage, MobilityParams, Trajectory, generate_trajectory
from .link import LinkParams
from .schemes import ALL_SCHEMES, SchemeKind

# Grid points closer than this (hours) to a breakpoint are merged into it.
_KNOT_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    link: LinkParams = field(default_factory=LinkParams)
    battery: ChargeProfileParams = field(default_factory=ChargeProfileParams)
    coverage: ConeCoverage = field(default_factory=ConeCoverage)
    mobility: MobilityParams = field(default_factory=MobilityParams)
    dt: float = 0.001  # hours
    runs: int = 1000
    seed: int = 0
    schemes: tuple[SchemeKind, ...] = ALL_SCHEMES

    def validate(self) -> list[str]:
        problems = [f"link: {p}" for p in self.link.validate()]
        problems += [f"battery: {p}" for p in self.battery.validate()]
        problems += [f"coverage: {p}" for p in self.coverage.validate()]
        problems += [f"mobility: {p}" for p in self.mobility.validate()]
        if not (isinstance(self.dt, (int, float)) and 0.0 < self.dt <= 0.1):
            problems.append("sim: dt must satisfy 0 < dt <= 0.1 h")
        if not (isinstance(self.runs, int) and self.runs >= 1):
            problems.append("sim: runs must be a positive integer")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            problems.append("sim: seed must be an unsigned 64-bit integer")
        if not self.schemes:
            problems.append("sim: schemes must not be empty")
        elif len(set(self.schemes)) != len(self.schemes):
            problems.append("sim: schemes must not repeat")
        return problems

    def checked(self) -> "SimConfig":
        problems = self.validate()
        if problems:
            raise ConfigError("; ".join(problems))
        return self


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    scheme: SchemeKind
    start_time: float  # hours
    period_count: int
    energy: float  # Wh
    charge_duration: float  # hours


@dataclass(frozen=True)
class SchemeStats:
    runs: int
    mean_energy: float
    std_energy: float


@dataclass(frozen=True)
class AggregateStats:
    per_scheme: dict[SchemeKind, SchemeStats]
    savings: dict[SchemeKind, float]  # ARBC savings vs each other scheme, percent


# ---------------------------------------------------------------------------
# single step


def _source_power_on_stage(config: SimConfig, kind: SchemeKind, t, d, cv_stage):
    # Shared by every scheme in the same operation order, which keeps the
    # per-run energy ordering exact in floating point.
    if kind.follows_profile:
        p_out = bat.stage_power(config.battery, t, cv_stage)
    else:
        p_out = np.full(np.shape(t), bat.peak_power(config.battery))
    if not kind.tracks_distance:
        d = np.full(np.shape(d), config.coverage.d_max)
    return link.source_power(config.link, p_out, d)


def _trapezoid(config, kind, a, b, d, cv_stage):
    ps_a = _source_power_on_stage(config, kind, a, d, cv_stage)
    ps_b = _source_power_on_stage(config, kind, b, d, cv_stage)
    return 0.5 * (ps_a + ps_b) * (b - a)


def met_step(
    state: ChargeState, scheme: SchemeKind, d: float, dt: float, config: SimConfig
) -> tuple[ChargeState, float, float]:
    """Advance one control step at fixed distance ``d``.

    Returns the new state, the source power requested at the start of the
    step (W) and the source energy drawn over the step (Wh).
    """
    p = config.battery
    if state.completed(p):
        raise ValueError("charging time is already cut off; the procedure has terminated")
    if not 0.0 < d <= config.coverage.d_max:
        raise ValueError(f"distance must lie in (0, {config.coverage.d_max}] m")
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    t0 = state.t
    t1 = t0 + min(dt, p.t_end - t0)
    if p.t_end - t1 < _KNOT_TOL:
        t1 = p.t_end
    d_arr = np.asarray(d, dtype=float)
    if t0 < p.t_cc < t1:
        energy = float(_trapezoid(config, scheme, t0, p.t_cc, d_arr, False)) + float(
            _trapezoid(config, scheme, p.t_cc, t1, d_arr, True)
        )
    else:
        energy = float(_trapezoid(config, scheme, t0, t1, d_arr, t0 >= p.t_cc))
    ps = float(_source_power_on_stage(config, scheme, t0, d_arr, t0 >= p.t_cc))
    return ChargeState.at_time(p, t1), ps, energy


# ---------------------------------------------------------------------------
# whole procedure


@dataclass(frozen=True)
class _Grid:
    left: np.ndarray
    right: np.ndarray
    distance: np.ndarray  # actual distance held over each step
    cv_stage: np.ndarray


def _step_grid(config: SimConfig, start_time: float, trajectory: Trajectory, dt: float) -> _Grid:
    p = config.battery
    horizon = p.t_end - start_time
    if trajectory.total_duration < horizon - 1e-9:
        raise ValueError(
            f"trajectory covers {trajectory.total_duration:.6g} h but {horizon:.6g} h remain"
        )
    ends = start_time + np.cumsum(trajectory.durations)
    breaks = [start_time, p.t_end]
    breaks += [float(e) for e in ends[:-1] if start_time < e < p.t_end]
    if start_time < p.t_cc < p.t_end:
        breaks.append(p.t_cc)
    breaks = np.unique(np.array(breaks))

    regular = start_time + dt * np.arange(1, math.ceil(horizon / dt))
    pos = np.searchsorted(breaks, regular)
    gap = np.minimum(
        np.abs(regular - breaks[np.clip(pos - 1, 0, len(breaks) - 1)]),
        np.abs(breaks[np.clip(pos, 0, len(breaks) - 1)] - regular),
    )
    knots = np.union1d(breaks, regular[(gap > _KNOT_TOL) & (regular < p.t_end)])
    left, right = knots[:-1], knots[1:]
    keep = right - left > _KNOT_TOL
    left, right = left[keep], right[keep]

    mid = 0.5 * (left + right)
    period = np.minimum(np.searchsorted(ends, mid, side="right"), len(trajectory) - 1)
    return _Grid(left, right, trajectory.distances[period], mid >= p.t_cc)


def _grid_energy(config: SimConfig, kind: SchemeKind, grid: _Grid) -> float:
    steps = _trapezoid(config, kind, grid.left, grid.right, grid.distance, grid.cv_stage)
    return float(np.sum(steps))


def _check_start(config: SimConfig, start_time: float) -> None:
    if not 0.0 <= start_time <= config.battery.t_end:
        raise ValueError(f"start time must lie in [0, {config.battery.t_end}] h")


def procedure_energies(
    config: SimConfig,
    start_time: float,
    trajectory: Trajectory,
    dt: float | None = None,
    schemes=None,
) -> dict[SchemeKind, float]:
    """Source energy in Wh of each scheme over one shared procedure."""
    _check_start(config, start_time)
    schemes = config.schemes if schemes is None else schemes
    if start_time >= config.battery.t_end:
        return {kind: 0.0 for kind in schemes}
    grid = _step_grid(config, start_time, trajectory, config.dt if dt is None else dt)
    return {kind: _grid_energy(config, kind, grid) for kind in schemes}


def run_procedure(
    config: SimConfig,
    scheme: SchemeKind,
    start_time: float,
    trajectory: Trajectory,
    dt: float | None = None,
    run_id: int = 0,
) -> RunRecord:
    energy = procedure_energies(config, start_time, trajectory, dt, (scheme,))[scheme]
    return RunRecord(
        run_id=run_id,
        scheme=scheme,
        start_time=start_time,
        period_count=max(len(trajectory), 1),
        energy=energy,
        charge_duration=config.battery.t_end - start_time,
    )


# ---------------------------------------------------------------------------
# Monte Carlo


def run_rng(seed: int, run_id: int) -> np.random.Generator:
    """Independent stream for one run, hashed from (seed, run_id)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run_id,)))


def draw_run(config: SimConfig, run_id: int) -> tuple[float, Trajectory]:
    """Start time (uniform over the profile) and trajectory for one run."""
    rng = run_rng(config.seed, run_id)
    start_time = config.battery.t_end * rng.random()
    trajectory = generate_trajectory(
        config.coverage, config.mobility, config.battery.t_end - start_time, rng
    )
    return start_time, trajectory


def simulate_run(config: SimConfig, run_id: int) -> list[RunRecord]:
    start_time, trajectory = draw_run(config, run_id)
    energies = procedure_energies(config, start_time, trajectory)
    return [
        RunRecord(
            run_id=run_id,
            scheme=kind,
            start_time=start_time,
            period_count=len(trajectory),
            energy=energies[kind],
            charge_duration=config.battery.t_end - start_time,
        )
        for kind in config.schemes
    ]


def _simulate_chunk(args) -> list[RunRecord]:
    config, lo, hi = args
    out = []
    for k in range(lo, hi):
        out.extend(simulate_run(config, k))
    return out


def aggregate(records: list[RunRecord], schemes) -> AggregateStats:
    per_scheme = {}
    for kind in schemes:
        energies = np.array([r.energy for r in records if r.scheme is kind])
        std = float(np.std(energies, ddof=1)) if len(energies) > 1 else 0.0
        per_scheme[kind] = SchemeStats(len(energies), float(np.mean(energies)), std)
    stats = AggregateStats(per_scheme=per_scheme, savings={})
    if SchemeKind.ARBC in per_scheme and len(per_scheme) > 1:
        stats.savings.update(savings_report(stats))
    return stats


def monte_carlo(config: SimConfig, workers: int = 1) -> tuple[list[RunRecord], AggregateStats]:
    """Run ``config.runs`` paired procedures and summarise them.

    Results are identical for any ``workers``; chunks are reassembled in
    run-index order before reduction.
    """
    config.checked()
    if workers <= 1:
        records = _simulate_chunk((config, 0, config.runs))
    else:
        size = max(1, math.ceil(config.runs / (4 * workers)))
        chunks = [(config, lo, min(lo + size, config.runs)) for lo in range(0, config.runs, size)]
        records = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_simulate_chunk, chunks):
                records.extend(part)
    return records, aggregate(records, config.schemes)


def savings_report(stats: AggregateStats) -> dict[SchemeKind, float]:
    """Percent of source energy ARBC saves relative to every other scheme."""
    if SchemeKind.ARBC not in stats.per_scheme:
        raise ConfigError("savings need ARBC among the simulated schemes")
    arbc = stats.per_scheme[SchemeKind.ARBC].mean_energy
    out = {}
    for kind, s in stats.per_scheme.items():
        if kind is SchemeKind.ARBC:
            continue
        if s.mean_energy == 0.0:
            raise ConfigError(f"mean energy of {kind.value} is zero; savings undefined")
        out[kind] = 100.0 * (s.mean_energy - arbc) / s.mean_energy
    if not out:
        raise ConfigError("savings need at least one scheme besides ARBC")
    return out


def trace_rows(config: SimConfig):
    """Per-step source power of every scheme over run 0's procedure.

    Yields ``(t, d, {scheme: watts})`` at each step's left endpoint.
    """
    start_time, trajectory = draw_run(config, 0)
    grid = _step_grid(config, start_time, trajectory, config.dt)
    powers = {
        kind: _source_power_on_stage(config, kind, grid.left, grid.distance, grid.cv_stage)
        for kind in ALL_SCHEMES
    }
    for i, (t, d) in enumerate(zip(grid.left, grid.distance)):
        yield float(t), float(d), {kind: float(powers[kind][i]) for kind in ALL_SCHEMES}
