"""Cone-shaped transmitter coverage and receiver mobility.

The transmitter sits at the apex of a cone ``h_max`` deep whose base rim
lies exactly ``d_max`` away, so the base radius is sqrt(d_max^2 - h_max^2)
(sqrt(91) m with the defaults). A receiver holds one position for each
charging period and jumps to a fresh random position at the next one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

_REL_TOL = 1e-12


class Sampler(str, enum.Enum):
    UNIFORM_VOLUME = "uniform_volume"
    UNIFORM_DISTANCE = "uniform_distance"


@dataclass(frozen=True)
class ConeCoverage:
    d_max: float = 10.0
    h_max: float = 3.0

    @property
    def base_radius(self) -> float:
        return math.sqrt(self.d_max**2 - self.h_max**2)

    def validate(self) -> list[str]:
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in (self.d_max, self.h_max)):
            return ["d_max and h_max must be finite numbers"]
        if not 0.0 < self.h_max < self.d_max:
            return ["coverage must satisfy 0 < h_max < d_max"]
        return []


@dataclass(frozen=True)
class Position:
    h: float  # depth below the apex along the axis
    rho: float  # radial offset from the axis
    phi: float = 0.0


@dataclass(frozen=True)
class MobilityParams:
    period_min: float = 0.2  # hours
    period_max: float = 0.6
    sampler: Sampler = Sampler.UNIFORM_DISTANCE

    def validate(self) -> list[str]:
        problems = []
        if not all(
            isinstance(v, (int, float)) and math.isfinite(v) for v in (self.period_min, self.period_max)
        ):
            return ["period_min and period_max must be finite numbers"]
        if not 0.0 < self.period_min <= self.period_max:
            problems.append("mobility must satisfy 0 < period_min <= period_max")
        if not isinstance(self.sampler, Sampler):
            problems.append(f"sampler must be one of {[s.value for s in Sampler]}")
        return problems


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-constant receiver motion as (duration h, distance m) periods."""

    periods: tuple[tuple[float, float], ...]

    @property
    def durations(self) -> np.ndarray:
        return np.array([p[0] for p in self.periods], dtype=float)

    @property
    def distances(self) -> np.ndarray:
        return np.array([p[1] for p in self.periods], dtype=float)

    @property
    def total_duration(self) -> float:
        return math.fsum(p[0] for p in self.periods)

    def __len__(self) -> int:
        return len(self.periods)


def distance(p: Position) -> float:
    return math.hypot(p.h, p.rho)


def contains(cov: ConeCoverage, p: Position) -> bool:
    if p.h < 0.0 or p.h > cov.h_max * (1.0 + _REL_TOL):
        return False
    if p.rho < 0.0:
        return False
    return p.rho <= p.h * cov.base_radius / cov.h_max * (1.0 + _REL_TOL)


def position_from_uniforms(
    cov: ConeCoverage, sampler: Sampler, u: float, v: float = 0.0, w: float = 0.0
) -> Position:
    """Map uniform(0,1) variates onto a covered position.

    ``uniform_volume`` uses the inverse CDF of depth (volume grows as h^3)
    and of radius within the disc at that depth. ``uniform_distance`` only
    controls the link distance ``d_max * u``; the returned point is the
    on-axis point at that distance when it fits inside the cone depth and
    otherwise the point at full depth with the matching radial offset.
    """
    if sampler is Sampler.UNIFORM_VOLUME:
        h = cov.h_max * u ** (1.0 / 3.0)
        rho = h * cov.base_radius / cov.h_max * math.sqrt(v)
        return Position(h=h, rho=rho, phi=2.0 * math.pi * w)
    d = cov.d_max * u
    if d <= cov.h_max:
        return Position(h=d, rho=0.0)
    return Position(h=cov.h_max, rho=min(math.sqrt(d * d - cov.h_max**2), cov.base_radius))


def _positive_uniform(rng: np.random.Generator) -> float:
    # (0, 1] so sampled distances are strictly positive.
    return 1.0 - rng.random()


def sample_position(cov: ConeCoverage, mobility: MobilityParams, rng: np.random.Generator) -> Position:
    if mobility.sampler is Sampler.UNIFORM_VOLUME:
        u = _positive_uniform(rng)
        v, w = rng.random(), rng.random()
        return position_from_uniforms(cov, mobility.sampler, u, v, w)
    return position_from_uniforms(cov, mobility.sampler, _positive_uniform(rng))


def generate_trajectory(
    cov: ConeCoverage, mobility: MobilityParams, horizon: float, rng: np.random.Generator
) -> Trajectory:
    """Draw periods until they cover ``horizon`` hours; the last one is truncated."""
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    periods = []
    elapsed = 0.0
    while True:
        duration = rng.uniform(mobility.period_min, mobility.period_max)
        d = distance(sample_position(cov, mobility, rng))
        if elapsed + duration >= horizon:
            periods.append((horizon - elapsed, d))
            return Trajectory(tuple(periods))
        periods.append((duration, d))
        elapsed += duration
