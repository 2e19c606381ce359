"""Transmitter-to-receiver power link of a resonant beam charging system.

The source power needed to deliver an output power ``p_out`` over a
charging distance ``d`` is

    P_s = (p_out - m) * (1 + f) / (2 n (1 - f)) * g(d)
    g(d) = exp(-2 pi r^2 / (lambda (l + d))) - ln f

so for a fixed distance the relation between source and output power is
affine, with intercept ``m`` on the output side and a slope that grows
with distance through the link gain ``g``.

All quantities are SI (watts, meters). Functions accept scalars or numpy
arrays and return a float for scalar input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkParams:
    """Physical constants of the power link.

    Defaults are the fitted prototype values: r = 1.5 mm, lambda = 1064 nm,
    l = 65 mm, stored here in meters.
    """

    m: float = -3.5017  # W, output-side offset
    n: float = 0.0795
    f: float = 0.88  # reflectivity of the receiver-side reflector
    r: float = 1.5e-3  # m, reflector radius
    lam: float = 1064e-9  # m, beam wavelength
    l: float = 65e-3  # m, gain medium to transmitter reflector

    @property
    def slope_factor(self) -> float:
        return (1.0 + self.f) / (2.0 * self.n * (1.0 - self.f))

    @property
    def max_gain(self) -> float:
        """Supremum of the link gain, reached as d grows without bound."""
        return 1.0 - math.log(self.f)

    def validate(self) -> list[str]:
        return validate(self)


def validate(params: LinkParams) -> list[str]:
    """Return every invariant violation as a message naming the field."""
    problems = []
    for name in ("m", "n", "f", "r", "lam", "l"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            problems.append(f"{name} must be a finite number")
    if problems:
        return problems
    if not 0.0 < params.f < 1.0:
        problems.append("f must lie in (0,1)")
    for name in ("n", "r", "lam", "l"):
        if getattr(params, name) <= 0.0:
            problems.append(f"{name} must be positive")
    if not problems:
        slope = params.slope_factor
        if not (math.isfinite(slope) and slope > 0.0):
            problems.append("slope factor (1+f)/(2n(1-f)) must be finite and positive")
    return problems


def _scalar_or_array(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def _check_distance(d: np.ndarray) -> None:
    if not np.all(np.isfinite(d)):
        raise ValueError("distance must be finite")
    if np.any(d < 0.0):
        raise ValueError("distance must be non-negative")


def _gain(params: LinkParams, d):
    # Underflows to exactly 0 near d = 0 (exponent is about -204 there).
    return np.exp(-2.0 * np.pi * params.r**2 / (params.lam * (params.l + d))) - np.log(
        params.f
    )


def link_gain(params: LinkParams, d):
    """Distance-dependent gain factor g(d), strictly increasing in ``d``."""
    d = np.asarray(d, dtype=float)
    _check_distance(d)
    return _scalar_or_array(_gain(params, d))


def source_power(params: LinkParams, p_out, d):
    """Source power in watts required to deliver ``p_out`` watts at distance ``d``.

    Raises ValueError for ``p_out < m`` (negative source power) or a
    negative distance.
    """
    p_out = np.asarray(p_out, dtype=float)
    d = np.asarray(d, dtype=float)
    _check_distance(d)
    if not np.all(np.isfinite(p_out)):
        raise ValueError("output power must be finite")
    if np.any(p_out < params.m):
        raise ValueError(f"output power must be >= m = {params.m} W")
    return _scalar_or_array((p_out - params.m) * params.slope_factor * _gain(params, d))


def output_power(params: LinkParams, p_s, d):
    """Output power delivered by source power ``p_s`` at distance ``d``.

    Inverse of :func:`source_power`. A result below zero means the source
    power is under the conversion threshold.
    """
    p_s = np.asarray(p_s, dtype=float)
    d = np.asarray(d, dtype=float)
    _check_distance(d)
    if not np.all(np.isfinite(p_s)) or np.any(p_s < 0.0):
        raise ValueError("source power must be finite and non-negative")
    return _scalar_or_array(params.m + p_s / (params.slope_factor * _gain(params, d)))
