"""Two-stage (CC then CV) Li-ion charging profile.

Current and voltage follow a fitted double exponential on the stage where
they are not held constant::

    I(t) = i_cc                          0 <= t < t_cc
           a_i e^{b_i t} + c_i e^{d_i t}  t_cc <= t < t_end
    V(t) = a_v e^{b_v t} + c_v e^{d_v t}  0 <= t < t_cc
           v_cv                          t_cc <= t < t_end

Time is in hours, so charge comes out in ampere-hours and the preferred
power ``I * V`` integrates to watt-hours.

The current fit overshoots ``i_cc`` by about 0.8 mA right at ``t_cc`` and
only drops back below it about 1e-4 h later. The CV-stage current is capped
at ``i_cc`` so the profile never asks for more than the CC/CV corner power
``i_cc * v_cv``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import cached_property

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class ChargeProfileParams:
    a_i: float = 3.4
    b_i: float = -1.263
    c_i: float = 1.873e13
    d_i: float = -26.61
    a_v: float = 168.4
    b_v: float = -0.2903
    c_v: float = -165.9
    d_v: float = -0.3078
    t_cc: float = 1.2
    t_end: float = 3.6
    i_cc: float = 1.0
    v_cv: float = 4.2

    def validate(self) -> list[str]:
        return validate(self)

    @cached_property
    def cap_release_time(self) -> float:
        """First time in the CV stage from which the fitted current is below ``i_cc``."""
        return _cap_release_time(self)

    @cached_property
    def total_charge(self) -> float:
        return float(_charge(self, np.asarray(self.t_end)))


@dataclass(frozen=True)
class ChargeState:
    """Position along the profile. ``soc`` is kept consistent with ``t``."""

    t: float
    soc: float

    @classmethod
    def at_time(cls, params: ChargeProfileParams, t: float) -> "ChargeState":
        return cls(t=t, soc=soc_at(params, t))

    def completed(self, params: ChargeProfileParams) -> bool:
        return self.t >= params.t_end


def validate(params: ChargeProfileParams) -> list[str]:
    problems = []
    for field in fields(params):
        value = getattr(params, field.name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            problems.append(f"{field.name} must be a finite number")
    if problems:
        return problems
    if not 0.0 < params.t_cc < params.t_end:
        problems.append("t_cc and t_end must satisfy 0 < t_cc < t_end")
    if params.i_cc <= 0.0:
        problems.append("i_cc must be positive")
    if params.v_cv <= 0.0:
        problems.append("v_cv must be positive")
    if problems:
        return problems
    i_jump = abs(_fit_current(params, params.t_cc) - params.i_cc)
    v_jump = abs(_fit_voltage(params, params.t_cc) - params.v_cv)
    if i_jump > 0.01:
        problems.append(f"current is discontinuous at t_cc by {i_jump:.4g} A (> 0.01 A)")
    if v_jump > 0.05:
        problems.append(f"voltage is discontinuous at t_cc by {v_jump:.4g} V (> 0.05 V)")
    lo = min(_fit_current(params, params.t_end), params.i_cc)
    if not lo > 0.0:
        problems.append("CV-stage current must stay positive")
    if not _fit_voltage(params, 0.0) > 0.0:
        problems.append("CC-stage voltage must stay positive")
    return problems


def _fit_current(p: ChargeProfileParams, t):
    return p.a_i * np.exp(p.b_i * t) + p.c_i * np.exp(p.d_i * t)


def _fit_voltage(p: ChargeProfileParams, t):
    return p.a_v * np.exp(p.b_v * t) + p.c_v * np.exp(p.d_v * t)


def _cap_release_time(p: ChargeProfileParams) -> float:
    excess = lambda t: float(_fit_current(p, t)) - p.i_cc  # noqa: E731
    if excess(p.t_cc) <= 0.0:
        return p.t_cc
    if excess(p.t_end) >= 0.0:
        return p.t_end
    # The fit is a sum of two exponentials, so it crosses i_cc at most twice;
    # scan for the first sign change before refining.
    grid = np.linspace(p.t_cc, p.t_end, 4097)
    vals = _fit_current(p, grid) - p.i_cc
    k = int(np.argmax(vals < 0.0))
    return brentq(excess, grid[k - 1], grid[k], xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _check_open(p: ChargeProfileParams, t: np.ndarray) -> None:
    if not np.all(np.isfinite(t)) or np.any(t < 0.0) or np.any(t >= p.t_end):
        raise ValueError(f"profile time must lie in [0, {p.t_end}) h")


def _check_closed(p: ChargeProfileParams, t: np.ndarray) -> None:
    if not np.all(np.isfinite(t)) or np.any(t < 0.0) or np.any(t > p.t_end):
        raise ValueError(f"profile time must lie in [0, {p.t_end}] h")


def _out(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


def stage_current(p: ChargeProfileParams, t, cv_stage):
    """Current on an explicitly chosen stage, no domain checks.

    Lets integrators evaluate a stage at its closing endpoint (the left
    limit) so the integrand stays continuous within a step.
    """
    return np.where(cv_stage, np.minimum(_fit_current(p, t), p.i_cc), p.i_cc)


def stage_voltage(p: ChargeProfileParams, t, cv_stage):
    return np.where(cv_stage, p.v_cv, _fit_voltage(p, t))


def stage_power(p: ChargeProfileParams, t, cv_stage):
    return stage_current(p, t, cv_stage) * stage_voltage(p, t, cv_stage)


def current_at(params: ChargeProfileParams, t):
    """Charging current in amperes at profile time ``t`` hours."""
    t = np.asarray(t, dtype=float)
    _check_open(params, t)
    return _out(stage_current(params, t, t >= params.t_cc))


def voltage_at(params: ChargeProfileParams, t):
    """Charging voltage in volts at profile time ``t`` hours."""
    t = np.asarray(t, dtype=float)
    _check_open(params, t)
    return _out(stage_voltage(params, t, t >= params.t_cc))


def preferred_power(params: ChargeProfileParams, t):
    """Battery-preferred charging power ``I(t) * V(t)`` in watts."""
    t = np.asarray(t, dtype=float)
    _check_open(params, t)
    return _out(stage_power(params, t, t >= params.t_cc))


def _stationary_points(a, b, c, d, lo, hi):
    # Roots of a b e^{bt} + c d e^{dt} = 0 inside (lo, hi).
    if b == d or a * b == 0.0 or c * d == 0.0:
        return []
    ratio = -(a * b) / (c * d)
    if ratio <= 0.0:
        return []
    t = math.log(ratio) / (d - b)
    return [t] if lo < t < hi else []


def peak_power(params: ChargeProfileParams) -> float:
    """Maximum preferred power over [0, t_end), from the stage extrema.

    With the default profile this is the CC/CV corner ``i_cc * v_cv``.
    """
    p = params
    v_candidates = [0.0, p.t_cc] + _stationary_points(p.a_v, p.b_v, p.c_v, p.d_v, 0.0, p.t_cc)
    cc_peak = p.i_cc * max(float(_fit_voltage(p, t)) for t in v_candidates)
    i_candidates = [p.t_cc, p.t_end] + _stationary_points(
        p.a_i, p.b_i, p.c_i, p.d_i, p.t_cc, p.t_end
    )
    cv_peak = p.v_cv * min(p.i_cc, max(float(_fit_current(p, t)) for t in i_candidates))
    return max(cc_peak, cv_peak)


def _charge(p: ChargeProfileParams, t: np.ndarray):
    release = p.cap_release_time
    flat = p.i_cc * np.minimum(t, release)
    tt = np.maximum(t, release)
    fitted = p.a_i / p.b_i * (np.exp(p.b_i * tt) - np.exp(p.b_i * release)) + p.c_i / p.d_i * (
        np.exp(p.d_i * tt) - np.exp(p.d_i * release)
    )
    return flat + fitted


def cumulative_charge(params: ChargeProfileParams, t):
    """Charge delivered from profile start to ``t`` hours, in ampere-hours."""
    t = np.asarray(t, dtype=float)
    _check_closed(params, t)
    return _out(_charge(params, t))


def soc_at(params: ChargeProfileParams, t):
    """State of charge as the fraction of the profile's total delivered charge."""
    t = np.asarray(t, dtype=float)
    _check_closed(params, t)
    return _out(_charge(params, t) / params.total_charge)


def time_from_soc(params: ChargeProfileParams, s: float) -> float:
    """Profile time in hours at which the state of charge reaches ``s``."""
    if not (math.isfinite(s) and 0.0 <= s <= 1.0):
        raise ValueError("state of charge must lie in [0, 1]")
    if s == 0.0:
        return 0.0
    if s == 1.0:
        return params.t_end
    target = s * params.total_charge
    return brentq(
        lambda t: float(_charge(params, np.asarray(t))) - target,
        0.0,
        params.t_end,
        xtol=1e-12,
    )
