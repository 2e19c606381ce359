"""Source-power control policies.

Each scheme is a pair of assumptions the transmitter makes when sizing its
source power:

    ======  ===================  ==================
    scheme  output power         charging distance
    ======  ===================  ==================
    CPC     peak (constant)      d_max
    PAC     profile P_o(t)       d_max
    DAC     peak (constant)      actual d
    ARBC    profile P_o(t)       actual d
    ======  ===================  ==================
"""

from __future__ import annotations

import enum

import numpy as np

from . import battery as bat
from . import link
from .battery import ChargeProfileParams
from .coverage import ConeCoverage
from .link import LinkParams


class SchemeKind(str, enum.Enum):
    CPC = "cpc"
    PAC = "pac"
    DAC = "dac"
    ARBC = "arbc"

    @property
    def follows_profile(self) -> bool:
        return self in (SchemeKind.PAC, SchemeKind.ARBC)

    @property
    def tracks_distance(self) -> bool:
        return self in (SchemeKind.DAC, SchemeKind.ARBC)

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown scheme {name!r}; expected one of {', '.join(k.value for k in cls)}"
            ) from None


ALL_SCHEMES = tuple(SchemeKind)


def assumed_output_power(kind: SchemeKind, battery: ChargeProfileParams, t):
    if kind.follows_profile:
        return bat.preferred_power(battery, t)
    t = np.asarray(t, dtype=float)
    bat.preferred_power(battery, t)  # same domain as the profile schemes
    peak = bat.peak_power(battery)
    return peak if t.ndim == 0 else np.full(t.shape, peak)


def assumed_distance(kind: SchemeKind, cov: ConeCoverage, actual_d):
    d = np.asarray(actual_d, dtype=float)
    if np.any(~(d > 0.0)) or np.any(d > cov.d_max):
        raise ValueError(f"actual distance must lie in (0, {cov.d_max}] m")
    if kind.tracks_distance:
        return float(d) if d.ndim == 0 else d
    return cov.d_max if d.ndim == 0 else np.full(d.shape, cov.d_max)


def scheme_source_power(
    kind: SchemeKind,
    link_params: LinkParams,
    battery: ChargeProfileParams,
    cov: ConeCoverage,
    t,
    actual_d,
):
    """Source power in watts the scheme requests at profile time ``t`` and distance ``actual_d``."""
    p_out = assumed_output_power(kind, battery, t)
    d = assumed_distance(kind, cov, actual_d)
    return link.source_power(link_params, p_out, d)
