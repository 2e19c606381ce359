"""Mobile energy transfer simulator for adaptive resonant beam charging."""

from .battery import ChargeProfileParams, ChargeState
from .coverage import ConeCoverage, MobilityParams, Position, Sampler, Trajectory
from .link import LinkParams
from .schemes import SchemeKind
from .simulator import AggregateStats, ConfigError, RunRecord, SimConfig, monte_carlo

__all__ = [
    "AggregateStats",
    "ChargeProfileParams",
    "ChargeState",
    "ConeCoverage",
    "ConfigError",
    "LinkParams",
    "MobilityParams",
    "Position",
    "RunRecord",
    "Sampler",
    "SchemeKind",
    "SimConfig",
    "Trajectory",
    "monte_carlo",
]
