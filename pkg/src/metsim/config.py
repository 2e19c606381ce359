"""JSON configuration document.

Every section and key is optional; an empty document ``{}`` reproduces the
default prototype setup. Unknown keys are rejected. Lengths are in meters
(the link's ``r``, ``lambda`` and ``l`` included), powers in watts, times
in hours.

    {
      "link":     {"m": -3.5017, "n": 0.0795, "f": 0.88,
                   "r": 0.0015, "lambda": 1.064e-06, "l": 0.065},
      "battery":  {"a_i": 3.4, ..., "t_cc": 1.2, "t_end": 3.6,
                   "i_cc": 1.0, "v_cv": 4.2},
      "coverage": {"d_max": 10.0, "h_max": 3.0},
      "mobility": {"period_min": 0.2, "period_max": 0.6,
                   "sampler": "uniform_distance"},
      "sim":      {"dt": 0.001, "runs": 1000, "seed": 0,
                   "schemes": ["cpc", "pac", "dac", "arbc"]}
    }
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from .battery import ChargeProfileParams
from .coverage import ConeCoverage, MobilityParams, Sampler
from .link import LinkParams
from .schemes import SchemeKind
from .simulator import ConfigError, SimConfig

_LINK_KEYS = {"m": "m", "n": "n", "f": "f", "r": "r", "lambda": "lam", "l": "l"}
_SECTIONS = ("link", "battery", "coverage", "mobility", "sim")


def _number(section: str, key: str, value, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _section(doc: dict, name: str) -> dict:
    section = doc.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"{name} must be a JSON object")
    return section


def _reject_unknown(name: str, section: dict, allowed) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(unknown)}")


def from_dict(doc: dict) -> SimConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _reject_unknown("configuration", doc, _SECTIONS)

    raw = _section(doc, "link")
    _reject_unknown("link", raw, _LINK_KEYS)
    link = LinkParams(**{_LINK_KEYS[k]: _number("link", k, v) for k, v in raw.items()})

    raw = _section(doc, "battery")
    battery_keys = [f.name for f in dataclasses.fields(ChargeProfileParams)]
    _reject_unknown("battery", raw, battery_keys)
    battery = ChargeProfileParams(**{k: _number("battery", k, v) for k, v in raw.items()})

    raw = _section(doc, "coverage")
    _reject_unknown("coverage", raw, ("d_max", "h_max"))
    coverage = ConeCoverage(**{k: _number("coverage", k, v) for k, v in raw.items()})

    raw = dict(_section(doc, "mobility"))
    _reject_unknown("mobility", raw, ("period_min", "period_max", "sampler"))
    kwargs = {k: _number("mobility", k, v) for k, v in raw.items() if k != "sampler"}
    if "sampler" in raw:
        try:
            kwargs["sampler"] = Sampler(str(raw["sampler"]).lower())
        except ValueError:
            raise ConfigError(
                f"mobility.sampler must be one of {', '.join(s.value for s in Sampler)}"
            ) from None
    mobility = MobilityParams(**kwargs)

    raw = _section(doc, "sim")
    _reject_unknown("sim", raw, ("dt", "runs", "seed", "schemes"))
    kwargs = {}
    if "dt" in raw:
        kwargs["dt"] = _number("sim", "dt", raw["dt"])
    for key in ("runs", "seed"):
        if key in raw:
            kwargs[key] = _number("sim", key, raw[key], integer=True)
    if "schemes" in raw:
        names = raw["schemes"]
        if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
            raise ConfigError("sim.schemes must be a list of scheme names")
        try:
            kwargs["schemes"] = tuple(SchemeKind.parse(s) for s in names)
        except ValueError as exc:
            raise ConfigError(f"sim.schemes: {exc}") from None

    config = SimConfig(link=link, battery=battery, coverage=coverage, mobility=mobility, **kwargs)
    return config.checked()


def load(path: str | Path | None) -> SimConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return SimConfig().checked()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return from_dict(doc)
