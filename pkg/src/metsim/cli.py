"""Command-line entry point: ``metsim <command> [options]``.

Commands write CSV to stdout (or to ``<out-dir>/<command>.csv`` when
``--out-dir`` is given); ``simulate`` always writes ``runs.csv`` and
``aggregate.csv`` into the output directory.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import battery as bat
from . import config as cfg
from . import link
from .schemes import ALL_SCHEMES, SchemeKind
from .simulator import ConfigError, monte_carlo, trace_rows

EXIT_USAGE = 2
EXIT_IO = 3

RUNS_HEADER = ["run_id", "scheme", "start_time_h", "period_count", "energy_wh"]
AGGREGATE_HEADER = ["scheme", "runs", "mean_energy_wh", "std_energy_wh", "arbc_savings_pct"]


class UsageError(Exception):
    pass


def fmt6(x: float) -> str:
    """Simulation output: 6 significant digits."""
    return f"{x:.6g}"


def fmt_curve(x: float) -> str:
    # Curve tables carry enough digits for exact affine/second-difference checks.
    return f"{x:.12g}"


def _label(x: float) -> str:
    return f"{x:g}"


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected comma-separated finite numbers, got {text!r}")
    return values


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _grid(stop: float, step: float) -> np.ndarray:
    """0, step, 2 step, ... up to ``stop`` inclusive (to rounding)."""
    if not (math.isfinite(step) and step > 0.0):
        raise UsageError("step must be positive")
    if not (math.isfinite(stop) and stop >= 0.0):
        raise UsageError("range end must be non-negative")
    count = math.floor(stop / step + 1e-9) + 1
    return step * np.arange(count)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands, each returning CSV text


def link_curve(config, pout_list, d_max, d_step) -> str:
    if any(p < 0.0 for p in pout_list):
        raise UsageError("output powers must be non-negative")
    distances = _grid(d_max, d_step)
    columns = [link.source_power(config.link, p, distances) for p in pout_list]
    header = ["d_m"] + [f"ps_w_pout_{_label(p)}" for p in pout_list]
    rows = (
        [fmt_curve(d)] + [fmt_curve(col[i]) for col in columns] for i, d in enumerate(distances)
    )
    return _csv_text(header, rows)


def source_vs_output(config, d_list, pout_max, pout_step) -> str:
    if any(d < 0.0 for d in d_list):
        raise UsageError("distances must be non-negative")
    powers = _grid(pout_max, pout_step)
    columns = [link.source_power(config.link, powers, d) for d in d_list]
    header = ["po_w"] + [f"ps_w_d_{_label(d)}" for d in d_list]
    rows = ([fmt_curve(p)] + [fmt_curve(col[i]) for col in columns] for i, p in enumerate(powers))
    return _csv_text(header, rows)


def profile(config, t_step) -> str:
    p = config.battery
    if not (math.isfinite(t_step) and t_step > 0.0):
        raise UsageError("t-step must be positive")
    t = t_step * np.arange(math.ceil(p.t_end / t_step - 1e-9))
    t = t[t < p.t_end]
    cols = (bat.current_at(p, t), bat.voltage_at(p, t), bat.preferred_power(p, t))
    rows = ([fmt_curve(ti)] + [fmt_curve(c[i]) for c in cols] for i, ti in enumerate(t))
    return _csv_text(["t_h", "i_a", "v_v", "po_w"], rows)


def trace(config) -> str:
    header = ["t_h", "d_m"] + [f"ps_{k.value}_w" for k in ALL_SCHEMES]
    rows = (
        [fmt_curve(t), fmt_curve(d)] + [fmt_curve(ps[k]) for k in ALL_SCHEMES]
        for t, d, ps in trace_rows(config)
    )
    return _csv_text(header, rows)


def simulate(config, workers=1) -> tuple[str, str]:
    records, stats = monte_carlo(config, workers=workers)
    runs = _csv_text(
        RUNS_HEADER,
        (
            [str(r.run_id), r.scheme.value, fmt6(r.start_time), str(r.period_count), fmt6(r.energy)]
            for r in records
        ),
    )
    rows = []
    for kind, s in stats.per_scheme.items():
        saving = "" if kind is SchemeKind.ARBC or kind not in stats.savings else fmt6(stats.savings[kind])
        rows.append([kind.value, str(s.runs), fmt6(s.mean_energy), fmt6(s.std_energy), saving])
    return runs, _csv_text(AGGREGATE_HEADER, rows)


# ---------------------------------------------------------------------------
# argument parsing


def _common(suppress: bool) -> argparse.ArgumentParser:
    default = argparse.SUPPRESS if suppress else None
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", default=default, help="JSON configuration file")
    parser.add_argument("--seed", type=_u64, default=default, help="master seed (unsigned 64-bit)")
    parser.add_argument("--out-dir", default=default, help="directory for CSV output")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metsim",
        description="Mobile resonant beam charging simulator.",
        parents=[_common(suppress=False)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_common(suppress=True)]

    p = sub.add_parser("link-curve", parents=common, help="source power vs distance")
    p.add_argument("--pout", type=_float_list, default=[1.0, 3.0, 5.0], help="output powers, W")
    p.add_argument("--d-max", type=float, default=None, help="largest distance, m")
    p.add_argument("--d-step", type=float, default=0.1, help="distance step, m")

    p = sub.add_parser("source-vs-output", parents=common, help="source power vs output power")
    p.add_argument("--d", dest="d_list", type=_float_list, default=[1.0, 3.0, 5.0], help="distances, m")
    p.add_argument("--pout-max", type=float, default=6.0, help="largest output power, W")
    p.add_argument("--pout-step", type=float, default=0.5, help="output power step, W")

    p = sub.add_parser("profile", parents=common, help="battery charging profile")
    p.add_argument("--t-step", type=float, default=0.01, help="time step, h")

    sub.add_parser("trace", parents=common, help="per-step source power of one sampled procedure")

    p = sub.add_parser("simulate", parents=common, help="Monte Carlo energy comparison")
    p.add_argument("--runs", type=int, default=None, help="number of procedures")
    p.add_argument("--workers", type=int, default=1, help="worker processes (output is unchanged)")
    return parser


def _emit(text: str, out_dir, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = cfg.load(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if getattr(args, "runs", None) is not None:
            overrides["runs"] = args.runs
        config = replace(config, **overrides).checked()

        if args.command == "link-curve":
            d_max = config.coverage.d_max if args.d_max is None else args.d_max
            _emit(link_curve(config, args.pout, d_max, args.d_step), args.out_dir, "link_curve.csv")
        elif args.command == "source-vs-output":
            text = source_vs_output(config, args.d_list, args.pout_max, args.pout_step)
            _emit(text, args.out_dir, "source_vs_output.csv")
        elif args.command == "profile":
            _emit(profile(config, args.t_step), args.out_dir, "profile.csv")
        elif args.command == "trace":
            _emit(trace(config), args.out_dir, "trace.csv")
        elif args.command == "simulate":
            if args.workers < 1:
                raise UsageError("workers must be at least 1")
            runs_csv, aggregate_csv = simulate(config, workers=args.workers)
            out = Path(args.out_dir or ".")
            out.mkdir(parents=True, exist_ok=True)
            (out / "runs.csv").write_text(runs_csv)
            (out / "aggregate.csv").write_text(aggregate_csv)
            sys.stdout.write(aggregate_csv)
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"metsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except OSError as exc:
        print(f"metsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
