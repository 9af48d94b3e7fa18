"""Command-line entry point.

Exit codes: 0 success, 2 configuration or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .bandit import exploration_regret_floor, latch_delay, run_bandit, write_bandit_csv
from .bounds import EXPONENTS, bound_rows, write_bounds_csv
from .config import ConfigFormatError, load, parse_bandit, parse_experiment
from .estimators import write_trace_csv
from .harness import (
    ConfigError,
    check_good_event,
    instantiate,
    run_estimator,
    run_monte_carlo,
    summary_row,
    sweep,
    trial_seed,
    write_summary_csv,
    write_trials_csv,
)
from .model import SamplingSchedule
from .sequence import GENERATOR, generate_path, write_path_csv

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class _Outputs:
    """Collects output files so the manifest can record their digests."""

    def __init__(self, out: Path):
        self.out = out
        self.digests: dict[str, str] = {}

    def write(self, name: str, writer) -> None:
        buf = io.StringIO(newline="")
        writer(buf)
        data = buf.getvalue().encode("utf-8")
        (self.out / name).write_bytes(data)
        self.digests[name] = hashlib.sha256(data).hexdigest()

    def write_json(self, name: str, obj) -> None:
        self.write(name, lambda fh: fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n"))

    def manifest(self, command: str, config: dict, seed: int, started: str, extra=None) -> None:
        doc = {
            "tool": "pstrack",
            "version": __version__,
            "command": command,
            "config": config,
            "seed": seed,
            "generator": GENERATOR,
            "started": started,
            "finished": _now(),
            "outputs": dict(sorted(self.digests.items())),
        }
        if extra:
            doc.update(extra)
        (self.out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _experiment(args):
    cfg = parse_experiment(load(args.config))
    if getattr(args, "trials", None) is not None:
        cfg = replace(cfg, trials=args.trials)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def cmd_simulate(args) -> int:
    started = _now()
    cfg = _experiment(args)
    cfg.require_valid()
    seed = trial_seed(cfg.seed, 0)
    path = generate_path(cfg.profile, SamplingSchedule(cfg.params.beta), cfg.family, seed)
    if path.w == 0:
        print("path has no sampling times", file=sys.stderr)
        return EXIT_CONFIG
    trace = run_estimator(cfg, path)
    report = check_good_event(trace, cfg.profile, cfg.params)
    outs = _Outputs(_outdir(args.out))
    outs.write("trace.csv", lambda fh: write_trace_csv(trace, cfg.profile, fh))
    outs.write_json("good_event.json", report.to_dict())
    if args.debug_path:
        outs.write("path.csv", lambda fh: write_path_csv(path, fh))
    outs.manifest("simulate", cfg.to_dict(), cfg.seed, started, {"path_seed": seed})
    print(f"good={report.good} w={report.w} max_rel_dev={list(report.max_rel_dev)}")
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigFormatError(f"--values: {e}") from e


def cmd_mc(args) -> int:
    started = _now()
    cfg = _experiment(args)
    outs = _Outputs(_outdir(args.out))
    if args.axis:
        if not args.values:
            raise ConfigFormatError("--axis needs --values")
        points = sweep(cfg, args.axis, _parse_values(args.values))
        rows, timing = [], []
        for i, pt in enumerate(points):
            point_cfg = instantiate(cfg, args.axis, pt.value)
            rows.append(summary_row(pt.summary, point_cfg, args.axis, f"{pt.value:.17g}", pt.skipped))
            timing.append(None if pt.summary is None else pt.summary.wallclock_ms)
            if args.per_trial and pt.summary is not None:
                outs.write(f"trials_{i}.csv", lambda fh, s=pt.summary: write_trials_csv(s, fh))
    else:
        summary = run_monte_carlo(cfg)
        rows, timing = [summary_row(summary, cfg)], [summary.wallclock_ms]
        if args.per_trial:
            outs.write("trials.csv", lambda fh: write_trials_csv(summary, fh))
    outs.write("summary.csv", lambda fh: write_summary_csv(rows, fh))
    outs.manifest("mc", cfg.to_dict(), cfg.seed, started,
                  {"axis": args.axis, "values": args.values, "wallclock_ms": timing})
    sys.stdout.write(Path(args.out, "summary.csv").read_text())
    return EXIT_OK


def _split(spec: str, n: int, flag: str, last_str=False):
    parts = spec.split(":")
    if len(parts) != n and not (last_str and len(parts) == n - 1):
        raise ConfigFormatError(f"{flag} expects {n} colon-separated fields, got {spec!r}")
    try:
        if last_str:
            head = [float(p) for p in parts[: n - 1]]
            return (*head, parts[n - 1] if len(parts) == n else EXPONENTS[0])
        return tuple(float(p) for p in parts)
    except ValueError as e:
        raise ConfigFormatError(f"{flag}: {e}") from e


def cmd_bounds(args) -> int:
    started = _now()
    try:
        constants = tuple(float(c) for c in args.constants.split(","))
    except ValueError as e:
        raise ConfigFormatError(f"--constants: {e}") from e
    if len(constants) != 3:
        raise ConfigFormatError("--constants expects three values C2,C3,C1C4")
    rows = bound_rows(
        chernoff=[_split(s, 2, "--chernoff") for s in args.chernoff],
        azuma=[_split(s, 3, "--azuma") for s in args.azuma],
        success=[_split(s, 5, "--success", last_str=True) for s in args.success],
        constants=constants,
    )
    buf = io.StringIO(newline="")
    write_bounds_csv(rows, buf)
    sys.stdout.write(buf.getvalue())
    if args.out:
        outs = _Outputs(_outdir(args.out))
        outs.write("bounds.csv", lambda fh: write_bounds_csv(rows, fh))
        config = {"chernoff": args.chernoff, "azuma": args.azuma, "success": args.success,
                  "constants": list(constants)}
        outs.manifest("bounds", config, 0, started, {"note": "bounds hold up to constants"})
    return EXIT_OK


def cmd_bandit(args) -> int:
    started = _now()
    doc = load(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = parse_bandit(doc)
    trace = run_bandit(cfg)
    delays = latch_delay(trace, cfg.arms)
    floor = exploration_regret_floor(cfg)
    limit = cfg.horizon**cfg.gamma
    report = {
        "transitions": [
            {"round": d.round, "old_best": d.old_best, "new_best": d.new_best, "delay": d.delay,
             "within_t_gamma": d.delay is not None and d.delay <= limit}
            for d in delays
        ],
        "t_gamma": limit,
        "cumulative_regret": float(trace.cumregret[-1]),
        "exploration_floor": floor,
        "regret_ratio": float(trace.cumregret[-1] / floor) if floor > 0 else None,
    }
    outs = _Outputs(_outdir(args.out))
    outs.write("bandit.csv", lambda fh: write_bandit_csv(trace, fh))
    outs.write_json("latch.json", report)
    outs.manifest("bandit", {**cfg.to_dict()}, cfg.seed, started)
    print(json.dumps(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pstrack", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pstrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=False):
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the master seed")
        if trials:
            p.add_argument("--trials", type=int, help="override the trial count")

    p = sub.add_parser("simulate", help="one path, one estimator, trace CSV")
    common(p)
    p.add_argument("--debug-path", action="store_true", help="also dump the full path CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="Monte Carlo estimate of the good-event probability")
    common(p, trials=True)
    p.add_argument("--axis", choices=["t", "delta", "beta", "b"], help="sweep axis")
    p.add_argument("--values", help="comma-separated sweep values, e.g. 1e4,1e5")
    p.add_argument("--per-trial", action="store_true", help="emit per-trial CSV")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("bounds", help="evaluate deviation bounds")
    p.add_argument("--chernoff", action="append", default=[], metavar="EPS:MEAN_SUM")
    p.add_argument("--azuma", action="append", default=[], metavar="EPS:EV:LAMBDA_SQ_SUM")
    p.add_argument("--success", action="append", default=[], metavar="T:BETA:GAMMA:B[:EXPONENT]",
                   help=f"known-transition success expression; EXPONENT in {EXPONENTS}")
    p.add_argument("--constants", default="1,1,1", help="C2,C3,C1C4 (default 1,1,1)")
    p.add_argument("--out", help="also write bounds.csv and a manifest here")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("bandit", help="multi-armed bandit demo")
    common(p)
    p.set_defaults(func=cmd_bandit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print("config invalid: violated " + "; ".join(str(v) for v in e.result.violations),
              file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigFormatError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
