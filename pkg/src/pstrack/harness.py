"""Good-event checks and seeded Monte Carlo experiments."""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import EmptyWindowWarning, TrackingTrace, run_oracle, run_recursive
from .model import (
    MeanProfile,
    ParamSet,
    SamplingSchedule,
    ValidationResult,
    validate_params,
    validate_profile,
)
from .sequence import RewardFamily, generate_path

WILSON_Z = 1.959963984540054
ESTIMATORS = ("recursive", "oracle")
SWEEP_AXES = ("t", "delta", "beta", "b")

_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, result: ValidationResult):
        self.result = result
        super().__init__("; ".join(str(v) for v in result.violations))


def budget_threshold(t: int, beta: float) -> float:
    return 4.0 * t ** (1.0 - beta) / (1.0 - beta)


@dataclass(frozen=True)
class GoodEventReport:
    sample_budget_ok: bool
    tracking_ok: bool
    max_rel_dev: tuple[float, ...]
    first_violation: tuple[int, int] | None  # (epoch k, sample index l)
    w: int
    budget_threshold: float
    tolerance: float
    empty_windows: tuple[int, ...] = ()

    @property
    def good(self) -> bool:
        return self.sample_budget_ok and self.tracking_ok

    def to_dict(self) -> dict:
        return {
            "good": self.good,
            "sample_budget_ok": self.sample_budget_ok,
            "tracking_ok": self.tracking_ok,
            "max_rel_dev": list(self.max_rel_dev),
            "first_violation": None if self.first_violation is None
            else {"epoch": self.first_violation[0], "l": self.first_violation[1]},
            "w": self.w,
            "budget_threshold": self.budget_threshold,
            "tolerance": self.tolerance,
            "empty_windows": list(self.empty_windows),
        }


def check_good_event(trace: TrackingTrace, profile: MeanProfile, p: ParamSet) -> GoodEventReport:
    """Sample budget ``w <= 4 t^{1−β}/(1−β)`` and post-warmup tracking within ``m(k) t^{−b}``.

    Warmup labels are recomputed from ``p.gamma`` so one trace can be judged
    under several parameter sets.
    """
    t = profile.horizon
    if trace.horizon != t:
        raise ValueError(f"trace horizon {trace.horizon} does not match profile horizon {t}")
    if trace.times.size and trace.times.max() > t:
        raise ValueError("trace has sampling times beyond the profile horizon")
    epochs = profile.epoch_of(trace.times)
    starts = np.asarray(profile.transitions)[epochs - 1]
    post = trace.times >= starts + t**p.gamma
    means = np.asarray(profile.means)[epochs - 1]
    rel = np.abs(trace.estimates - means) / means
    tol = t**-p.b
    max_dev = []
    for k in range(1, profile.n_epochs + 1):
        sel = rel[post & (epochs == k)]
        max_dev.append(float(sel.max()) if sel.size else 0.0)
    bad = np.flatnonzero(post & (rel > tol))
    first = None
    if bad.size:
        i = int(bad[0])
        first = (int(epochs[i]), i + 1)
    w = len(trace)
    threshold = budget_threshold(t, p.beta)
    return GoodEventReport(w <= threshold, bad.size == 0, tuple(max_dev), first, w, threshold, tol,
                           trace.empty_windows)


def wilson_interval(good: int, n: int, z: float = WILSON_Z) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = good / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo = 0.0 if good == 0 else max(0.0, centre - half)
    hi = 1.0 if good == n else min(1.0, centre + half)
    return lo, hi


def trial_seed(master: int, i: int) -> int:
    """64-bit seed for trial ``i``: first word of ``SeedSequence(master, spawn_key=(i,))``."""
    ss = np.random.SeedSequence(int(master) & _MASK64, spawn_key=(int(i),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    profile: MeanProfile
    params: ParamSet
    family: RewardFamily = RewardFamily()
    estimator: str = "recursive"
    trials: int = 100
    seed: int = 0

    def validate(self) -> ValidationResult:
        res = validate_params(self.params)
        prof = validate_profile(self.profile, self.params)
        return ValidationResult(res.violations + prof.violations)

    def require_valid(self) -> None:
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        res = self.validate()
        if not res.ok:
            raise ConfigError(res)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.to_dict(),
            "params": self.params.to_dict(),
            "family": self.family.to_dict(),
            "estimator": self.estimator,
            "trials": self.trials,
            "seed": self.seed,
        }


def run_estimator(cfg: ExperimentConfig, path) -> TrackingTrace:
    if cfg.estimator == "oracle":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyWindowWarning)
            return run_oracle(path, cfg.profile, cfg.params.gamma)
    return run_recursive(path, cfg.params.delta, cfg.profile, cfg.params.gamma)


@dataclass(frozen=True)
class TrialResult:
    index: int
    seed: int
    report: GoodEventReport | None
    error: str | None = None

    @property
    def good(self) -> bool:
        return self.report is not None and self.report.good


def run_trial(cfg: ExperimentConfig, i: int) -> TrialResult:
    seed = trial_seed(cfg.seed, i)
    try:
        path = generate_path(cfg.profile, SamplingSchedule(cfg.params.beta), cfg.family, seed)
        if path.w == 0:
            return TrialResult(i, seed, None, "no samples")
        trace = run_estimator(cfg, path)
        return TrialResult(i, seed, check_good_event(trace, cfg.profile, cfg.params))
    except Exception as e:  # anomalies are tallied, never raised
        return TrialResult(i, seed, None, f"{type(e).__name__}: {e}")


@dataclass(frozen=True)
class MonteCarloSummary:
    config: ExperimentConfig
    trials: int
    good: int
    fail_budget: int
    fail_tracking: int
    fail_tracking_by_epoch: tuple[int, ...]
    fail_empty_window: int
    fail_error: int
    wallclock_ms: float = field(default=0.0, compare=False)
    results: tuple[TrialResult, ...] = field(default=(), compare=False, repr=False)

    @property
    def p_hat(self) -> float:
        return self.good / self.trials if self.trials else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.good, self.trials)


def _summarize(cfg: ExperimentConfig, results, elapsed_ms: float) -> MonteCarloSummary:
    n_epochs = cfg.profile.n_epochs
    by_epoch = [0] * n_epochs
    budget = tracking = empty = errors = good = 0
    for r in results:
        if r.report is None:
            errors += 1
            continue
        rep = r.report
        good += rep.good
        budget += not rep.sample_budget_ok
        empty += bool(rep.empty_windows)
        if not rep.tracking_ok:
            tracking += 1
            tol = rep.tolerance
            for k, dev in enumerate(rep.max_rel_dev):
                if dev > tol:
                    by_epoch[k] += 1
    return MonteCarloSummary(cfg, len(results), good, budget, tracking, tuple(by_epoch), empty,
                             errors, elapsed_ms, tuple(results))


def _run_chunk(args):
    cfg, indices = args
    return [run_trial(cfg, i) for i in indices]


def default_workers() -> int:
    env = os.environ.get("TRACKER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_monte_carlo(cfg: ExperimentConfig, workers: int | None = None) -> MonteCarloSummary:
    """Run ``cfg.trials`` independent trials; results do not depend on ``workers``."""
    cfg.require_valid()
    workers = default_workers() if workers is None else max(1, workers)
    start = time.perf_counter()
    if workers == 1 or cfg.trials < 2:
        results = [run_trial(cfg, i) for i in range(cfg.trials)]
    else:
        chunks = [(cfg, list(range(i, cfg.trials, workers))) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_run_chunk, chunks) for r in part]
        results.sort(key=lambda r: r.index)
    return _summarize(cfg, results, (time.perf_counter() - start) * 1e3)


@dataclass(frozen=True)
class SweepPoint:
    axis: str
    value: float
    summary: MonteCarloSummary | None
    skipped: ValidationResult | None = None


def instantiate(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "t":
        return replace(cfg, profile=cfg.profile.rescaled(int(round(float(value)))))
    if axis in ("delta", "beta", "b"):
        return replace(cfg, params=cfg.params.replace(**{axis: float(value)}))
    raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")


def sweep(cfg: ExperimentConfig, axis: str, values, workers: int | None = None) -> list[SweepPoint]:
    """One summary per value, all sharing ``cfg.seed``; invalid points are skipped.

    Along ``t`` the transitions keep their fractional positions in the horizon.
    """
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    out = []
    for v in values:
        point = instantiate(cfg, axis, v)
        res = point.validate()
        if not res.ok:
            out.append(SweepPoint(axis, float(v), None, res))
            continue
        out.append(SweepPoint(axis, float(v), run_monte_carlo(point, workers)))
    return out


SUMMARY_COLUMNS = [
    "axis", "value", "horizon", "transitions", "means", "gamma0", "gamma", "beta", "delta", "b",
    "mu0", "family", "estimator", "seed", "trials", "good", "p_hat", "ci_lo", "ci_hi",
    "fail_budget", "fail_tracking", "fail_tracking_by_epoch", "fail_empty_window", "fail_error",
    "skipped",
]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def summary_row(summary: MonteCarloSummary | None, cfg: ExperimentConfig, axis="", value="",
                skipped: ValidationResult | None = None) -> list[str]:
    p = cfg.params
    base = [axis, value, cfg.profile.horizon, ";".join(map(str, cfg.profile.transitions)),
            ";".join(_fmt(m) for m in cfg.profile.means), p.gamma0, p.gamma, p.beta, p.delta, p.b,
            p.mu0, cfg.family.kind, cfg.estimator, cfg.seed]
    if summary is None:
        stats = [cfg.trials, "", "", "", "", "", "", "", "", "",
                 "; ".join(str(v) for v in skipped.violations) if skipped is not None else "invalid"]
    else:
        lo, hi = summary.ci
        stats = [summary.trials, summary.good, summary.p_hat, lo, hi, summary.fail_budget,
                 summary.fail_tracking, ";".join(map(str, summary.fail_tracking_by_epoch)),
                 summary.fail_empty_window, summary.fail_error, ""]
    return [_fmt(v) for v in base + stats]


def _csv_line(fields) -> str:
    out = []
    for v in fields:
        if any(ch in v for ch in ',"\n'):
            v = '"' + v.replace('"', '""') + '"'
        out.append(v)
    return ",".join(out) + "\n"


def write_summary_csv(rows, fh) -> None:
    """Wall-clock time is left out so that reruns are byte-identical; it goes in the manifest."""
    fh.write(_csv_line(SUMMARY_COLUMNS))
    for r in rows:
        fh.write(_csv_line(r))


def write_trials_csv(summary: MonteCarloSummary, fh) -> None:
    n = summary.config.profile.n_epochs
    cols = ["trial", "seed", "w", "good", "sample_budget_ok", "tracking_ok", "first_violation_epoch",
            "first_violation_l", "empty_windows", "error"] + [f"max_rel_dev_{k}" for k in range(1, n + 1)]
    fh.write(_csv_line(cols))
    for r in summary.results:
        rep = r.report
        if rep is None:
            row = [r.index, r.seed, "", 0, "", "", "", "", "", r.error] + [""] * n
        else:
            fv = rep.first_violation or ("", "")
            row = [r.index, r.seed, rep.w, rep.good, rep.sample_budget_ok, rep.tracking_ok, fv[0],
                   fv[1], ";".join(map(str, rep.empty_windows)), ""] + list(rep.max_rel_dev)
        fh.write(_csv_line([_fmt(v) for v in row]))
