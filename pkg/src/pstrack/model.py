"""Domain types for piecewise stationary mean tracking and regime validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Constraint names reported by the validators.
BETA_LT_GAMMA = "β < γ"
GAMMA_LT_GAMMA0 = "γ < γ0"
GAMMA0_LE_ONE = "γ0 ≤ 1"
DELTA_BOUND = "δ < (γ−β)/(1−β)"
B_BOUND = "b < δγ(1−β)/2"
MU0_LE_ONE = "μ0 ≤ 1"
MIN_EPOCH = "min epoch ≥ t^{γ0}"
MIN_MEAN = "min_k m(k) ≥ μ0"


class MalformedParameterError(ValueError):
    """A parameter is non-finite or non-positive."""


class ProfileStructureError(ValueError):
    """A mean profile is not structurally well formed."""


@dataclass(frozen=True)
class Violation:
    constraint: str
    detail: str = ""
    epoch: int | None = None

    def __str__(self) -> str:
        where = f" at epoch {self.epoch}" if self.epoch is not None else ""
        extra = f" ({self.detail})" if self.detail else ""
        return f"{self.constraint}{where}{extra}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def names(self) -> list[str]:
        return [v.constraint for v in self.violations]


@dataclass(frozen=True)
class MeanProfile:
    """Transition times ``s_1 = 1 < ... < s_M = t`` and the ``M - 1`` epoch means.

    Epoch ``k`` (1-based) covers rounds ``s_k <= j < s_{k+1}``; round ``t`` itself
    belongs to the last epoch.
    """

    horizon: int
    transitions: tuple[int, ...]
    means: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(int(s) for s in self.transitions))
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        t, s, m = self.horizon, self.transitions, self.means
        if not isinstance(t, (int, np.integer)) or t < 2:
            raise ProfileStructureError(f"horizon must be an integer >= 2, got {t!r}")
        object.__setattr__(self, "horizon", int(t))
        if len(m) != len(s) - 1:
            raise ProfileStructureError(
                f"need len(means) == len(transitions) - 1, got {len(m)} and {len(s)}"
            )
        if len(s) < 2:
            raise ProfileStructureError("need at least two transition times")
        if s[0] != 1 or s[-1] != t:
            raise ProfileStructureError(f"transitions must start at 1 and end at {t}")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ProfileStructureError("transitions must be strictly increasing")
        for k, mk in enumerate(m, start=1):
            if not (math.isfinite(mk) and 0.0 < mk <= 1.0):
                raise ProfileStructureError(f"mean of epoch {k} must lie in (0, 1], got {mk}")

    @property
    def n_epochs(self) -> int:
        return len(self.means)

    def epoch_lengths(self) -> np.ndarray:
        return np.diff(np.asarray(self.transitions))

    def epoch_of(self, rounds) -> np.ndarray:
        """1-based epoch index of each round (half-open epochs, round t in the last)."""
        rounds = np.asarray(rounds)
        k = np.searchsorted(np.asarray(self.transitions), rounds, side="right")
        return np.minimum(k, self.n_epochs)

    def mean_at(self, rounds) -> np.ndarray:
        return np.asarray(self.means)[self.epoch_of(rounds) - 1]

    def mean_sequence(self) -> np.ndarray:
        """``m(k(j))`` for ``j = 1..t``."""
        return self.mean_at(np.arange(1, self.horizon + 1))

    def rescaled(self, horizon: int) -> MeanProfile:
        """Same means with transitions moved to the same fractions of a new horizon."""
        scale = horizon / self.horizon
        s = [1 + int(round((sk - 1) * scale)) for sk in self.transitions]
        s[-1] = horizon
        return MeanProfile(horizon, tuple(s), self.means)

    def shifted(self, offset: float) -> MeanProfile:
        return MeanProfile(self.horizon, self.transitions, tuple(m + offset for m in self.means))

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "transitions": list(self.transitions), "means": list(self.means)}


@dataclass(frozen=True)
class ParamSet:
    gamma0: float
    gamma: float
    beta: float
    delta: float
    b: float
    mu0: float

    def __post_init__(self):
        for name in ("gamma0", "gamma", "beta", "delta", "b", "mu0"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise MalformedParameterError(f"{name} must be a real number, got {v!r}")
            v = float(v)
            if not math.isfinite(v) or v <= 0.0:
                raise MalformedParameterError(f"{name} must be finite and positive, got {v}")
            object.__setattr__(self, name, v)

    @property
    def delta_max(self) -> float:
        return (self.gamma - self.beta) / (1.0 - self.beta)

    @property
    def b_max(self) -> float:
        return self.delta * self.gamma * (1.0 - self.beta) / 2.0

    def replace(self, **changes) -> ParamSet:
        d = self.to_dict()
        d.update(changes)
        return ParamSet(**d)

    def to_dict(self) -> dict:
        return {
            "gamma0": self.gamma0,
            "gamma": self.gamma,
            "beta": self.beta,
            "delta": self.delta,
            "b": self.b,
            "mu0": self.mu0,
        }


@dataclass(frozen=True)
class SamplingSchedule:
    """Exploration probabilities ``eps_j = j**-beta``."""

    beta: float
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.beta) and 0.0 < self.beta < 1.0):
            raise MalformedParameterError(f"beta must lie in (0, 1), got {self.beta}")

    def epsilon(self, j) -> np.ndarray | float:
        j = np.asarray(j, dtype=float)
        if np.any(j < 1):
            raise ValueError("round index must be >= 1")
        out = np.exp(-self.beta * np.log(j))
        return float(out) if out.ndim == 0 else out

    def probabilities(self, t: int) -> np.ndarray:
        """``eps_1..eps_t``; cached since Monte Carlo reuses the same horizon."""
        p = self._cache.get(t)
        if p is None:
            p = self.epsilon(np.arange(1, t + 1))
            p.setflags(write=False)
            self._cache.clear()
            self._cache[t] = p
        return p

    def expected_count(self, r1: int, r2: int) -> float:
        """``a(r1, r2) = sum_{j=r1}^{r2} j**-beta``, the mean number of samples in [r1, r2]."""
        if r2 < r1:
            return 0.0
        return float(self.epsilon(np.arange(r1, r2 + 1)).sum())


def validate_params(p: ParamSet) -> ValidationResult:
    """Check ``0 < β < γ < γ0 ≤ 1``, ``δ < (γ−β)/(1−β)``, ``b < δγ(1−β)/2``, ``μ0 ≤ 1``.

    All comparisons are strict and exact; a value on a boundary fails.
    Malformed (non-finite, non-positive) inputs are rejected when the
    ``ParamSet`` is built, so they never reach this function.
    """
    v = []
    if not p.beta < p.gamma:
        v.append(Violation(BETA_LT_GAMMA, f"β={p.beta}, γ={p.gamma}"))
    if not p.gamma < p.gamma0:
        v.append(Violation(GAMMA_LT_GAMMA0, f"γ={p.gamma}, γ0={p.gamma0}"))
    if not p.gamma0 <= 1.0:
        v.append(Violation(GAMMA0_LE_ONE, f"γ0={p.gamma0}"))
    if p.beta >= 1.0:
        # (γ−β)/(1−β) is meaningless here; β < γ ≤ 1 already failed.
        v.append(Violation(DELTA_BOUND, "β ≥ 1"))
        v.append(Violation(B_BOUND, "β ≥ 1"))
    else:
        if not p.delta < p.delta_max:
            v.append(Violation(DELTA_BOUND, f"δ={p.delta} ≥ {p.delta_max:.6g}"))
        if not p.b < p.b_max:
            v.append(Violation(B_BOUND, f"b={p.b} ≥ {p.b_max:.6g}"))
    if not p.mu0 <= 1.0:
        v.append(Violation(MU0_LE_ONE, f"μ0={p.mu0}"))
    return ValidationResult(tuple(v))


def validate_profile(profile: MeanProfile, p: ParamSet) -> ValidationResult:
    """Check the epoch-length and mean-floor conditions of ``profile`` against ``p``.

    Epoch lengths are compared as integers against the real ``t**γ0``.
    """
    v = []
    t = profile.horizon
    floor = t ** p.gamma0
    lengths = profile.epoch_lengths()
    short = np.flatnonzero(lengths < floor)
    if short.size:
        k = int(short[0]) + 1
        v.append(Violation(MIN_EPOCH, f"epoch length {int(lengths[k - 1])} < {floor:.6g}", k))
    means = np.asarray(profile.means)
    low = np.flatnonzero(means < p.mu0)
    if low.size:
        k = int(low[0]) + 1
        v.append(Violation(MIN_MEAN, f"m({k})={means[k - 1]} < μ0={p.mu0}", k))
    return ValidationResult(tuple(v))
