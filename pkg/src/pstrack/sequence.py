"""Seeded generation of piecewise stationary rewards and Bernoulli exploration flags.

Randomness comes from numpy's PCG64. A path seed is expanded with
``SeedSequence(seed)``; the reward stream uses child ``spawn_key=(0,)`` and the
exploration stream child ``spawn_key=(1,)``, so the two sequences are
independent of each other and reproducible from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import MeanProfile, SamplingSchedule

GENERATOR = "numpy.PCG64; SeedSequence(seed) children spawn_key=(0,) rewards, (1,) exploration"

# Rewards for every round are kept up to this horizon; beyond it only the
# sampled rewards are retained and generation proceeds chunk by chunk.
MATERIALIZE_LIMIT = 10**7
_CHUNK = 10**6

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RewardFamily:
    """Distribution of ``X_j`` given its epoch mean ``m``.

    ``bernoulli``: Bernoulli(m). ``beta``: Beta(κm, κ(1−m)). ``constant``: X_j = m.
    """

    kind: str = "bernoulli"
    concentration: float = 2.0

    KINDS = ("bernoulli", "beta", "constant")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown reward family {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "beta" and not (math.isfinite(self.concentration) and self.concentration > 0):
            raise ValueError("beta family needs a positive concentration")

    def draw(self, rng: np.random.Generator, means: np.ndarray) -> np.ndarray:
        means = np.asarray(means, dtype=float)
        if self.kind == "constant":
            return means.copy()
        if self.kind == "bernoulli":
            return (rng.random(means.shape) < means).astype(float)
        a = self.concentration * means
        b = self.concentration * (1.0 - means)
        out = np.empty_like(means)
        degenerate = b <= 0.0  # m == 1 has a point mass at 1
        out[degenerate] = 1.0
        ok = ~degenerate
        out[ok] = rng.beta(a[ok], b[ok])
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "beta":
            d["concentration"] = self.concentration
        return d


@dataclass(frozen=True, eq=False)
class SamplePath:
    """One realization: rewards ``X``, flags ``Z`` and sampling times ``T(1) < ... < T(w)``.

    ``rewards`` is ``None`` when the horizon exceeds ``MATERIALIZE_LIMIT``;
    ``sampled`` always holds ``X_{T(l)}``.
    """

    horizon: int
    flags: np.ndarray
    times: np.ndarray
    sampled: np.ndarray
    rewards: np.ndarray | None
    seed: int

    @classmethod
    def from_arrays(cls, rewards, flags, seed: int = 0) -> SamplePath:
        rewards = np.asarray(rewards, dtype=float)
        flags = np.asarray(flags, dtype=bool)
        if rewards.shape != flags.shape or rewards.ndim != 1:
            raise ValueError("rewards and flags must be 1-d arrays of equal length")
        if np.any((rewards < 0) | (rewards > 1)):
            raise ValueError("rewards must lie in [0, 1]")
        times = np.flatnonzero(flags) + 1
        return cls._frozen(len(flags), flags, times, rewards[flags], rewards, seed)

    @classmethod
    def _frozen(cls, horizon, flags, times, sampled, rewards, seed):
        for a in (flags, times, sampled, rewards):
            if a is not None:
                a.setflags(write=False)
        return cls(int(horizon), flags, times, sampled, rewards, int(seed))

    @property
    def w(self) -> int:
        return int(self.times.size)

    def __eq__(self, other):
        if not isinstance(other, SamplePath):
            return NotImplemented
        same_rewards = (self.rewards is None and other.rewards is None) or (
            self.rewards is not None
            and other.rewards is not None
            and np.array_equal(self.rewards, other.rewards)
        )
        return (
            self.horizon == other.horizon
            and self.seed == other.seed
            and np.array_equal(self.flags, other.flags)
            and np.array_equal(self.sampled, other.sampled)
            and same_rewards
        )

    __hash__ = None


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    ss = np.random.SeedSequence(int(seed) & _MASK64)
    x_ss, z_ss = ss.spawn(2)
    return np.random.Generator(np.random.PCG64(x_ss)), np.random.Generator(np.random.PCG64(z_ss))


def draw_flags(rng: np.random.Generator, schedule: SamplingSchedule, t: int) -> np.ndarray:
    return rng.random(t) < schedule.probabilities(t)


def generate_path(
    profile: MeanProfile,
    schedule: SamplingSchedule,
    family: RewardFamily,
    seed: int,
) -> SamplePath:
    """Draw ``X_1..X_t`` and ``Z_1..Z_t`` for ``profile``; fully determined by ``seed``."""
    t = profile.horizon
    x_rng, z_rng = _streams(seed)
    flags = draw_flags(z_rng, schedule, t)
    means = profile.mean_sequence()
    if t <= MATERIALIZE_LIMIT:
        rewards = family.draw(x_rng, means)
        return SamplePath._frozen(t, flags, np.flatnonzero(flags) + 1, rewards[flags], rewards, seed)
    parts = []
    for start in range(0, t, _CHUNK):
        stop = min(start + _CHUNK, t)
        chunk = family.draw(x_rng, means[start:stop])
        parts.append(chunk[flags[start:stop]])
    return SamplePath._frozen(t, flags, np.flatnonzero(flags) + 1, np.concatenate(parts), None, seed)


def count_samples_upto(path: SamplePath, r: int) -> int:
    """``#{l : T(l) <= r}`` for ``1 <= r <= t``."""
    if not 1 <= r <= path.horizon:
        raise ValueError(f"r must lie in [1, {path.horizon}], got {r}")
    return int(np.searchsorted(path.times, r, side="right"))


@dataclass(frozen=True)
class SamplingDiagnostic:
    """Outcome of the window check ``r**(1−β)/4 <= #E(r) <= 4 r**(1−β)/(1−β)``."""

    beta: float
    r_min: int
    r_max: int
    lower_violations: np.ndarray
    upper_violations: np.ndarray
    min_ratio: float
    max_ratio: float

    @property
    def violations(self) -> np.ndarray:
        return np.union1d(self.lower_violations, self.upper_violations)

    @property
    def ok(self) -> bool:
        return self.lower_violations.size == 0 and self.upper_violations.size == 0


def sampling_count_diagnostic(path: SamplePath, beta: float) -> SamplingDiagnostic:
    """Check the count envelope for every integer ``r >= (log t)**(2/(1−β))``.

    Ratios are ``#E(r) / r**(1−β)``.
    """
    t = path.horizon
    r_min = max(1, math.ceil(math.log(t) ** (2.0 / (1.0 - beta))))
    if r_min > t:
        empty = np.empty(0, dtype=np.int64)
        return SamplingDiagnostic(beta, r_min, t, empty, empty, math.nan, math.nan)
    counts = np.cumsum(path.flags, dtype=np.int64)[r_min - 1 :]
    r = np.arange(r_min, t + 1)
    scale = np.exp((1.0 - beta) * np.log(r))
    lower = r[counts < scale / 4.0]
    upper = r[counts > 4.0 * scale / (1.0 - beta)]
    ratio = counts / scale
    return SamplingDiagnostic(beta, r_min, t, lower, upper, float(ratio.min()), float(ratio.max()))


@dataclass(frozen=True)
class WindowCountDiagnostic:
    """Sample counts inside each warmup window ``[s_k, s_k + t**γ)`` against ``t**(γ−β)``."""

    counts: np.ndarray
    expected: np.ndarray
    reference: float

    @property
    def min_ratio(self) -> float:
        return float((self.counts / self.reference).min())


def window_count_diagnostic(path: SamplePath, profile: MeanProfile, gamma: float, beta: float):
    t = profile.horizon
    width = t**gamma
    schedule = SamplingSchedule(beta)
    counts, expected = [], []
    for sk in profile.transitions[:-1]:
        hi = sk + width  # window is [sk, hi)
        last = min(math.ceil(hi) - 1, t)
        counts.append(np.searchsorted(path.times, hi, side="left") - np.searchsorted(path.times, sk))
        expected.append(schedule.expected_count(sk, last))
    return WindowCountDiagnostic(np.asarray(counts), np.asarray(expected), t ** (gamma - beta))


def write_path_csv(path: SamplePath, fh) -> None:
    """Debug dump with columns ``j, X_j, Z_j``; needs materialized rewards."""
    if path.rewards is None:
        raise ValueError("path rewards were not materialized")
    fh.write("j,X_j,Z_j\n")
    for j, (x, z) in enumerate(zip(path.rewards.tolist(), path.flags.tolist()), start=1):
        fh.write(f"{j},{x:.17g},{int(z)}\n")
