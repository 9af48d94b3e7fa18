"""Multi-armed bandit demo with one recursive mean tracker per arm.

Policy: at round ``j`` explore with probability ``j**-beta`` by pulling an arm
chosen uniformly at random, and feed its reward to that arm's tracker;
otherwise pull the arm with the largest current estimate (lowest index on
ties) and leave every tracker untouched. Regret is measured with the arm
means (pseudo-regret).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import alphas
from .model import MeanProfile, SamplingSchedule
from .sequence import RewardFamily

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class BanditConfig:
    arms: tuple[MeanProfile, ...]
    beta: float
    delta: float
    seed: int = 0
    family: RewardFamily = RewardFamily()
    gamma: float = 0.5  # only used to report delays against t**gamma

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 1:
            raise ValueError("need at least one arm")
        if len({a.horizon for a in self.arms}) != 1:
            raise ValueError("all arms must share the same horizon")
        if not 0 < self.beta < 1 or not 0 < self.delta < 1:
            raise ValueError("beta and delta must lie in (0, 1)")

    @property
    def horizon(self) -> int:
        return self.arms[0].horizon

    @property
    def k(self) -> int:
        return len(self.arms)

    def mean_matrix(self) -> np.ndarray:
        """``(t, K)`` array of arm means per round."""
        return np.column_stack([a.mean_sequence() for a in self.arms])

    def to_dict(self) -> dict:
        return {
            "arms": [a.to_dict() for a in self.arms],
            "beta": self.beta,
            "delta": self.delta,
            "seed": self.seed,
            "family": self.family.to_dict(),
            "gamma": self.gamma,
        }


@dataclass(frozen=True, eq=False)
class BanditTrace:
    """Per-round record; ``greedy`` is the argmax of the estimates before the round."""

    chosen: np.ndarray
    explored: np.ndarray
    reward: np.ndarray
    greedy: np.ndarray
    estimates: np.ndarray  # (t, K), after the round's update
    best: np.ndarray
    regret: np.ndarray

    @property
    def cumregret(self) -> np.ndarray:
        return np.cumsum(self.regret)


def _streams(seed: int, k: int):
    ss = np.random.SeedSequence(int(seed) & _MASK64)
    children = ss.spawn(k + 1)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def run_bandit(cfg: BanditConfig) -> BanditTrace:
    t, k = cfg.horizon, cfg.k
    means = cfg.mean_matrix()
    *arm_rngs, policy_rng = _streams(cfg.seed, k)
    rewards = np.column_stack([cfg.family.draw(r, means[:, a]) for a, r in enumerate(arm_rngs)])
    explored = policy_rng.random(t) < SamplingSchedule(cfg.beta).probabilities(t)
    pick = policy_rng.integers(0, k, size=t)

    # Each arm sees at most t samples, so one alpha table serves all counters.
    a_tab = alphas(t, cfg.delta).tolist()
    est = [0.0] * k
    count = [0] * k
    greedy_arm = 0
    chosen = np.empty(t, dtype=np.int64)
    greedy = np.empty(t, dtype=np.int64)
    estimates = np.empty((t, k))
    rew = rewards.tolist()
    for j, (ex, p) in enumerate(zip(explored.tolist(), pick.tolist())):
        greedy[j] = greedy_arm
        if ex:
            arm = p
            a = a_tab[count[arm]]
            count[arm] += 1
            est[arm] = a * est[arm] + (1.0 - a) * rew[j][arm]
            greedy_arm = max(range(k), key=lambda i: (est[i], -i))
        else:
            arm = greedy_arm
        chosen[j] = arm
        estimates[j] = est
    best = np.argmax(means, axis=1)  # first maximum on ties
    rounds = np.arange(t)
    regret = means[rounds, best] - means[rounds, chosen]
    return BanditTrace(chosen, explored, rewards[rounds, chosen], greedy, estimates, best, regret)


def exploration_regret_floor(cfg: BanditConfig) -> float:
    """``sum_j eps_j * mean_a(best_j - m_a(j))``: expected regret of uniform exploration alone."""
    means = cfg.mean_matrix()
    gap = (means.max(axis=1, keepdims=True) - means).mean(axis=1)
    return float(SamplingSchedule(cfg.beta).probabilities(cfg.horizon) @ gap)


@dataclass(frozen=True)
class LatchRecord:
    round: int  # 1-based transition round
    old_best: int
    new_best: int
    delay: int | None  # None if the greedy choice never settles within the epoch


def _change_rounds(arms) -> list[int]:
    t = arms[0].horizon
    return sorted({s for a in arms for s in a.transitions[1:-1] if s < t})


def latch_delay(trace: BanditTrace, arms) -> list[LatchRecord]:
    """Rounds from each transition until the greedy choice matches the new best arm for good.

    "For good" means through the end of the epoch, i.e. the round before the
    next transition of any arm (or the horizon).
    """
    arms = tuple(arms)
    t = arms[0].horizon
    changes = _change_rounds(arms)
    ends = changes[1:] + [t + 1]
    out = []
    for s, end in zip(changes, ends):
        old, new = int(trace.best[s - 2]), int(trace.best[s - 1])
        if old == new:
            out.append(LatchRecord(s, old, new, 0))
            continue
        seg = trace.greedy[s - 1 : end - 1]
        wrong = np.flatnonzero(seg != new)
        if wrong.size == 0:
            delay = 0
        elif wrong[-1] == seg.size - 1:
            delay = None
        else:
            delay = int(wrong[-1]) + 1
        out.append(LatchRecord(s, old, new, delay))
    return out


def write_bandit_csv(trace: BanditTrace, fh) -> None:
    k = trace.estimates.shape[1]
    fh.write(",".join(["round", "chosen", "explored", "reward", "best", "regret", "cumregret"]
                      + [f"estimate_{a}" for a in range(k)]) + "\n")
    cols = zip(trace.chosen.tolist(), trace.explored.tolist(), trace.reward.tolist(),
               trace.best.tolist(), trace.regret.tolist(), trace.cumregret.tolist(),
               trace.estimates.tolist())
    for j, (c, e, r, b, g, cg, est) in enumerate(cols, start=1):
        tail = ",".join(f"{v:.17g}" for v in est)
        fh.write(f"{j},{c},{int(e)},{r:.17g},{b},{g:.17g},{cg:.17g},{tail}\n")
