"""Closed-form deviation bounds and Monte Carlo dominance checks.

All composite expressions hold only up to the unknown constants, which are
passed in explicitly and default to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EXPONENTS = ("gamma-beta-2b", "gamma(1-beta)-2b")


class DomainError(ValueError):
    """A bound was requested outside the range in which it is stated."""


@dataclass(frozen=True)
class BoundReport:
    value: float
    inputs: dict

    @property
    def vacuous(self) -> bool:
        return self.value >= 1.0


def chernoff_bound(eps: float, mean_sum: float) -> BoundReport:
    """``P(|S - ES| >= eps ES) <= 2 exp(-eps**2 ES / 4)`` for Bernoulli sums, ``0 < eps <= 1/2``."""
    if not (0.0 < eps <= 0.5):
        raise DomainError(f"Chernoff form holds for 0 < eps <= 1/2, got eps={eps}")
    if not mean_sum > 0:
        raise DomainError(f"mean_sum must be positive, got {mean_sum}")
    return BoundReport(2.0 * math.exp(-eps * eps * mean_sum / 4.0), {"eps": eps, "mean_sum": mean_sum})


def azuma_bound(eps: float, ev: float, lambda_sq_sum: float) -> BoundReport:
    """``P(|V - EV| >= eps EV) <= 2 exp(-eps**2 EV**2 / sum lambda_j**2)`` for weighted [0,1] sums."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if not ev > 0:
        raise DomainError(f"ev must be positive, got {ev}")
    if not lambda_sq_sum > 0:
        raise DomainError(f"lambda_sq_sum must be positive, got {lambda_sq_sum}")
    value = 2.0 * math.exp(-eps * eps * ev * ev / lambda_sq_sum)
    return BoundReport(value, {"eps": eps, "ev": ev, "lambda_sq_sum": lambda_sq_sum})


def tracking_bound(nu: float, square_sum: float, mu0: float, t: int, b: float) -> BoundReport:
    """Weighted-sum bound applied to ``Y_l``: relative tolerance ``t**-b`` with mean floor ``mu0``.

    Gives ``2 exp(-mu0**2 t**(-2b) nu**2 / sum theta**2)``; it dominates the
    plain form whenever ``mu0 <= 1``.
    """
    eps = mu0 * t**-b
    report = azuma_bound(eps, nu, square_sum)
    return BoundReport(report.value, {**report.inputs, "mu0": mu0, "t": t, "b": b})


@dataclass(frozen=True)
class SuccessBound:
    raw: float

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, self.raw))


def known_transitions_success(
    t: float,
    beta: float,
    gamma: float,
    b: float,
    constants=(1.0, 1.0, 1.0),
    exponent: str = "gamma-beta-2b",
) -> SuccessBound:
    """``1 - t e^{-C2 t^{γ−β}} - e^{-C3 t^{1−β}} - 2t e^{-C14 t^{e}}`` with ``constants = (C2, C3, C14)``.

    ``C14`` stands for the product ``C1 C4``. ``exponent`` selects
    ``e = γ−β−2b`` or ``e = γ(1−β)−2b``; the two published forms disagree.
    """
    if exponent not in EXPONENTS:
        raise ValueError(f"exponent must be one of {EXPONENTS}")
    c2, c3, c14 = (float(c) for c in constants)
    if min(c2, c3, c14) <= 0:
        raise ValueError("constants must be positive")
    e = gamma - beta - 2 * b if exponent == EXPONENTS[0] else gamma * (1 - beta) - 2 * b
    raw = (
        1.0
        - t * math.exp(-c2 * t ** (gamma - beta))
        - math.exp(-c3 * t ** (1 - beta))
        - 2 * t * math.exp(-c14 * t**e)
    )
    return SuccessBound(raw)


@dataclass(frozen=True)
class SumSpec:
    """Independent summands ``U_j`` in [0, 1] with optional positive weights.

    ``kind`` is ``bernoulli`` (``params`` are success probabilities),
    ``uniform`` (``params`` ignored, mean 1/2) or ``beta`` (``params`` are means,
    shape ``concentration``). Without ``weights`` the sum is the plain count
    and the Chernoff form applies; with weights the weighted form applies.
    """

    kind: str
    params: tuple[float, ...]
    weights: tuple[float, ...] | None = None
    concentration: float = 2.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("bernoulli", "uniform", "beta"):
            raise ValueError(f"unknown summand kind {self.kind!r}")
        if self.weights is not None and len(self.weights) != len(self.params):
            raise ValueError("weights and params must have equal length")
        if self.weights is None and self.kind != "bernoulli":
            raise ValueError("unweighted sums are defined for Bernoulli summands only")

    @property
    def means(self) -> np.ndarray:
        if self.kind == "uniform":
            return np.full(len(self.params), 0.5)
        return np.asarray(self.params, dtype=float)

    @property
    def lam(self) -> np.ndarray:
        return np.ones(len(self.params)) if self.weights is None else np.asarray(self.weights, float)

    @property
    def expected(self) -> float:
        return float(self.lam @ self.means)

    def bound(self, eps: float) -> BoundReport:
        if self.weights is None:
            return chernoff_bound(eps, self.expected)
        return azuma_bound(eps, self.expected, float(self.lam @ self.lam))

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` realizations of the weighted sum."""
        shape = (n, len(self.params))
        if self.kind == "bernoulli":
            u = rng.random(shape) < self.means
        elif self.kind == "uniform":
            u = rng.random(shape)
        else:
            m = self.means
            u = rng.beta(self.concentration * m, self.concentration * (1 - m), size=shape)
        return u @ self.lam


@dataclass(frozen=True)
class DominanceResult:
    empirical: float
    bound: BoundReport
    trials: int
    stderr: float

    @property
    def passed(self) -> bool:
        return self.empirical <= self.bound.value + 3.0 * self.stderr


def empirical_tail_vs_bound(spec: SumSpec, eps: float, trials: int, seed: int,
                            batch: int = 20000) -> DominanceResult:
    """Estimate ``P(|S - ES| >= eps ES)`` and compare it with the closed form."""
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    bound = spec.bound(eps)
    rng = np.random.default_rng(seed)
    es = spec.expected
    hits = 0
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        s = spec.draw(rng, n)
        hits += int(np.count_nonzero(np.abs(s - es) >= eps * es))
        done += n
    p = hits / trials
    return DominanceResult(p, bound, trials, math.sqrt(p * (1 - p) / trials))


def write_bounds_csv(rows, fh) -> None:
    """Rows are dicts from :func:`bound_rows`; ``error`` marks out-of-domain requests."""
    cols = ["kind", "eps", "mean_sum", "ev", "lambda_sq_sum", "t", "beta", "gamma", "b",
            "exponent", "constants", "bound", "raw", "vacuous", "error"]
    fh.write(",".join(cols) + "\n")
    for r in rows:
        out = []
        for c in cols:
            v = r.get(c, "")
            if isinstance(v, bool):
                v = int(v)
            elif isinstance(v, float):
                v = f"{v:.17g}"
            v = str(v)
            if any(ch in v for ch in ',"\n'):
                v = '"' + v.replace('"', '""') + '"'
            out.append(v)
        fh.write(",".join(out) + "\n")


def bound_rows(chernoff=(), azuma=(), success=(), constants=(1.0, 1.0, 1.0)):
    """Evaluate requested bounds, turning domain errors into row markers."""
    rows = []
    for eps, mean_sum in chernoff:
        row = {"kind": "chernoff", "eps": eps, "mean_sum": mean_sum}
        try:
            rep = chernoff_bound(eps, mean_sum)
            row.update(bound=rep.value, vacuous=rep.vacuous)
        except DomainError as e:
            row["error"] = f"domain: {e}"
        rows.append(row)
    for eps, ev, lsq in azuma:
        row = {"kind": "azuma", "eps": eps, "ev": ev, "lambda_sq_sum": lsq}
        try:
            rep = azuma_bound(eps, ev, lsq)
            row.update(bound=rep.value, vacuous=rep.vacuous)
        except DomainError as e:
            row["error"] = f"domain: {e}"
        rows.append(row)
    for t, beta, gamma, b, exponent in success:
        row = {"kind": "known_transitions_success", "t": t, "beta": beta, "gamma": gamma, "b": b,
               "exponent": exponent, "constants": ";".join(f"{c:.17g}" for c in constants)}
        try:
            rep = known_transitions_success(t, beta, gamma, b, constants, exponent)
            row.update(bound=rep.clamped, raw=rep.raw, vacuous=False)
        except (ValueError, OverflowError) as e:
            row["error"] = f"domain: {e}"
        rows.append(row)
    return rows
