"""Mean-tracking estimators: the known-transition block average and the recursive
weighted running average, with the weight expansion behind the latter."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import MeanProfile
from .sequence import SamplePath

# Above this many factors, products of alpha are summed in log space.
LOG_PRODUCT_THRESHOLD = 1000


class EmptyWindowWarning(UserWarning):
    """An oracle collection window held no sampling times."""


def _check_delta(delta: float) -> None:
    if not (math.isfinite(delta) and 0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def alpha(l: int, delta: float) -> float:
    """``1 - l**-delta``; exactly 0 at ``l = 1``."""
    _check_delta(delta)
    if l < 1:
        raise ValueError(f"sample index must be >= 1, got {l}")
    return 1.0 - l**-delta


_ALPHA_TABLES: dict[float, tuple[np.ndarray, np.ndarray]] = {}

# Suffix products below exp(UNDERFLOW_LOG) are set to 0 instead of being carried into subnormals.
UNDERFLOW_LOG = -690.0


def _tables(n: int, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """``alpha`` table and cumulative ``log alpha_2 + ... + log alpha_j`` (0 at ``j = 1``)."""
    delta = float(delta)
    tables = _ALPHA_TABLES.get(delta)
    have = 0 if tables is None else tables[0].size
    if n > have:
        size = max(n, 2 * have)
        tail = np.array([1.0 - j**-delta for j in range(have + 1, size + 1)])
        a = tail if tables is None else np.concatenate([tables[0], tail])
        logs = np.log(a[1:])
        logcum = np.concatenate([[0.0], np.cumsum(logs)])
        for arr in (a, logcum):
            arr.setflags(write=False)
        if len(_ALPHA_TABLES) >= 16:
            _ALPHA_TABLES.clear()
        tables = _ALPHA_TABLES[delta] = (a, logcum)
    return tables


def alphas(n: int, delta: float) -> np.ndarray:
    """``alpha(1..n)`` as a read-only array, elementwise identical to :func:`alpha`.

    Entries use scalar pow (numpy's vector pow may differ by an ulp) and are
    kept in one growing table per ``delta``.
    """
    _check_delta(delta)
    return _tables(n, delta)[0][:n]


def recursive_update(prev: float, l: int, x: float, delta: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"observation must lie in [0, 1], got {x}")
    a = alpha(l, delta)
    return a * prev + (1.0 - a) * x


def _fold(values, a, initial: float) -> np.ndarray:
    out = []
    y = initial
    for ai, x in zip(a, values):
        y = ai * y + (1.0 - ai) * x
        out.append(y)
    return np.asarray(out, dtype=float)


def fold_recursive(values, delta: float, initial: float = 0.0) -> np.ndarray:
    """``Y_1..Y_n`` for observations ``values`` starting from ``Y_0 = initial``."""
    values = np.asarray(values, dtype=float)
    return _fold(values.tolist(), alphas(values.size, delta).tolist(), initial)


@dataclass(frozen=True, eq=False)
class TrackingTrace:
    """Estimates aligned to sampling times; ``epochs`` are 1-based."""

    estimator: str
    params: dict
    times: np.ndarray
    estimates: np.ndarray
    epochs: np.ndarray
    in_warmup: np.ndarray
    horizon: int
    empty_windows: tuple[int, ...] = field(default=())

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.times.size + 1)

    def __len__(self) -> int:
        return int(self.times.size)


def _annotate(times: np.ndarray, profile: MeanProfile, gamma: float):
    epochs = profile.epoch_of(times)
    starts = np.asarray(profile.transitions)[epochs - 1]
    return epochs, times < starts + profile.horizon**gamma


def run_recursive(
    path: SamplePath,
    delta: float,
    profile: MeanProfile,
    gamma: float,
    initial: float = 0.0,
) -> TrackingTrace:
    """Fold the recursive update over ``X_{T(1)}, ..., X_{T(w)}``.

    ``profile`` and ``gamma`` only label entries with their epoch and warmup
    status; the estimates never see them.
    """
    if path.w == 0:
        raise ValueError("path has no sampling times")
    estimates = fold_recursive(path.sampled, delta, initial)
    epochs, warm = _annotate(path.times, profile, gamma)
    return TrackingTrace("recursive", {"delta": delta, "gamma": gamma}, path.times, estimates,
                         epochs, warm, profile.horizon)


def run_oracle(path: SamplePath, profile: MeanProfile, gamma: float) -> TrackingTrace:
    """Average the samples in ``[s_k, s_k + t**gamma)`` and report it for the rest of epoch k.

    Warmup entries are 0. An epoch whose window holds no samples also reports 0
    after warmup; its index is listed in ``empty_windows`` and a warning is issued.
    """
    times, x = path.times, path.sampled
    epochs, warm = _annotate(times, profile, gamma)
    estimates = np.zeros(times.size)
    width = profile.horizon**gamma
    empty = []
    for k, sk in enumerate(profile.transitions[:-1], start=1):
        lo = np.searchsorted(times, sk, side="left")
        hi = np.searchsorted(times, sk + width, side="left")
        post = (epochs == k) & ~warm
        if hi > lo:
            estimates[post] = x[lo:hi].mean()
        else:
            empty.append(k)
    if empty:
        warnings.warn(f"empty oracle window in epochs {empty}", EmptyWindowWarning, stacklevel=2)
    return TrackingTrace("oracle", {"gamma": gamma}, times, estimates, epochs, warm,
                         profile.horizon, tuple(empty))


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Coefficients ``theta_{j,l}``, ``j = 1..l``, with ``Y_l = sum_j theta_{j,l} W_j``."""

    l: int
    delta: float
    weights: np.ndarray


def expand_weights(l: int, delta: float) -> WeightVector:
    """Backward pass: ``theta_{j,l} = (1 - alpha_j) * prod_{i=j+1}^{l} alpha_i``.

    Weights whose product would fall below ``exp(UNDERFLOW_LOG)`` are exactly 0.
    """
    if l < 1:
        raise ValueError(f"sample index must be >= 1, got {l}")
    a = alphas(l, delta)
    _, logcum = _tables(l, delta)
    # suffix[j] = a[j+1] * ... * a[l-1] (0-based), accumulated from the newest sample backwards;
    # entries with log-suffix below UNDERFLOW_LOG stay 0
    first = max(1, int(np.searchsorted(-logcum[:l], -(logcum[l - 1] - UNDERFLOW_LOG), side="right")))
    first = min(first, l)
    suffix = np.zeros(l)
    suffix[l - 1] = 1.0
    suffix[first - 1 : l - 1] = np.cumprod(a[l - 1 : first - 1 : -1])[::-1]
    theta = (1.0 - a) * suffix
    theta.setflags(write=False)
    return WeightVector(l, delta, theta)


def weight_square_sum(l: int, delta: float) -> float:
    w = expand_weights(l, delta).weights
    return float(w @ w)


def weight_square_sums(n: int, delta: float) -> np.ndarray:
    """``sum_j theta_{j,l}**2`` for ``l = 1..n`` via ``S_l = alpha_l**2 S_{l-1} + (1-alpha_l)**2``."""
    a = alphas(n, delta).tolist()
    out = np.empty(n)
    s = 0.0
    for i, ai in enumerate(a):
        s = ai * ai * s + (1.0 - ai) ** 2
        out[i] = s
    return out


def weight_square_bound(l, delta: float) -> np.ndarray:
    """Envelope ``5 (log l)**2 / l**delta``."""
    l = np.asarray(l, dtype=float)
    return 5.0 * np.log(l) ** 2 / l**delta


def alpha_product(u: int, l: int, delta: float) -> float:
    """``prod_{j=u+1}^{l} alpha_j``; 1 for an empty product.

    Long products are accumulated as a sum of ``log1p(-j**-delta)`` so the
    result stays accurate down to the subnormal range.
    """
    if u < 0 or l < u:
        raise ValueError("need 0 <= u <= l")
    _check_delta(delta)
    if l == u:
        return 1.0
    if u == 0:
        return 0.0  # alpha_1 == 0
    j = np.arange(u + 1, l + 1, dtype=float)
    if l - u > LOG_PRODUCT_THRESHOLD:
        return math.exp(float(np.log1p(-(j**-delta)).sum()))
    return float(np.prod(1.0 - j**-delta))


def log_alpha_product(u: int, l: int, delta: float) -> float:
    if u == 0 and l > 0:
        return -math.inf
    if l == u:
        return 0.0
    j = np.arange(u + 1, l + 1, dtype=float)
    return float(np.log1p(-(j**-delta)).sum())


def expected_trace(times, profile: MeanProfile, delta: float) -> np.ndarray:
    """``nu_l = E[Y_l | sampling times] = sum_j theta_{j,l} m(epoch of T(j))``.

    Folding the recursion over the epoch means gives the same weighted sum in
    O(w) operations.
    """
    times = np.asarray(times)
    if times.size and (times.min() < 1 or times.max() > profile.horizon):
        raise ValueError("sampling times fall outside the profile horizon")
    return fold_recursive(profile.mean_at(times), delta)


def write_trace_csv(trace: TrackingTrace, profile: MeanProfile, fh) -> None:
    """Trace CSV: ``l, T_l, estimate, epoch, m_k, abs_dev, rel_dev, in_warmup``."""
    means = np.asarray(profile.means)[trace.epochs - 1]
    dev = np.abs(trace.estimates - means)
    fh.write("l,T_l,estimate,epoch,m_k,abs_dev,rel_dev,in_warmup\n")
    rows = zip(trace.indices.tolist(), trace.times.tolist(), trace.estimates.tolist(),
               trace.epochs.tolist(), means.tolist(), dev.tolist(), (dev / means).tolist(),
               trace.in_warmup.tolist())
    for l, tl, est, k, mk, ad, rd, warm in rows:
        fh.write(f"{l},{tl},{est:.17g},{k},{mk:.17g},{ad:.17g},{rd:.17g},{int(warm)}\n")
