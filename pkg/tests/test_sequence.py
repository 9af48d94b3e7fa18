import math

import numpy as np
import pytest

from pstrack import MeanProfile, RewardFamily, SamplePath, SamplingSchedule, count_samples_upto, generate_path
from pstrack.sequence import sampling_count_diagnostic, window_count_diagnostic, write_path_csv


def test_constant_family():
    p = MeanProfile(500, (1, 500), (0.4,))
    path = generate_path(p, SamplingSchedule(0.5), RewardFamily("constant"), 3)
    assert np.all(path.rewards == 0.4)


def test_tiny_beta_samples_everything():
    p = MeanProfile(5000, (1, 5000), (0.4,))
    path = generate_path(p, SamplingSchedule(1e-9), RewardFamily(), 0)
    assert path.w >= 4999


def test_times_match_flags():
    p = MeanProfile(2000, (1, 1000, 2000), (0.3, 0.8))
    path = generate_path(p, SamplingSchedule(0.3), RewardFamily(), 11)
    assert np.array_equal(path.times, np.flatnonzero(path.flags) + 1)
    assert path.w == path.flags.sum()
    assert np.array_equal(path.sampled, path.rewards[path.flags])
    assert np.all(np.diff(path.times) > 0)


def test_expected_sample_count():
    # oracle: exact sum of j**-0.1 and the Bernoulli variance, E[w] = 35135.97
    t, beta = 10**5, 0.1
    eps = np.arange(1, t + 1, dtype=float) ** -beta
    mean, sd = eps.sum(), math.sqrt((eps * (1 - eps)).sum())
    assert mean == pytest.approx(35135.97, abs=0.01)
    p = MeanProfile(t, (1, t), (0.5,))
    sched = SamplingSchedule(beta)
    ws = np.array([generate_path(p, sched, RewardFamily("constant"), s).w for s in range(100)])
    assert abs(ws.mean() - mean) <= 3 * sd / 10  # average of 100 seeds within 3 standard errors
    assert np.mean(np.abs(ws - mean) <= 3 * sd) >= 0.95


def test_determinism():
    p = MeanProfile(3000, (1, 1500, 3000), (0.3, 0.8))
    args = (p, SamplingSchedule(0.2), RewardFamily("beta", 3.0))
    assert generate_path(*args, 99) == generate_path(*args, 99)


def test_neighbouring_seeds_differ():
    p = MeanProfile(100, (1, 100), (0.5,))
    a = generate_path(p, SamplingSchedule(0.2), RewardFamily(), 5)
    b = generate_path(p, SamplingSchedule(0.2), RewardFamily(), 6)
    assert not np.array_equal(a.rewards, b.rewards)


@pytest.mark.parametrize("family", [RewardFamily("bernoulli"), RewardFamily("beta", 2.0), RewardFamily("beta", 20.0)])
def test_epoch_means(family):
    p = MeanProfile(40000, (1, 20001, 40000), (0.2, 0.75))
    path = generate_path(p, SamplingSchedule(0.5), family, 7)
    for k, (lo, hi) in enumerate([(0, 20000), (20000, 40000)]):
        x = path.rewards[lo:hi]
        m = p.means[k]
        assert np.all((x >= 0) & (x <= 1))
        assert abs(x.mean() - m) <= 4 * math.sqrt(m * (1 - m) / x.size)


def test_beta_family_mean_one_is_point_mass():
    p = MeanProfile(100, (1, 100), (1.0,))
    path = generate_path(p, SamplingSchedule(0.5), RewardFamily("beta", 2.0), 1)
    assert np.all(path.rewards == 1.0)


def test_count_samples_upto():
    flags = np.ones(30, dtype=bool)
    path = SamplePath.from_arrays(np.full(30, 0.5), flags)
    assert count_samples_upto(path, 17) == 17
    assert count_samples_upto(path, 30) == path.w
    with pytest.raises(ValueError):
        count_samples_upto(path, 0)
    with pytest.raises(ValueError):
        count_samples_upto(path, 31)


def test_diagnostic_saturated_path():
    # #E(r) = r against 4 r**0.5 / 0.5 = 8 sqrt(r): fails for r > 64, i.e. everywhere from r_min
    t = 10**4
    path = SamplePath.from_arrays(np.zeros(t), np.ones(t, dtype=bool))
    d = sampling_count_diagnostic(path, 0.5)
    assert d.r_min == math.ceil(math.log(t) ** 4)
    assert d.r_min > 64
    assert d.upper_violations.size == t - d.r_min + 1
    assert d.lower_violations.size == 0
    assert not d.ok


def test_diagnostic_empty_path():
    t = 10**4
    path = SamplePath.from_arrays(np.zeros(t), np.zeros(t, dtype=bool))
    d = sampling_count_diagnostic(path, 0.1)
    assert d.lower_violations.size == t - d.r_min + 1


def test_diagnostic_honest_path():
    p = MeanProfile(10**5, (1, 10**5), (0.5,))
    path = generate_path(p, SamplingSchedule(0.1), RewardFamily("constant"), 1)
    d = sampling_count_diagnostic(path, 0.1)
    assert d.ok
    assert 0.25 < d.min_ratio <= d.max_ratio < 4 / 0.9


def test_window_counts(desk_profile):
    path = generate_path(desk_profile, SamplingSchedule(0.1), RewardFamily("constant"), 2)
    d = window_count_diagnostic(path, desk_profile, 0.5, 0.1)
    assert d.counts.shape == (4,)
    assert np.all(d.expected >= d.reference)
    assert d.min_ratio > 0.5


def test_path_csv(tmp_path):
    path = SamplePath.from_arrays([0.25, 1.0, 0.0], [True, False, True])
    with open(tmp_path / "p.csv", "w", newline="") as fh:
        write_path_csv(path, fh)
    assert (tmp_path / "p.csv").read_text() == "j,X_j,Z_j\n1,0.25,1\n2,1,0\n3,0,1\n"
