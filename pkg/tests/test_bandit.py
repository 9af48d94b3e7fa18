import numpy as np
import pytest

from pstrack import BanditConfig, MeanProfile, RewardFamily, latch_delay, run_bandit
from pstrack.bandit import exploration_regret_floor, write_bandit_csv
from pstrack.estimators import alpha_product

CONST = RewardFamily("constant")


def crossing(t=20000, hi=0.9, lo=0.1, split=None):
    s = split or t // 2 + 1
    return (MeanProfile(t, (1, s, t), (hi, lo)), MeanProfile(t, (1, s, t), (lo, hi)))


def test_determinism():
    cfg = BanditConfig(crossing(), 0.2, 0.4, seed=3)
    a, b = run_bandit(cfg), run_bandit(cfg)
    assert np.array_equal(a.chosen, b.chosen)
    assert np.array_equal(a.estimates, b.estimates)


def test_single_arm_has_no_regret():
    cfg = BanditConfig((MeanProfile(5000, (1, 2000, 5000), (0.3, 0.8)),), 0.2, 0.4, seed=1)
    tr = run_bandit(cfg)
    assert np.all(tr.regret == 0)


def test_stationary_regret_from_exploration_only():
    t = 20000
    arms = (MeanProfile(t, (1, t), (0.9,)), MeanProfile(t, (1, t), (0.1,)))
    cfg = BanditConfig(arms, 0.2, 0.4, seed=4, family=CONST)
    tr = run_bandit(cfg)
    first = int(np.flatnonzero(tr.explored & (tr.chosen == 0))[0])
    burned = np.arange(t) > first
    assert np.all(tr.greedy[burned] == 0)
    assert np.all(tr.regret[burned & ~tr.explored] == 0)
    floor = exploration_regret_floor(cfg)  # sum_j eps_j * 0.4
    eps = np.arange(1, t + 1, dtype=float) ** -0.2
    assert floor == pytest.approx(0.4 * eps.sum())
    sd = 0.8 * np.sqrt((eps / 2 * (1 - eps / 2)).sum())
    assert abs(tr.cumregret[-1] - floor) <= 4 * sd + 0.8 * (first + 1)


def test_regret_invariants():
    tr = run_bandit(BanditConfig(crossing(), 0.2, 0.4, seed=5))
    assert np.all(np.diff(tr.cumregret) >= 0)
    assert np.all(tr.regret[tr.chosen == tr.best] == 0)


def test_latch_matches_closed_form():
    t = 40000
    s = t // 2 + 1
    arms = crossing(t)
    cfg = BanditConfig(arms, 0.1, 0.4, seed=2, family=CONST)
    tr = run_bandit(cfg)
    (rec,) = latch_delay(tr, arms)
    assert (rec.old_best, rec.new_best) == (0, 1)
    # deterministic estimates: m_new + (m_old - m_new) * prod of alpha over post-switch samples
    pulls = [np.cumsum(tr.explored & (tr.chosen == a)) for a in (0, 1)]
    u = [int(p[s - 2]) for p in pulls]
    est = []
    for a, (old, new) in enumerate([(0.9, 0.1), (0.1, 0.9)]):
        n_new = pulls[a][s - 1 :] - u[a]
        prod = np.array([alpha_product(u[a], u[a] + n, 0.4) for n in n_new])
        est.append(new + (old - new) * prod)
    np.testing.assert_allclose(tr.estimates[s - 1 :, 0], est[0], atol=1e-12)
    np.testing.assert_allclose(tr.estimates[s - 1 :, 1], est[1], atol=1e-12)
    flip = int(np.flatnonzero(est[1] > est[0])[0])  # greedy switches on the round after
    assert rec.delay == flip + 1
    assert rec.delay < t - s


def test_no_best_change_gives_zero_delay():
    t = 10000
    arms = (MeanProfile(t, (1, 5001, t), (0.9, 0.8)), MeanProfile(t, (1, 5001, t), (0.1, 0.2)))
    tr = run_bandit(BanditConfig(arms, 0.2, 0.4, seed=0, family=CONST))
    (rec,) = latch_delay(tr, arms)
    assert rec.delay == 0 and rec.old_best == rec.new_best == 0


def test_shift_preserves_argmax():
    base = crossing(20000, 0.85, 0.05)
    shifted = tuple(a.shifted(0.1) for a in base)
    a = run_bandit(BanditConfig(base, 0.2, 0.4, seed=8, family=CONST))
    b = run_bandit(BanditConfig(shifted, 0.2, 0.4, seed=8, family=CONST))
    assert np.array_equal(a.greedy, b.greedy)
    assert np.array_equal(a.chosen, b.chosen)


def test_config_checks():
    with pytest.raises(ValueError):
        BanditConfig((MeanProfile(100, (1, 100), (0.5,)), MeanProfile(200, (1, 200), (0.5,))), 0.2, 0.4)
    with pytest.raises(ValueError):
        BanditConfig(crossing(), 1.2, 0.4)


def test_bandit_csv(tmp_path):
    tr = run_bandit(BanditConfig(crossing(200), 0.2, 0.4, seed=1))
    out = tmp_path / "b.csv"
    with open(out, "w", newline="") as fh:
        write_bandit_csv(tr, fh)
    lines = out.read_text().splitlines()
    assert lines[0] == "round,chosen,explored,reward,best,regret,cumregret,estimate_0,estimate_1"
    assert len(lines) == 201
