"""Monte Carlo estimate of the good-event probability, for both trackers."""

# %%
from pstrack import ExperimentConfig, MeanProfile, ParamSet, RewardFamily, run_monte_carlo, sweep

profile = MeanProfile(100_000, (1, 25_001, 50_001, 75_001, 100_000), (0.9, 0.3, 0.7, 0.5))
params = ParamSet(gamma0=0.8, gamma=0.5, beta=0.1, delta=0.4, b=0.08, mu0=0.3)

for estimator in ("oracle", "recursive"):
    cfg = ExperimentConfig(profile, params, RewardFamily("bernoulli"), estimator, trials=30, seed=2026)
    s = run_monte_carlo(cfg)
    print(f"{estimator:9s} p_hat={s.p_hat:.2f} CI=({s.ci[0]:.3f}, {s.ci[1]:.3f}) "
          f"fail_tracking by epoch={list(s.fail_tracking_by_epoch)}")

# %% [markdown]
# Sweeping the horizon keeps each transition at the same fraction of ``t``.

# %%
cfg = ExperimentConfig(profile, params, RewardFamily("bernoulli"), "oracle", trials=20, seed=2026)
for pt in sweep(cfg, "t", [1e4, 1e5]):
    print(pt.value, "skipped" if pt.summary is None else f"p_hat={pt.summary.p_hat:.2f}")
