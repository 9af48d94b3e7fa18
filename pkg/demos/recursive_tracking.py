"""Recursive tracking without knowing the change points.

``Y_l = alpha_l Y_{l-1} + (1 - alpha_l) X_{T(l)}`` with ``alpha_l = 1 - l**-delta``.
The weight on old samples decays, so the estimate follows each new epoch, but
the decay slows as ``l`` grows: the last epochs are tracked with a lag.
"""

# %%
import numpy as np

from pstrack import (MeanProfile, ParamSet, RewardFamily, SamplingSchedule, check_good_event,
                     expand_weights, expected_trace, generate_path, run_recursive)

profile = MeanProfile(100_000, (1, 25_001, 50_001, 75_001, 100_000), (0.9, 0.3, 0.7, 0.5))
params = ParamSet(gamma0=0.8, gamma=0.5, beta=0.1, delta=0.4, b=0.08, mu0=0.3)
path = generate_path(profile, SamplingSchedule(params.beta), RewardFamily("bernoulli"), seed=7)
trace = run_recursive(path, params.delta, profile, params.gamma)

# %% [markdown]
# The estimate is a weighted sum of all past samples; the weights add up to one.

# %%
w = expand_weights(trace.times.size, params.delta).weights
for n in (10, 100, 1000):
    print(f"weight on the newest {n:4d} of {w.size} samples: {w[-n:].sum():.3f}")
print(f"sum theta = {w.sum():.15f}")

# %% [markdown]
# Given the sampling times, the mean of the estimate (``nu``) shows the lag
# without noise. Compare it with the truth a little after each transition.

# %%
nu = expected_trace(trace.times, profile, params.delta)
width = profile.horizon ** params.gamma
for k, (sk, m) in enumerate(zip(profile.transitions, profile.means), start=1):
    i = np.searchsorted(trace.times, sk + width)
    print(f"epoch {k}: m = {m:.2f}, nu after warmup = {nu[i]:.3f}, Y = {trace.estimates[i]:.3f}")

# %%
report = check_good_event(trace, profile, params)
print("good event:", report.good, " worst relative deviation per epoch:",
      np.round(report.max_rel_dev, 3), " tolerance:", round(report.tolerance, 3))
