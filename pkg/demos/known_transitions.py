"""Known change points: averaging a short window after each transition.

When the transition times are known, the simplest tracker averages the
samples that land in ``[s_k, s_k + t**gamma)`` and reports that average for
the remainder of epoch ``k``.  This walks through one path.
"""

# %%
import numpy as np

from pstrack import (MeanProfile, ParamSet, RewardFamily, SamplingSchedule, check_good_event,
                     generate_path, run_oracle, validate_params, validate_profile)

profile = MeanProfile(100_000, (1, 25_001, 50_001, 75_001, 100_000), (0.9, 0.3, 0.7, 0.5))
params = ParamSet(gamma0=0.8, gamma=0.5, beta=0.1, delta=0.4, b=0.08, mu0=0.3)
print("params ok:", validate_params(params).ok, " profile ok:", validate_profile(profile, params).ok)

# %% [markdown]
# Sampling happens at round ``j`` with probability ``j**-beta``, so the
# number of samples grows like ``t**(1 - beta) / (1 - beta)``.

# %%
schedule = SamplingSchedule(params.beta)
path = generate_path(profile, schedule, RewardFamily("bernoulli"), seed=7)
print(f"w = {path.w} samples, expected {schedule.expected_count(1, profile.horizon):.0f}")

# %%
trace = run_oracle(path, profile, params.gamma)
after = ~trace.in_warmup
for k, m in enumerate(profile.means, start=1):
    est = np.unique(trace.estimates[after & (trace.epochs == k)])
    print(f"epoch {k}: true mean {m:.2f}, window average {est[0]:.4f}")

# %%
report = check_good_event(trace, profile, params)
print("good event:", report.good, " worst relative deviation per epoch:",
      np.round(report.max_rel_dev, 4), " tolerance:", round(report.tolerance, 4))
