"""Deviation bounds and an empirical check that they dominate the tail."""

# %%
from pstrack import azuma_bound, chernoff_bound, empirical_tail_vs_bound, known_transitions_success
from pstrack.bounds import SumSpec

print(chernoff_bound(0.1, 500.0).value)       # 2 exp(-eps^2 ES / 4)
print(azuma_bound(0.1, 25.0, 50.0).value)     # 2 exp(-eps^2 EV^2 / sum lambda^2)

# %% [markdown]
# The success expression for the known-transition tracker is only meaningful
# up to constants; with all constants at 1 it is often vacuous at small t.

# %%
for t in (1e4, 1e6, 1e8):
    s = known_transitions_success(t, 0.1, 0.5, 0.08)
    print(f"t={t:.0e}: raw {s.raw:.4f}, clamped {s.clamped:.4f}")

# %%
coins = SumSpec("bernoulli", (0.5,) * 50)
for eps in (0.1, 0.3, 0.5):
    r = empirical_tail_vs_bound(coins, eps, trials=20_000, seed=1)
    print(f"eps={eps}: empirical {r.empirical:.4f} <= bound {r.bound.value:.4f}: {r.passed}")
