"""Two arms whose means cross halfway: how fast does the greedy choice switch?"""

# %%
from pstrack import BanditConfig, MeanProfile, RewardFamily, latch_delay, run_bandit
from pstrack.bandit import exploration_regret_floor

t = 100_000
arms = (MeanProfile(t, (1, 50_001, t), (0.9, 0.1)), MeanProfile(t, (1, 50_001, t), (0.1, 0.9)))
cfg = BanditConfig(arms, beta=0.1, delta=0.4, seed=0, family=RewardFamily("constant"))
trace = run_bandit(cfg)

# %%
for rec in latch_delay(trace, arms):
    print(f"best arm {rec.old_best} -> {rec.new_best} at round {rec.round}; greedy latched after {rec.delay}")
floor = exploration_regret_floor(cfg)
print(f"regret {trace.cumregret[-1]:.1f}, exploration floor {floor:.1f}")
