"""Drive one scheduling episode by hand and watch the age evolve.

The age of the monitoring station's information starts at 1, resets to 1
after every successful update and grows by one otherwise.  A policy picks a
channel each slot through the same select/observe interface regardless of
its internals; the episode driver couples an oracle (always the best
channel) to the same latent draws, which gives an exact per-run regret
sample.
"""
import numpy as np

from aoi_bandits import (
    PolicyConfig,
    builtin_instance,
    classify_arms,
    make_policy,
    pseudo_reward_table,
    run_episode,
    sample_state,
    step_aoi,
)

inst = builtin_instance("i1")
summary = classify_arms(inst)
table = pseudo_reward_table(inst)

# Manual slot loop with the correlated index policy.
rng_env = np.random.default_rng(42)
policy = make_policy(PolicyConfig(policy="cucb"), inst.n_arms, np.random.default_rng(7), table)

aoi = 1
print("slot  channel  reward  age-> next")
for t in range(1, 16):
    channel = policy.select()
    state = sample_state(inst, rng_env)
    reward = int(inst.rewards[channel, state])
    policy.observe(channel, reward)
    next_aoi = step_aoi(aoi, reward == 1)
    print(f"{t:>4}  {channel + 1:>7}  {reward:>6}  {aoi:>3} -> {next_aoi}")
    aoi = next_aoi

print("\npull counts after 15 slots:", policy.counts)
print("empirical means:", np.round(policy.mu_hat, 3))
print("significant set:", sorted(policy.significant_set()))

# The same episode, end to end, with checkpointed cumulative ages and the
# coupled oracle.  Regret at a checkpoint is the difference of the two sums.
trace = run_episode(
    inst, PolicyConfig(policy="cucb"), 5000, seed=123, checkpoints=(100, 1000, 5000)
)
print("\ncheckpoints:            ", trace.checkpoints)
print("cumulative age (policy):", trace.cumulative_aoi)
print("cumulative age (oracle):", trace.oracle_cumulative_aoi)
print("per-run regret samples: ", trace.cumulative_aoi - trace.oracle_cumulative_aoi)
print("final pulls:            ", trace.pulls)

# The age-aware wrapper overrides its base policy with the empirically best
# channel whenever the age exceeds c*ln(t+1).
wrapped = run_episode(
    inst,
    PolicyConfig(policy="cucb", aoi_aware=True, aoi_threshold_c=2.0),
    5000,
    seed=123,
    checkpoints=(5000,),
)
print("\nage-aware variant regret:",
      wrapped.cumulative_aoi[-1] - wrapped.oracle_cumulative_aoi[-1])
