"""Compare the six policies on both builtin instances with a seeded ensemble.

Policies that exploit correlation (cucb, cts_*) avoid sampling channels that
the pseudo-rewards already rule out.  On i1 one sub-optimal channel is
competitive, so their regret still grows logarithmically but with a smaller
prefactor; on i2 no channel is competitive and their regret flattens out
entirely while ucb/ts keep paying for exploration.

This is a scaled-down version of the `benchmark` CLI preset (which uses
horizon 1e5 and 1000 runs); see the README for the CLI equivalent.
"""
import numpy as np

from aoi_bandits import PolicyConfig, SimConfig, builtin_instance, run_ensemble

POLICIES = tuple(
    PolicyConfig(policy=name)
    for name in ("ucb", "ts_beta", "ts_gauss", "cucb", "cts_beta", "cts_gauss")
)

config = SimConfig(
    horizon=20_000,
    n_runs=200,
    master_seed=7,
    checkpoints=(100, 1000, 5000, 20_000),
    policies=POLICIES,
)

for name in ("i1", "i2"):
    inst = builtin_instance(name)
    result = run_ensemble(config, inst)
    print(f"\n=== {name}: mean AoI regret (stderr) by checkpoint ===")
    header = "policy".ljust(10) + "".join(f"{c:>16}" for c in result.checkpoints)
    print(header)
    for label in sorted(result.curves):
        curve = result.curves[label]
        cells = "".join(
            f"{m:>9.1f} ({s:>4.1f})" for m, s in zip(curve.mean_regret, curve.stderr)
        )
        print(label.ljust(10) + cells)

    print("\nmean pulls of each channel at the horizon:")
    for label in sorted(result.pulls):
        print(f"  {label:<10}", np.round(result.pulls[label].mean, 1))

print(
    """
Reading the tables: on i2 the correlated policies stop accumulating regret
after the burn-in (their pulls concentrate on the best channel), while ucb
keeps growing logarithmically.  Rerunning this script reproduces the exact
numbers: every stream is keyed by (master seed, policy label, run index).
"""
)
