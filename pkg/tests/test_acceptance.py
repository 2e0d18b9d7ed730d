"""Acceptance criteria, one test per criterion.

A1/A2/A6/A7/A9/A10 are exact or property checks and run in seconds.  A3, A4,
A5 and A8 share two Monte-Carlo ensembles (both builtin instances, horizon
1e5, 1000 runs) built once per session; expect a few minutes for the full
module.  Run with ``pytest tests/test_acceptance.py -v -s`` to see the
per-criterion pass lines.
"""
import math

import numpy as np
import pytest

from aoi_bandits import (
    BoundParams,
    PolicyConfig,
    SimConfig,
    arm_means,
    builtin_instance,
    classify_arms,
    cts_upper,
    cucb_upper,
    default_checkpoints,
    expected_pseudo_matrix,
    expected_pseudo_reward,
    lower_bound,
    pseudo_reward_table,
    run_ensemble,
    run_episode,
    sample_states,
    solve_t0,
    solve_tb,
)
from aoi_bandits.instance import PseudoRewardTable
from aoi_bandits.policies import (
    CTSBetaPolicy,
    CUCBPolicy,
    ThompsonBetaPolicy,
    UCBPolicy,
)
from conftest import random_instance

HORIZON = 100_000
RUNS = 1000
CHECKPOINTS = tuple(
    sorted(set(default_checkpoints(HORIZON)) | {10_000, 20_000, 30_000, 100_000})
)


def report(criterion: str, message: str) -> None:
    print(f"[{criterion}] PASS {message}")


@pytest.fixture(scope="session")
def i1_ensemble(i1):
    config = SimConfig(
        horizon=HORIZON,
        n_runs=RUNS,
        master_seed=2024,
        checkpoints=CHECKPOINTS,
        policies=(
            PolicyConfig(policy="ucb"),
            PolicyConfig(policy="ts_beta"),
            PolicyConfig(policy="cucb"),
            PolicyConfig(policy="cts_beta"),
            PolicyConfig(policy="cts_gauss"),
        ),
    )
    return run_ensemble(config, i1)


@pytest.fixture(scope="session")
def i2_ensemble(i2):
    config = SimConfig(
        horizon=HORIZON,
        n_runs=RUNS,
        master_seed=2025,
        checkpoints=CHECKPOINTS,
        policies=(
            PolicyConfig(policy="ucb"),
            PolicyConfig(policy="cucb"),
            PolicyConfig(policy="cts_beta"),
            PolicyConfig(policy="cts_gauss"),
        ),
    )
    return run_ensemble(config, i2)


# ---------------------------------------------------------------------------
# A1: exact reference values for I1
# ---------------------------------------------------------------------------

def test_A1_builtin_i1_reference_values(i1):
    means = arm_means(i1)
    np.testing.assert_allclose(means, [0.2, 0.6, 0.5, 0.3], rtol=0, atol=1e-12)
    assert abs(expected_pseudo_reward(i1, 0, 1) - 0.4) <= 1e-12
    assert abs(expected_pseudo_reward(i1, 2, 1) - 1.0) <= 1e-12
    assert abs(expected_pseudo_reward(i1, 3, 1) - 0.4) <= 1e-12
    summary = classify_arms(i1)
    assert summary.optimal_arm == 1  # arm 2, 1-based
    assert summary.n_competitive == 1
    assert summary.competitive_suboptimal == frozenset({2})  # arm 3, 1-based
    report("A1", "I1 means, pseudo-reward expectations and classification exact")


# ---------------------------------------------------------------------------
# A2: I2 classification and zero lower bound
# ---------------------------------------------------------------------------

def test_A2_builtin_i2_classification_and_lower_bound(i2):
    summary = classify_arms(i2)
    assert summary.optimal_arm == 3  # arm 4, 1-based
    assert summary.n_competitive == 0
    params = BoundParams()
    for horizon in (1, 10, 1000, 10**5, 10**8):
        assert lower_bound(summary, params, horizon) == 0.0
    report("A2", "I2 has k*=4, C=0 and a zero lower bound at every horizon")


# ---------------------------------------------------------------------------
# A3: bounded-regret signature of the correlated policies on I2
# ---------------------------------------------------------------------------

def test_A3_correlated_policies_flat_on_i2(i2_ensemble):
    cps = list(i2_ensemble.checkpoints)
    lo, hi = cps.index(20_000), cps.index(100_000)
    samples = i2_ensemble.regret_samples

    def growth(label):
        diff = samples[label][:, hi] - samples[label][:, lo]
        return diff.mean(), diff.std(ddof=1) / math.sqrt(diff.shape[0])

    ucb_growth, ucb_se = growth("ucb")
    assert ucb_growth > 0
    for label in ("cucb", "cts_beta"):
        pol_growth, pol_se = growth(label)
        margin = 0.10 * ucb_growth - pol_growth
        combined = math.hypot(pol_se, 0.10 * ucb_se)
        assert margin >= 3 * combined, (
            f"{label}: growth {pol_growth:.2f} vs 10% of UCB's {ucb_growth:.2f} "
            f"(3 sigma = {3 * combined:.2f})"
        )
    report(
        "A3",
        f"I2 growth 2e4->1e5: ucb {ucb_growth:.1f}, "
        f"cucb {growth('cucb')[0]:.2f}, cts_beta {growth('cts_beta')[0]:.2f}",
    )


# ---------------------------------------------------------------------------
# A4: correlated variants beat their bases on I1
# ---------------------------------------------------------------------------

def test_A4_correlation_awareness_wins_on_i1(i1_ensemble):
    curves = i1_ensemble.curves
    for better, worse in (("cts_beta", "ts_beta"), ("cucb", "ucb")):
        mean_better = curves[better].mean_regret[-1]
        mean_worse = curves[worse].mean_regret[-1]
        combined = math.hypot(curves[better].stderr[-1], curves[worse].stderr[-1])
        assert mean_worse - mean_better >= 3 * combined, (
            f"{better} {mean_better:.1f} vs {worse} {mean_worse:.1f} "
            f"(3 sigma = {3 * combined:.1f})"
        )
    report(
        "A4",
        "final regret "
        + ", ".join(f"{k} {curves[k].mean_regret[-1]:.1f}" for k in
                    ("cts_beta", "ts_beta", "cucb", "ucb")),
    )


# ---------------------------------------------------------------------------
# A5: logarithmic growth of UCB regret on I1
# ---------------------------------------------------------------------------

def test_A5_ucb_regret_grows_logarithmically(i1_ensemble):
    # each regret(T)/ln T within 25% of their common level; square-root or
    # linear growth would put the extremes 50-100% away
    curve = i1_ensemble.curves["ucb"]
    cps = list(curve.checkpoints)
    ratios = [
        curve.mean_regret[cps.index(t)] / math.log(t) for t in (10_000, 30_000, 100_000)
    ]
    center = sum(ratios) / len(ratios)
    deviations = [abs(r / center - 1) for r in ratios]
    assert max(deviations) < 0.25, f"regret/ln T ratios {ratios}, deviations {deviations}"
    report(
        "A5",
        f"regret/ln T at (1e4, 3e4, 1e5) = {[f'{r:.1f}' for r in ratios]}, "
        f"max deviation {max(deviations):.1%}",
    )


# ---------------------------------------------------------------------------
# A6: coupled-oracle regret of the oracle policy is exactly zero
# ---------------------------------------------------------------------------

def test_A6_oracle_policy_zero_regret(i1):
    summary = classify_arms(i1)
    config = PolicyConfig(policy="fixed", fixed_arm=summary.optimal_arm)
    seeds = np.random.default_rng(99).integers(0, 2**31 - 1, size=100)
    for seed in seeds:
        trace = run_episode(i1, config, 300, seed=int(seed), checkpoints=(1, 150, 300))
        np.testing.assert_array_equal(trace.cumulative_aoi, trace.oracle_cumulative_aoi)
    report("A6", "oracle-as-policy coupled regret exactly 0 for 100 seeds")


# ---------------------------------------------------------------------------
# A7: vacuous pseudo-rewards collapse the correlated policies onto their bases
# ---------------------------------------------------------------------------

def _ones_table(n_arms):
    values = np.ones((n_arms, n_arms, 2), dtype=np.int8)
    for k in range(n_arms):
        values[k, k, 0] = 0
        values[k, k, 1] = 1
    return PseudoRewardTable(values=values)


def test_A7_all_ones_table_equivalences():
    rng = np.random.default_rng(7)
    horizon = 500
    for trial in range(50):
        inst = random_instance(rng, max_arms=4, max_states=6)
        n_arms = inst.n_arms
        table = _ones_table(n_arms)
        states = sample_states(inst, np.random.default_rng(1000 + trial), horizon)
        pairs = [
            (UCBPolicy(n_arms, np.random.default_rng(1)),
             CUCBPolicy(n_arms, np.random.default_rng(1), table)),
            (ThompsonBetaPolicy(n_arms, np.random.default_rng(2)),
             CTSBetaPolicy(n_arms, np.random.default_rng(2), table)),
        ]
        for base, correlated in pairs:
            for t in range(horizon):
                a, b = base.select(), correlated.select()
                assert a == b, f"trial {trial}, slot {t + 1}: {base.label} diverged"
                reward = int(inst.rewards[a, states[t]])
                base.observe(a, reward)
                correlated.observe(b, reward)
    report("A7", "CUCB==UCB and CTS==TS selection traces on 50 random instances")


# ---------------------------------------------------------------------------
# A8: simulated regret sits below the theoretical envelopes
# ---------------------------------------------------------------------------

def _check_envelope(ensemble, summary, beta=1.5):
    t0 = solve_t0(summary)
    tb = solve_tb(summary, beta)
    cucb_curve = ensemble.curves["cucb"]
    cts_curve = ensemble.curves["cts_gauss"]
    for i, horizon in enumerate(ensemble.checkpoints):
        upper = cucb_upper(summary, horizon, t0)
        assert cucb_curve.mean_regret[i] <= upper + 3 * cucb_curve.stderr[i], (
            f"cucb at T={horizon}: {cucb_curve.mean_regret[i]:.1f} > {upper:.1f}"
        )
        upper = cts_upper(summary, horizon, beta, tb)
        assert cts_curve.mean_regret[i] <= upper + 3 * cts_curve.stderr[i], (
            f"cts_gauss at T={horizon}: {cts_curve.mean_regret[i]:.1f} > {upper:.1f}"
        )


def test_A8_upper_bound_envelopes(i1, i2, i1_ensemble, i2_ensemble):
    summary1, summary2 = classify_arms(i1), classify_arms(i2)
    _check_envelope(i1_ensemble, summary1)
    _check_envelope(i2_ensemble, summary2)
    small = cucb_upper(summary1, 100, solve_t0(summary1))
    assert small == pytest.approx((1 / 0.2 - 1 / 0.6) * 100, rel=1e-12)
    assert small == pytest.approx(333.3333333333333, abs=1e-9)
    report("A8", "CUCB and CTS(Gaussian) regret below their bounds; small-T branch exact")


# ---------------------------------------------------------------------------
# A9: brute-force oracle for the pseudo-reward expectations
# ---------------------------------------------------------------------------

def _phi_by_enumeration(inst, ell, k):
    """Second, independent enumeration: tabulate the best co-occurring reward
    per observed value first, then average over states."""
    best = {}
    for r in (0, 1):
        rewards_ell = [
            int(inst.rewards[ell, j]) for j in range(inst.n_states) if inst.rewards[k, j] == r
        ]
        if rewards_ell:
            best[r] = max(rewards_ell)
    return math.fsum(
        float(inst.latent.probs[i]) * best[int(inst.rewards[k, i])]
        for i in range(inst.n_states)
    )


def test_A9_pseudo_reward_expectation_oracle():
    rng = np.random.default_rng(2718)
    for _ in range(200):
        inst = random_instance(rng, max_arms=5, max_states=8)
        means = arm_means(inst)
        phi = expected_pseudo_matrix(inst)
        for ell in range(inst.n_arms):
            for k in range(inst.n_arms):
                assert abs(phi[ell, k] - _phi_by_enumeration(inst, ell, k)) <= 1e-12
                assert abs(expected_pseudo_reward(inst, ell, k) - phi[ell, k]) <= 1e-12
            assert np.all(phi[ell, :] >= means[ell] - 1e-12)
    report("A9", "200 random instances match the independent enumeration to 1e-12")


# ---------------------------------------------------------------------------
# A10: burn-in threshold certificates
# ---------------------------------------------------------------------------

def test_A10_threshold_certificates(i1):
    summary = classify_arms(i1)
    t0 = solve_t0(summary)
    assert t0 is not None
    gap = 0.1
    n_arms = 4

    def rhs_t0(tau):
        return 4 * math.sqrt(2 * n_arms * math.log(tau) / tau)

    assert gap >= rhs_t0(t0)
    assert gap < rhs_t0(t0 - 1)

    for beta in (1.01, 1.5, 2.0):
        tb = solve_tb(summary, beta, search_cap=10**11)
        floor = math.ceil(math.exp(11 * beta))
        assert tb is not None and tb >= floor

        def rhs_tb(tau):
            return 6 * math.sqrt(2 * n_arms * beta * math.log(tau) / tau)

        assert gap >= rhs_tb(tb)
        if tb > floor:
            assert gap < rhs_tb(tb - 1)
    report("A10", f"t0={t0} certified; tb respects the exp(11*beta) floor")


# ---------------------------------------------------------------------------
# supporting statistical invariant: correlated policies barely touch
# non-competitive arms on I2
# ---------------------------------------------------------------------------

def test_suboptimal_pull_reduction_on_i2(i2, i2_ensemble):
    summary = classify_arms(i2)
    suboptimal = [k for k in range(4) if k != summary.optimal_arm]
    ucb_pulls = i2_ensemble.pulls["ucb"].mean[suboptimal].sum()
    for label in ("cucb", "cts_beta"):
        correlated_pulls = i2_ensemble.pulls[label].mean[suboptimal].sum()
        assert ucb_pulls >= 5 * correlated_pulls, (
            f"{label}: {correlated_pulls:.1f} vs ucb {ucb_pulls:.1f}"
        )
