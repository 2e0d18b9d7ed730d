"""Age-of-Information episodes, regret estimation and Monte-Carlo ensembles.

An episode advances the age by one each slot and resets it to one after a
successful update.  Regret is estimated against a coupled oracle that plays
the optimal arm on the *same* latent-state draws as the evaluated policy
(exact and strictly lower-variance; the default), or against the analytic
asymptotic baseline ``checkpoint / optimal_mean``.

Reproducibility contract: latent-state streams are keyed by
``(master_seed, policy label, run index)``, so runs are independent of
chunking, ordering and of which other policies are in the set.  Posterior
sampling draws inside :func:`run_ensemble` come from a per-policy batch
stream (fast, deterministic for a fixed configuration), while the
object-level :func:`run_episode` uses a per-run decision stream; draw-free
policies (UCB, CUCB, fixed arm, and AoI-aware wrappers of them) therefore
produce bitwise-identical traces through both paths.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from aoi_bandits import engine
from aoi_bandits.instance import (
    BanditInstance,
    classify_arms,
    load_instance,
    pseudo_reward_table,
    sample_state,
)
from aoi_bandits.policies import PolicyConfig, make_policy

__all__ = [
    "WORKERS_ENV_VAR",
    "BaselineMode",
    "SimConfig",
    "EpisodeTrace",
    "RegretCurve",
    "PullStats",
    "EnsembleResult",
    "default_checkpoints",
    "episode_streams",
    "step_aoi",
    "run_episode",
    "estimate_regret",
    "run_ensemble",
]

#: Environment variable overriding the ensemble worker count.
WORKERS_ENV_VAR = "AOI_BANDITS_WORKERS"


class BaselineMode(str, Enum):
    COUPLED_ORACLE = "coupled_oracle"
    ANALYTIC = "analytic"


def default_checkpoints(horizon: int, count: int = 50) -> tuple[int, ...]:
    """About ``count`` log-spaced slots in [1, horizon], always ending at the
    horizon."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    grid = np.unique(np.geomspace(1, horizon, num=count).round().astype(np.int64))
    return tuple(int(c) for c in grid)


@dataclass(frozen=True)
class SimConfig:
    """Ensemble description: horizon, run count, seed, checkpoints, baseline
    and the policy set."""

    horizon: int
    n_runs: int
    master_seed: int = 0
    checkpoints: tuple[int, ...] | None = None
    baseline_mode: BaselineMode = BaselineMode.COUPLED_ORACLE
    policies: tuple[PolicyConfig, ...] = ()

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        object.__setattr__(self, "baseline_mode", BaselineMode(self.baseline_mode))
        if self.checkpoints is not None:
            cps = tuple(int(c) for c in self.checkpoints)
            if list(cps) != sorted(set(cps)):
                raise ValueError("checkpoints must be strictly increasing")
            if cps and (cps[0] < 1 or cps[-1] > self.horizon):
                raise ValueError("checkpoints must lie in [1, horizon]")
            object.__setattr__(self, "checkpoints", cps)
        labels = [p.label for p in self.policies]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate policy labels in the policy set")

    def resolved_checkpoints(self) -> tuple[int, ...]:
        return self.checkpoints if self.checkpoints else default_checkpoints(self.horizon)


@dataclass(frozen=True)
class EpisodeTrace:
    """Per-checkpoint cumulative AoI for the policy and the coupled oracle,
    plus the final pull counts."""

    checkpoints: tuple[int, ...]
    cumulative_aoi: np.ndarray
    oracle_cumulative_aoi: np.ndarray
    pulls: np.ndarray

    def __post_init__(self) -> None:
        cum = np.asarray(self.cumulative_aoi, dtype=np.int64)
        cum_star = np.asarray(self.oracle_cumulative_aoi, dtype=np.int64)
        cps = np.asarray(self.checkpoints, dtype=np.int64)
        if cum.shape != cps.shape or cum_star.shape != cps.shape:
            raise ValueError("one cumulative value per checkpoint required")
        if np.any(np.diff(cum) < 0) or np.any(np.diff(cum_star) < 0):
            raise ValueError("cumulative AoI must be nondecreasing")
        if np.any(cum < cps) or np.any(cum_star < cps):
            raise ValueError("cumulative AoI below slot count (AoI >= 1 each slot)")
        object.__setattr__(self, "cumulative_aoi", cum)
        object.__setattr__(self, "oracle_cumulative_aoi", cum_star)
        object.__setattr__(self, "checkpoints", tuple(int(c) for c in cps))


@dataclass(frozen=True)
class RegretCurve:
    """Mean AoI-regret estimate with dispersion, per checkpoint."""

    policy: str
    checkpoints: tuple[int, ...]
    mean_regret: np.ndarray
    stderr: np.ndarray
    n_runs: int
    baseline_mode: BaselineMode
    warning: str | None = None


@dataclass(frozen=True)
class PullStats:
    """Mean final pull counts per arm with standard errors."""

    mean: np.ndarray
    stderr: np.ndarray
    n_runs: int


@dataclass(frozen=True)
class EnsembleResult:
    instance_name: str
    checkpoints: tuple[int, ...]
    curves: dict[str, RegretCurve]
    pulls: dict[str, PullStats]
    regret_samples: dict[str, np.ndarray] = field(repr=False, default_factory=dict)


def step_aoi(aoi: int, success: bool) -> int:
    """Advance the age by one slot: reset to 1 on success, else increment."""
    if aoi < 1:
        raise ValueError("AoI is at least 1")
    return 1 if success else aoi + 1


def episode_streams(
    master_seed: int, policy_label: str, run_index: int
) -> tuple[np.random.Generator, np.random.Generator]:
    """Environment and decision generators for one (policy, run) pair."""
    env = np.random.Generator(np.random.PCG64(engine.env_seed(master_seed, policy_label, run_index)))
    dec = np.random.Generator(
        np.random.PCG64(engine.decision_seed(master_seed, policy_label, run_index))
    )
    return env, dec


def run_episode(
    inst: BanditInstance,
    config: PolicyConfig,
    horizon: int,
    *,
    env_rng: np.random.Generator | None = None,
    decision_rng: np.random.Generator | None = None,
    seed: int | None = None,
    checkpoints: tuple[int, ...] | None = None,
) -> EpisodeTrace:
    """Run one coupled episode of the configured policy.

    Each slot draws the latent state once; the policy's arm and the oracle's
    optimal arm are rewarded from that same draw, and both ages advance by
    :func:`step_aoi` starting from 1.  Pass either both generators or a seed.
    """
    if (env_rng is None) != (decision_rng is None):
        raise ValueError("pass both env_rng and decision_rng, or neither")
    if env_rng is None:
        if seed is None:
            raise ValueError("pass env_rng/decision_rng or a seed")
        children = np.random.SeedSequence(seed).spawn(2)
        env_rng = np.random.Generator(np.random.PCG64(children[0]))
        decision_rng = np.random.Generator(np.random.PCG64(children[1]))
    if checkpoints is None:
        checkpoints = default_checkpoints(horizon)

    summary = classify_arms(inst)
    oracle_arm = summary.optimal_arm
    table = pseudo_reward_table(inst) if config.needs_pseudo_table else None
    policy = make_policy(config, inst.n_arms, decision_rng, table)

    aoi = 1
    aoi_star = 1
    cum = 0
    cum_star = 0
    cp_index = {c: i for i, c in enumerate(checkpoints)}
    out = np.empty(len(checkpoints), dtype=np.int64)
    out_star = np.empty_like(out)

    for t in range(1, horizon + 1):
        cum += aoi
        cum_star += aoi_star
        arm = policy.select()
        state = sample_state(inst, env_rng)
        reward = int(inst.rewards[arm, state])
        reward_star = int(inst.rewards[oracle_arm, state])
        policy.observe(arm, reward)
        aoi = step_aoi(aoi, reward == 1)
        aoi_star = step_aoi(aoi_star, reward_star == 1)
        pos = cp_index.get(t)
        if pos is not None:
            out[pos] = cum
            out_star[pos] = cum_star

    return EpisodeTrace(
        checkpoints=tuple(checkpoints),
        cumulative_aoi=out,
        oracle_cumulative_aoi=out_star,
        pulls=policy.counts.copy(),
    )


def _regret_samples(
    cumulative: np.ndarray,
    oracle_cumulative: np.ndarray,
    checkpoints: tuple[int, ...],
    optimal_mean: float,
    mode: BaselineMode,
) -> np.ndarray:
    if mode is BaselineMode.COUPLED_ORACLE:
        return cumulative.astype(np.float64) - oracle_cumulative.astype(np.float64)
    baseline = np.asarray(checkpoints, dtype=np.float64) / optimal_mean
    return cumulative.astype(np.float64) - baseline[None, :]


def _curve_from_samples(
    samples: np.ndarray,
    checkpoints: tuple[int, ...],
    mode: BaselineMode,
    policy: str,
) -> RegretCurve:
    n_runs = samples.shape[0]
    mean = samples.mean(axis=0)
    if n_runs > 1:
        stderr = samples.std(axis=0, ddof=1) / np.sqrt(n_runs)
        warning = None
    else:
        stderr = np.zeros_like(mean)
        warning = "single run: standard errors are degenerate (reported as 0)"
    return RegretCurve(
        policy=policy,
        checkpoints=checkpoints,
        mean_regret=mean,
        stderr=stderr,
        n_runs=n_runs,
        baseline_mode=mode,
        warning=warning,
    )


def estimate_regret(
    traces: list[EpisodeTrace],
    optimal_mean: float,
    mode: BaselineMode = BaselineMode.COUPLED_ORACLE,
    policy: str = "",
) -> RegretCurve:
    """Aggregate episode traces into a mean regret curve with standard errors.

    The coupled mode averages per-run differences against the coupled oracle;
    the analytic mode subtracts ``checkpoint / optimal_mean``.  A single run
    yields zero standard errors and a warning flag.
    """
    if not traces:
        raise ValueError("need at least one trace")
    if not 0.0 < optimal_mean <= 1.0:
        raise ValueError("optimal_mean must be in (0, 1]")
    mode = BaselineMode(mode)
    checkpoints = traces[0].checkpoints
    cum = np.stack([t.cumulative_aoi for t in traces])
    cum_star = np.stack([t.oracle_cumulative_aoi for t in traces])
    samples = _regret_samples(cum, cum_star, checkpoints, optimal_mean, mode)
    return _curve_from_samples(samples, checkpoints, mode, policy)


def _simulate_one_policy(payload: tuple) -> tuple[str, np.ndarray, np.ndarray, np.ndarray]:
    document, config, horizon, n_runs, master_seed, checkpoints, oracle_arm = payload
    inst = load_instance(json.loads(document))
    cum, cum_star, pulls = engine.simulate_policy(
        inst, config, horizon, n_runs, master_seed, checkpoints, oracle_arm
    )
    return config.label, cum, cum_star, pulls


def _worker_count(workers: int | None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV_VAR, "")
        workers = int(raw) if raw.strip() else 1
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def run_ensemble(
    config: SimConfig,
    inst: BanditInstance,
    workers: int | None = None,
) -> EnsembleResult:
    """Run every configured policy for ``config.n_runs`` coupled episodes.

    Policies are independent simulations (their streams are keyed by policy
    label), so they may run in parallel worker processes; results are
    identical for any worker count.  ``workers`` defaults to the
    ``AOI_BANDITS_WORKERS`` environment variable, else 1.
    """
    if not config.policies:
        raise ValueError("config.policies is empty")
    summary = classify_arms(inst)
    checkpoints = config.resolved_checkpoints()
    document = json.dumps(
        {
            "name": inst.name,
            "states": list(inst.latent.state_labels),
            "probs": [float(p) for p in inst.latent.probs],
            "rewards": inst.rewards.astype(int).tolist(),
        }
    )
    payloads = [
        (document, p, config.horizon, config.n_runs, config.master_seed, checkpoints,
         summary.optimal_arm)
        for p in config.policies
    ]

    workers = _worker_count(workers)
    if workers == 1 or len(payloads) == 1:
        results = [_simulate_one_policy(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(payloads))) as pool:
            results = list(pool.map(_simulate_one_policy, payloads))

    curves: dict[str, RegretCurve] = {}
    pulls: dict[str, PullStats] = {}
    regret_samples: dict[str, np.ndarray] = {}
    for label, cum, cum_star, pull_counts in results:
        samples = _regret_samples(
            cum, cum_star, checkpoints, summary.optimal_mean, config.baseline_mode
        )
        n_runs = samples.shape[0]
        curves[label] = _curve_from_samples(samples, checkpoints, config.baseline_mode, label)
        pull_mean = pull_counts.mean(axis=0)
        pull_err = (
            pull_counts.std(axis=0, ddof=1) / np.sqrt(n_runs)
            if n_runs > 1
            else np.zeros_like(pull_mean, dtype=np.float64)
        )
        pulls[label] = PullStats(mean=pull_mean, stderr=pull_err, n_runs=n_runs)
        regret_samples[label] = samples

    return EnsembleResult(
        instance_name=inst.name,
        checkpoints=checkpoints,
        curves=curves,
        pulls=pulls,
        regret_samples=regret_samples,
    )
