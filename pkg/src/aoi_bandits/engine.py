"""Vectorised Monte-Carlo backend for policy ensembles.

Runs all episodes of one policy simultaneously, one numpy-vectorised slot at
a time, reproducing the per-slot semantics of the policy objects exactly.
Latent-state draws come from per-(policy, run) streams, so chunking or
reordering runs cannot change results; posterior-sampling draws come from a
single per-policy stream consumed slot-major across runs (see the module
docstring of :mod:`aoi_bandits.simulator` for the reproducibility contract).

Policies that draw nothing (UCB, CUCB, fixed arm, and their AoI-aware
wrappers) produce bitwise-identical traces to the scalar policy objects;
the test suite pins this.
"""
from __future__ import annotations

import math
import zlib

import numpy as np

from aoi_bandits.instance import BanditInstance, pseudo_reward_table
from aoi_bandits.policies import PolicyConfig

__all__ = ["policy_stream_key", "env_seed", "decision_seed", "batch_decision_seed", "simulate_policy"]

_ENV_TAG = 0
_DECISION_TAG = 1
_BATCH_DECISION_TAG = 2

#: Block length for pre-drawn latent-state uniforms.
_BLOCK = 4096


def policy_stream_key(label: str) -> int:
    """Stable 32-bit key for a policy label; keys the policy's substreams so
    that adding or removing other policies never perturbs its draws."""
    return zlib.crc32(label.encode("utf-8"))


def env_seed(master_seed: int, label: str, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(policy_stream_key(label), run, _ENV_TAG))


def decision_seed(master_seed: int, label: str, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        master_seed, spawn_key=(policy_stream_key(label), run, _DECISION_TAG)
    )


def batch_decision_seed(master_seed: int, label: str) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        master_seed, spawn_key=(policy_stream_key(label), 0, _BATCH_DECISION_TAG)
    )


class _LatentBlocks:
    """Pre-drawn latent-state indices, one stream per run, refilled in blocks."""

    def __init__(self, inst: BanditInstance, master_seed: int, label: str, n_runs: int) -> None:
        self._cum = np.cumsum(inst.latent.probs)
        self._top = inst.n_states - 1
        self._rngs = [
            np.random.Generator(np.random.PCG64(env_seed(master_seed, label, r)))
            for r in range(n_runs)
        ]
        self._n_runs = n_runs
        self._buf = np.empty((n_runs, 0), dtype=np.int64)
        self._off = 0

    def next_column(self) -> np.ndarray:
        if self._off >= self._buf.shape[1]:
            u = np.empty((self._n_runs, _BLOCK))
            for r, rng in enumerate(self._rngs):
                u[r] = rng.random(_BLOCK)
            self._buf = np.minimum(
                np.searchsorted(self._cum, u, side="right"), self._top
            ).astype(np.int64)
            self._off = 0
        col = self._buf[:, self._off]
        self._off += 1
        return col


def _candidate_mask(
    counts: np.ndarray,
    mu: np.ndarray,
    phi: np.ndarray,
    t: int,
    rows: np.ndarray,
) -> np.ndarray:
    """Empirically competitive arms plus the empirical leader, per run.

    Mirrors Policy.significant_set / Policy.competitive_set: significant arms
    are those with counts >= (t-1)/K (and >= 1); an arm stays in when the
    minimum of the other significant arms' pseudo-reward estimates for it is
    at least the leader's empirical mean.
    """
    n_runs, n_arms = counts.shape
    threshold = (t - 1) / n_arms
    significant = counts >= max(threshold, 1)
    leader = np.argmax(np.where(significant, mu, -np.inf), axis=1)
    mu_leader = mu[rows, leader]

    min_est = np.full((n_runs, n_arms), np.inf)
    for ell in range(n_arms):
        sig_ell = significant[:, ell]
        if not sig_ell.any():
            continue
        est = phi[:, :, ell] / np.maximum(counts[:, ell, None], 1)
        est[:, ell] = np.inf          # own estimate carries no cross-arm information
        est[~sig_ell, :] = np.inf     # only significant arms constrain
        np.minimum(min_est, est, out=min_est)

    candidates = min_est >= mu_leader[:, None]
    candidates[rows, leader] = True
    return candidates


def simulate_policy(
    inst: BanditInstance,
    config: PolicyConfig,
    horizon: int,
    n_runs: int,
    master_seed: int,
    checkpoints: tuple[int, ...],
    oracle_arm: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run ``n_runs`` coupled episodes of one policy.

    Returns ``(cumulative_aoi, oracle_cumulative_aoi, pulls)`` with shapes
    (n_runs, n_checkpoints), (n_runs, n_checkpoints) and (n_runs, n_arms).
    The oracle plays ``oracle_arm`` on the same latent draws as the policy.
    """
    n_arms = inst.n_arms
    kind = config.policy
    label = config.label
    rewards = inst.rewards.astype(np.int64)
    correlated = kind in ("cucb", "cts_beta", "cts_gauss")
    uses_index = kind in ("ucb", "cucb")
    uses_beta = kind in ("ts_beta", "cts_beta")
    uses_gauss = kind in ("ts_gauss", "cts_gauss")

    pseudo = pseudo_reward_table(inst).values.astype(np.int64) if correlated else None
    latent = _LatentBlocks(inst, master_seed, label, n_runs)
    decision = np.random.Generator(np.random.PCG64(batch_decision_seed(master_seed, label)))

    rows = np.arange(n_runs)
    counts = np.zeros((n_runs, n_arms), dtype=np.int64)
    successes = np.zeros((n_runs, n_arms), dtype=np.int64)
    phi = np.zeros((n_runs, n_arms, n_arms), dtype=np.int64) if correlated else None

    aoi = np.ones(n_runs, dtype=np.int64)
    aoi_star = np.ones(n_runs, dtype=np.int64)
    cum = np.zeros(n_runs, dtype=np.int64)
    cum_star = np.zeros(n_runs, dtype=np.int64)
    out = np.empty((n_runs, len(checkpoints)), dtype=np.int64)
    out_star = np.empty_like(out)
    cp_iter = iter(enumerate(checkpoints))
    cp_pos, cp_next = next(cp_iter, (None, None))

    for t in range(1, horizon + 1):
        cum += aoi
        cum_star += aoi_star

        # --- selection (mirrors the scalar policies exactly) ---
        if kind == "fixed":
            chosen = np.full(n_runs, config.fixed_arm, dtype=np.int64)
        elif (uses_index or uses_gauss) and t <= n_arms:
            chosen = np.full(n_runs, t - 1, dtype=np.int64)  # initial sweep / forced play
        else:
            mu = successes / np.maximum(counts, 1)
            if uses_index:
                score = mu + np.sqrt((2.0 * math.log(t)) / counts)
            elif uses_beta:
                score = decision.beta(successes + 1.0, (counts - successes) + 1.0)
            else:
                score = mu + np.sqrt(config.beta / counts) * decision.standard_normal(
                    (n_runs, n_arms)
                )
            if correlated and t > 1:
                mask = _candidate_mask(counts, mu, phi, t, rows)
                score = np.where(mask, score, -np.inf)
            chosen = np.argmax(score, axis=1)

        if config.aoi_aware:
            mu = successes / np.maximum(counts, 1)
            override = (counts.min(axis=1) >= 1) & (
                aoi > config.aoi_threshold_c * math.log(t + 1)
            )
            if override.any():
                chosen = np.where(override, np.argmax(mu, axis=1), chosen)

        # --- coupled environment step ---
        states = latent.next_column()
        reward = rewards[chosen, states]
        reward_star = rewards[oracle_arm, states]

        counts[rows, chosen] += 1
        successes[rows, chosen] += reward
        if correlated:
            phi[rows, :, chosen] += pseudo[:, chosen, reward].T

        aoi = np.where(reward == 1, 1, aoi + 1)
        aoi_star = np.where(reward_star == 1, 1, aoi_star + 1)

        if t == cp_next:
            out[:, cp_pos] = cum
            out_star[:, cp_pos] = cum_star
            cp_pos, cp_next = next(cp_iter, (None, None))

    return out, out_star, counts
