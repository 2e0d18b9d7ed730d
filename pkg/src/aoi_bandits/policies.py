"""Scheduling policies behind a single select/observe interface.

Six policies are provided: the index policy (UCB), posterior sampling with
Beta and with Gaussian posteriors, and correlation-aware variants of each
(CUCB, CTS with either posterior) that use accumulated cross-arm
pseudo-rewards to drop empirically non-competitive arms from the candidate
set each slot.  Any of them can be wrapped by the AoI-aware rule that
overrides the base selection with the empirically best arm once the current
age exceeds a logarithmic threshold.

All tie-breaking is toward the lowest arm index, and every policy draws only
from the random stream injected at construction, so traces are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from aoi_bandits.instance import UNREACHABLE, PseudoRewardTable

__all__ = [
    "POLICY_KINDS",
    "PolicyConfig",
    "ArmStatistics",
    "Policy",
    "UCBPolicy",
    "ThompsonBetaPolicy",
    "ThompsonGaussianPolicy",
    "CUCBPolicy",
    "CTSBetaPolicy",
    "CTSGaussianPolicy",
    "FixedArmPolicy",
    "AoIAwarePolicy",
    "make_policy",
]

#: Policy names accepted in configuration files and on the command line.
POLICY_KINDS = ("ucb", "ts_beta", "ts_gauss", "cucb", "cts_beta", "cts_gauss")

_CORRELATED = {"cucb", "cts_beta", "cts_gauss"}


@dataclass(frozen=True)
class PolicyConfig:
    """Declarative policy selection plus its parameters.

    ``beta`` scales the Gaussian posterior variance (beta / pull count) and
    must exceed 1; ``aoi_threshold_c`` sets the AoI-aware trigger
    ``c * ln(t + 1)``.  ``fixed_arm`` selects the internal fixed-arm policy
    used for oracle baselines; it is not one of the public six.
    """

    policy: str
    aoi_aware: bool = False
    beta: float = 1.5
    aoi_threshold_c: float = 4.0
    fixed_arm: int | None = None

    def __post_init__(self) -> None:
        if self.policy == "fixed":
            if self.fixed_arm is None or self.fixed_arm < 0:
                raise ValueError("fixed policy requires a nonnegative fixed_arm")
        elif self.policy not in POLICY_KINDS:
            raise ValueError(
                f"unknown policy {self.policy!r}; expected one of {', '.join(POLICY_KINDS)}"
            )
        if not self.beta > 1.0:
            raise ValueError(f"beta must be > 1, got {self.beta}")
        if not self.aoi_threshold_c > 0.0:
            raise ValueError(f"aoi_threshold_c must be > 0, got {self.aoi_threshold_c}")

    @property
    def label(self) -> str:
        base = f"fixed:{self.fixed_arm}" if self.policy == "fixed" else self.policy
        return f"aoi_{base}" if self.aoi_aware else base

    @property
    def needs_pseudo_table(self) -> bool:
        return self.policy in _CORRELATED


@dataclass(frozen=True)
class ArmStatistics:
    """Read-only view of one arm's learning state."""

    n: int
    mu_hat: float
    successes: int
    failures: int
    pseudo_sum: np.ndarray  # pseudo_sum[l]: accumulated pseudo-rewards of arm l w.r.t. this arm


class Policy:
    """Common learning state: pull counts, success/failure tallies and (for
    correlated variants) the cross-arm pseudo-reward accumulators.

    The empirical mean is derived as successes/pulls (0 for unplayed arms),
    so ``mu_hat * n`` equals the success count exactly.
    """

    label = "policy"

    def __init__(
        self,
        n_arms: int,
        rng: np.random.Generator,
        pseudo_table: PseudoRewardTable | None = None,
    ) -> None:
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.n_arms = n_arms
        self.rng = rng
        self.t = 1  # current slot, 1-based; advances on observe()
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.successes = np.zeros(n_arms, dtype=np.int64)
        self.failures = np.zeros(n_arms, dtype=np.int64)
        self._pseudo = pseudo_table
        if pseudo_table is not None:
            if pseudo_table.n_arms != n_arms:
                raise ValueError("pseudo-reward table arm count does not match")
            # pseudo_sums[l, k]: accumulated pseudo-reward of arm l over plays of arm k
            self.pseudo_sums = np.zeros((n_arms, n_arms), dtype=np.float64)
        else:
            self.pseudo_sums = None

    @property
    def mu_hat(self) -> np.ndarray:
        return self.successes / np.maximum(self.counts, 1)

    def arm_stats(self, k: int) -> ArmStatistics:
        pseudo = (
            self.pseudo_sums[:, k].copy()
            if self.pseudo_sums is not None
            else np.zeros(self.n_arms)
        )
        return ArmStatistics(
            n=int(self.counts[k]),
            mu_hat=float(self.mu_hat[k]),
            successes=int(self.successes[k]),
            failures=int(self.failures[k]),
            pseudo_sum=pseudo,
        )

    def select(self) -> int:
        raise NotImplementedError

    def observe(self, arm: int, reward: int) -> None:
        """Ingest the reward of the arm played in the current slot."""
        if reward not in (0, 1):
            raise ValueError(f"reward must be 0 or 1, got {reward!r}")
        self.counts[arm] += 1
        if reward:
            self.successes[arm] += 1
        else:
            self.failures[arm] += 1
        if self.pseudo_sums is not None:
            col = self._pseudo.values[:, arm, reward]
            if col[arm] == UNREACHABLE:
                raise ValueError(f"arm {arm} cannot yield reward {reward} on this instance")
            own = self.pseudo_sums[arm, arm]
            self.pseudo_sums[:, arm] += col
            self.pseudo_sums[arm, arm] = own  # no self pseudo-reward accumulation
        self.t += 1


class _IndexPolicy(Policy):
    """Index computation shared by UCB and CUCB: empirical mean plus an
    exploration bonus, infinite for unplayed arms (forces one pull each)."""

    def _indices(self) -> np.ndarray:
        idx = np.full(self.n_arms, np.inf)
        played = self.counts > 0
        if played.any():
            bonus = np.sqrt(2.0 * math.log(self.t) / self.counts[played])
            idx[played] = self.mu_hat[played] + bonus
        return idx


class UCBPolicy(_IndexPolicy):
    label = "ucb"

    def select(self) -> int:
        return int(np.argmax(self._indices()))


class ThompsonBetaPolicy(Policy):
    label = "ts_beta"

    def _samples(self) -> np.ndarray:
        return self.rng.beta(self.successes + 1.0, self.failures + 1.0)

    def select(self) -> int:
        return int(np.argmax(self._samples()))


class ThompsonGaussianPolicy(Policy):
    """Posterior sampling with a Gaussian whose variance shrinks as beta/n.

    While any arm is unplayed the lowest-index unplayed arm is forced (the
    sampling variance is undefined at n = 0), which amounts to one initial
    sweep over the arms.
    """

    label = "ts_gauss"

    def __init__(self, n_arms, rng, pseudo_table=None, beta: float = 1.5) -> None:
        super().__init__(n_arms, rng, pseudo_table)
        if not beta > 1.0:
            raise ValueError("beta must be > 1")
        self.beta = beta

    def _forced_arm(self) -> int | None:
        unplayed = np.flatnonzero(self.counts == 0)
        return int(unplayed[0]) if unplayed.size else None

    def _samples(self) -> np.ndarray:
        scale = np.sqrt(self.beta / self.counts)
        return self.mu_hat + scale * self.rng.standard_normal(self.n_arms)

    def select(self) -> int:
        forced = self._forced_arm()
        if forced is not None:
            return forced
        return int(np.argmax(self._samples()))


class _CorrelatedMixin:
    """Significant-set / competitive-set machinery shared by CUCB and CTS."""

    def significant_set(self) -> set[int]:
        """Arms pulled at least (t-1)/K times (and at least once)."""
        threshold = (self.t - 1) / self.n_arms
        return {
            k
            for k in range(self.n_arms)
            if self.counts[k] >= threshold and self.counts[k] >= 1
        }

    def competitive_set(self, significant: set[int]) -> tuple[set[int], int]:
        """Return the empirically competitive arms and the empirical leader.

        Arm ``k`` stays in when every significant arm's accumulated
        pseudo-reward estimate for ``k`` is at least the leader's empirical
        mean.  The arm's own estimate is skipped: its pseudo-reward for
        itself is the identity, so it carries no cross-arm information.
        """
        if not significant:
            raise ValueError("significant set must be non-empty")
        mu_hat = self.mu_hat
        k_emp = min(significant, key=lambda k: (-mu_hat[k], k))
        mu_emp = mu_hat[k_emp]
        competitive: set[int] = set()
        for k in range(self.n_arms):
            estimates = [
                self.pseudo_sums[k, ell] / self.counts[ell]
                for ell in significant
                if ell != k and self.counts[ell] > 0
            ]
            if not estimates or min(estimates) >= mu_emp:
                competitive.add(k)
        return competitive, k_emp

    def _candidates(self) -> list[int]:
        significant = self.significant_set()
        if not significant:
            return list(range(self.n_arms))  # no data yet: pure sampling slot
        competitive, k_emp = self.competitive_set(significant)
        competitive.add(k_emp)
        return sorted(competitive)


class CUCBPolicy(_CorrelatedMixin, _IndexPolicy):
    label = "cucb"

    def select(self) -> int:
        if self.t <= self.n_arms:
            return self.t - 1  # initial sweep, one pull per arm
        candidates = self._candidates()
        idx = self._indices()
        return min(candidates, key=lambda k: (-idx[k], k))


class CTSBetaPolicy(_CorrelatedMixin, ThompsonBetaPolicy):
    label = "cts_beta"

    def select(self) -> int:
        theta = self._samples()  # drawn for every arm each slot
        candidates = self._candidates()
        return min(candidates, key=lambda k: (-theta[k], k))


class CTSGaussianPolicy(_CorrelatedMixin, ThompsonGaussianPolicy):
    label = "cts_gauss"

    def select(self) -> int:
        forced = self._forced_arm()
        if forced is not None:
            return forced
        theta = self._samples()
        candidates = self._candidates()
        return min(candidates, key=lambda k: (-theta[k], k))


class FixedArmPolicy(Policy):
    """Always plays one arm; used as the oracle-as-policy baseline."""

    def __init__(self, n_arms, rng, arm: int, pseudo_table=None) -> None:
        super().__init__(n_arms, rng, pseudo_table)
        if not 0 <= arm < n_arms:
            raise ValueError(f"fixed arm {arm} out of range")
        self.arm = arm

    @property
    def label(self) -> str:
        return f"fixed:{self.arm}"

    def select(self) -> int:
        return self.arm


class AoIAwarePolicy:
    """Wrap a base policy with the age-triggered exploitation rule.

    The wrapper tracks its own age from the observed success sequence.  Once
    the age exceeds ``c * ln(t + 1)`` (and every arm has been played, so the
    empirical means are meaningful) it plays the arm with the highest
    empirical mean; otherwise it plays the base selection.  The base
    selection is computed every slot even when overridden, so the base
    policy's random stream advances identically with or without overrides.
    """

    def __init__(self, base: Policy, threshold_c: float = 4.0) -> None:
        if not threshold_c > 0.0:
            raise ValueError("threshold_c must be > 0")
        self.base = base
        self.threshold_c = threshold_c
        self.aoi = 1

    @property
    def label(self) -> str:
        return f"aoi_{self.base.label}"

    @property
    def n_arms(self) -> int:
        return self.base.n_arms

    @property
    def t(self) -> int:
        return self.base.t

    @property
    def counts(self) -> np.ndarray:
        return self.base.counts

    @property
    def mu_hat(self) -> np.ndarray:
        return self.base.mu_hat

    def arm_stats(self, k: int) -> ArmStatistics:
        return self.base.arm_stats(k)

    def select(self) -> int:
        base_choice = self.base.select()
        threshold = self.threshold_c * math.log(self.base.t + 1)
        if self.aoi > threshold and np.all(self.base.counts >= 1):
            return int(np.argmax(self.base.mu_hat))
        return base_choice

    def observe(self, arm: int, reward: int) -> None:
        self.base.observe(arm, reward)
        self.aoi = 1 if reward else self.aoi + 1


def make_policy(
    config: PolicyConfig,
    n_arms: int,
    rng: np.random.Generator,
    pseudo_table: PseudoRewardTable | None = None,
) -> Policy | AoIAwarePolicy:
    """Instantiate the configured policy bound to ``rng``.

    Correlated variants require the instance's pseudo-reward table.
    """
    kind = config.policy
    if kind in _CORRELATED and pseudo_table is None:
        raise ValueError(f"policy {kind!r} requires a pseudo-reward table")
    table = pseudo_table if kind in _CORRELATED else None
    if kind == "ucb":
        base: Policy = UCBPolicy(n_arms, rng)
    elif kind == "ts_beta":
        base = ThompsonBetaPolicy(n_arms, rng)
    elif kind == "ts_gauss":
        base = ThompsonGaussianPolicy(n_arms, rng, beta=config.beta)
    elif kind == "cucb":
        base = CUCBPolicy(n_arms, rng, table)
    elif kind == "cts_beta":
        base = CTSBetaPolicy(n_arms, rng, table)
    elif kind == "cts_gauss":
        base = CTSGaussianPolicy(n_arms, rng, table, beta=config.beta)
    elif kind == "fixed":
        base = FixedArmPolicy(n_arms, rng, arm=config.fixed_arm)
    else:  # pragma: no cover - PolicyConfig already validates
        raise ValueError(f"unknown policy {kind!r}")
    if config.aoi_aware:
        return AoIAwarePolicy(base, threshold_c=config.aoi_threshold_c)
    return base
