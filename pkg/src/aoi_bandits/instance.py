"""Correlated bandit instances and their derived quantities.

An instance couples a categorical latent state with a deterministic binary
reward table: in every slot the state is drawn i.i.d. and every channel's
success is a fixed 0/1 function of it.  From the table we derive arm means,
cross-arm pseudo-rewards, pseudo-gaps and the competitive/non-competitive
classification that the correlated policies and the regret bounds consume.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "UNREACHABLE",
    "InstanceError",
    "LatentDistribution",
    "BanditInstance",
    "PseudoRewardTable",
    "InstanceSummary",
    "load_instance",
    "builtin_document",
    "builtin_instance",
    "arm_means",
    "pseudo_reward_table",
    "expected_pseudo_reward",
    "expected_pseudo_matrix",
    "classify_arms",
    "sample_state",
    "sample_states",
]

#: Marker for a pseudo-reward entry whose conditioning reward value no state
#: can produce.  Stored explicitly; never a silent default.
UNREACHABLE: int = -1

_PROB_TOL = 1e-12


class InstanceError(ValueError):
    """Raised when an instance document or derived precondition is invalid."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LatentDistribution:
    """Categorical distribution of the shared latent state."""

    state_labels: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 1:
            raise InstanceError("probs: need a non-empty 1-d probability vector")
        if len(self.state_labels) != probs.size:
            raise InstanceError(
                f"states: {len(self.state_labels)} labels but {probs.size} probabilities"
            )
        if len(set(self.state_labels)) != len(self.state_labels):
            raise InstanceError("states: state labels must be distinct")
        if np.any(probs < 0):
            raise InstanceError("probs: probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > _PROB_TOL:
            raise InstanceError(f"probs: probabilities sum to {total:.10g}, expected 1")
        object.__setattr__(self, "state_labels", tuple(self.state_labels))
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def n_states(self) -> int:
        return len(self.state_labels)


@dataclass(frozen=True)
class BanditInstance:
    """A named latent distribution plus the per-arm binary reward table.

    ``rewards[k, i]`` is the (deterministic) reward of arm ``k`` when the
    latent state takes its ``i``-th value.  Immutable after construction and
    safe to share across concurrent simulation workers.
    """

    name: str
    latent: LatentDistribution
    rewards: np.ndarray

    def __post_init__(self) -> None:
        rewards = np.asarray(self.rewards)
        if rewards.ndim != 2:
            raise InstanceError("rewards: need a 2-d array, one row per arm")
        if rewards.shape[0] < 2:
            raise InstanceError(f"rewards: K >= 2 required, got {rewards.shape[0]} arm(s)")
        if rewards.shape[1] != self.latent.n_states:
            raise InstanceError(
                f"rewards: rows have {rewards.shape[1]} entries but there are "
                f"{self.latent.n_states} states"
            )
        bad = np.argwhere((rewards != 0) & (rewards != 1))
        if bad.size:
            k, i = bad[0]
            raise InstanceError(f"rewards[{k}][{i}]: entry must be 0 or 1")
        object.__setattr__(self, "rewards", _frozen(rewards.astype(np.int8)))

    @property
    def n_arms(self) -> int:
        return self.rewards.shape[0]

    @property
    def n_states(self) -> int:
        return self.rewards.shape[1]


@dataclass(frozen=True)
class PseudoRewardTable:
    """Optimistic cross-arm reward bounds.

    ``values[l, k, r]`` is the largest reward arm ``l`` can obtain among
    states in which arm ``k`` yields reward ``r``; ``UNREACHABLE`` when no
    state yields ``r`` on arm ``k``.  Observed rewards are always reachable,
    so policies never consume an ``UNREACHABLE`` entry.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=np.int8)))

    @property
    def n_arms(self) -> int:
        return self.values.shape[0]

    def entry(self, ell: int, k: int, r: int) -> int:
        return int(self.values[ell, k, r])


@dataclass(frozen=True)
class InstanceSummary:
    """Every derived quantity the policies, bounds and CLI report need."""

    instance_name: str
    means: np.ndarray
    optimal_arm: int
    optimal_mean: float
    gaps: np.ndarray
    expected_pseudo: np.ndarray  # full matrix phi[l, k]
    pseudo_gaps: np.ndarray      # optimal_mean - phi[k, optimal_arm]
    competitive_suboptimal: frozenset[int]
    strictly_competitive: frozenset[int]
    n_competitive: int
    mu_min: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", _frozen(np.asarray(self.means, dtype=np.float64)))
        object.__setattr__(self, "gaps", _frozen(np.asarray(self.gaps, dtype=np.float64)))
        object.__setattr__(
            self, "expected_pseudo", _frozen(np.asarray(self.expected_pseudo, dtype=np.float64))
        )
        object.__setattr__(
            self, "pseudo_gaps", _frozen(np.asarray(self.pseudo_gaps, dtype=np.float64))
        )

    @property
    def n_arms(self) -> int:
        return self.means.size

    @property
    def gap_min(self) -> float:
        """Smallest sub-optimality gap over the sub-optimal arms."""
        k_star = self.optimal_arm
        others = [self.gaps[k] for k in range(self.n_arms) if k != k_star]
        return float(min(others))


# ---------------------------------------------------------------------------
# Loading and the two built-in instances
# ---------------------------------------------------------------------------

# Four channels over five occlusion states.  Means (0.2, 0.6, 0.5, 0.3);
# cross-channel expectations with respect to the optimal channel are
# exactly 0.4 / 1.0 / 0.4, making channel 3 the lone competitive one.
_I1_DOC: dict = {
    "name": "i1",
    "states": ["x1", "x2", "x3", "x4", "x5"],
    "probs": [0.2, 0.3, 0.3, 0.1, 0.1],
    "rewards": [
        [1, 0, 0, 0, 0],
        [0, 1, 1, 0, 0],
        [0, 1, 0, 1, 1],
        [1, 0, 0, 1, 0],
    ],
}

# Four channels, uniform five-state latent; channel 4 is optimal and every
# other channel's pseudo-gap with respect to it is strictly positive.
_I2_DOC: dict = {
    "name": "i2",
    "states": ["x1", "x2", "x3", "x4", "x5"],
    "probs": [0.2, 0.2, 0.2, 0.2, 0.2],
    "rewards": [
        [0, 0, 0, 1, 0],
        [0, 0, 0, 0, 1],
        [0, 0, 0, 1, 1],
        [1, 1, 1, 0, 0],
    ],
}

_BUILTINS = {"i1": _I1_DOC, "i2": _I2_DOC}


def builtin_document(name: str) -> dict:
    """Return a copy of a built-in instance document (``i1`` or ``i2``)."""
    try:
        doc = _BUILTINS[name]
    except KeyError:
        raise InstanceError(f"unknown builtin instance {name!r}; available: i1, i2") from None
    return json.loads(json.dumps(doc))


def builtin_instance(name: str) -> BanditInstance:
    return load_instance(builtin_document(name))


def load_instance(document: str | bytes | Mapping) -> BanditInstance:
    """Parse and validate an instance document (JSON text or a mapping).

    Fields: ``name`` (string), ``states`` (array of strings), ``probs``
    (array of numbers), ``rewards`` (K arrays of 0/1 integers, row k = arm k).
    Validation failures raise :class:`InstanceError` naming the field.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"document: not valid JSON ({exc})") from exc
    if not isinstance(document, Mapping):
        raise InstanceError("document: top level must be an object")

    for key in ("name", "states", "probs", "rewards"):
        if key not in document:
            raise InstanceError(f"{key}: required field missing")
    name = document["name"]
    if not isinstance(name, str) or not name:
        raise InstanceError("name: must be a non-empty string")
    states = document["states"]
    if not isinstance(states, (list, tuple)) or not all(isinstance(s, str) for s in states):
        raise InstanceError("states: must be an array of strings")
    probs = document["probs"]
    if not isinstance(probs, (list, tuple)) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs
    ):
        raise InstanceError("probs: must be an array of numbers")
    rewards = document["rewards"]
    if not isinstance(rewards, (list, tuple)) or not rewards:
        raise InstanceError("rewards: must be a non-empty array of arrays")
    widths = set()
    for k, row in enumerate(rewards):
        if not isinstance(row, (list, tuple)):
            raise InstanceError(f"rewards[{k}]: must be an array")
        widths.add(len(row))
        for i, entry in enumerate(row):
            if not isinstance(entry, int) or isinstance(entry, bool) or entry not in (0, 1):
                raise InstanceError(f"rewards[{k}][{i}]: entry must be 0 or 1")
    if len(widths) != 1:
        raise InstanceError("rewards: all rows must have the same length")

    latent = LatentDistribution(state_labels=tuple(states), probs=np.asarray(probs, float))
    return BanditInstance(name=name, latent=latent, rewards=np.asarray(rewards, dtype=np.int8))


# ---------------------------------------------------------------------------
# Derived quantities
# ---------------------------------------------------------------------------

def arm_means(inst: BanditInstance) -> np.ndarray:
    """Expected reward of every arm under the latent distribution.

    Rewards are 0/1, so each mean is a subset sum of the probabilities;
    summing with ``math.fsum`` makes the result correctly rounded and hence
    invariant under permuting the states.
    """
    probs = inst.latent.probs
    return np.array(
        [math.fsum(probs[inst.rewards[k] == 1]) for k in range(inst.n_arms)],
        dtype=np.float64,
    )


def pseudo_reward_table(inst: BanditInstance) -> PseudoRewardTable:
    """Tabulate, for every (l, k, r), the best reward of arm l among states
    where arm k yields r; ``UNREACHABLE`` where that state set is empty."""
    K = inst.n_arms
    values = np.full((K, K, 2), UNREACHABLE, dtype=np.int8)
    rewards = inst.rewards
    for k in range(K):
        for r in (0, 1):
            mask = rewards[k] == r
            if not mask.any():
                continue
            values[:, k, r] = rewards[:, mask].max(axis=1)
    return PseudoRewardTable(values=values)


def expected_pseudo_reward(inst: BanditInstance, ell: int, k: int) -> float:
    """Expectation of arm ``ell``'s pseudo-reward with respect to arm ``k``.

    Every state's own reward is reachable, so no UNREACHABLE entry is hit;
    the pseudo-rewards are 0/1, leaving a subset sum of probabilities
    (correctly rounded via ``math.fsum``, see :func:`arm_means`).
    """
    table = pseudo_reward_table(inst)
    s = table.values[ell, k, inst.rewards[k]]
    return math.fsum(inst.latent.probs[s == 1])


def expected_pseudo_matrix(inst: BanditInstance, table: PseudoRewardTable | None = None) -> np.ndarray:
    """Full matrix ``phi[l, k]`` of expected pseudo-rewards."""
    if table is None:
        table = pseudo_reward_table(inst)
    K = inst.n_arms
    phi = np.empty((K, K), dtype=np.float64)
    probs = inst.latent.probs
    for k in range(K):
        s = table.values[:, k, inst.rewards[k]]  # (K, n_states) of 0/1
        for ell in range(K):
            phi[ell, k] = math.fsum(probs[s[ell] == 1])
    return phi


def classify_arms(inst: BanditInstance) -> InstanceSummary:
    """Compute means, gaps, pseudo-gaps and the competitive classification.

    Requires a unique best arm; an exact tie in the means is rejected because
    the pseudo-gap classification is defined against a single optimal arm.
    """
    means = arm_means(inst)
    k_star = int(np.argmax(means))
    mu_star = float(means[k_star])
    if np.count_nonzero(means == mu_star) > 1:
        raise InstanceError("optimal arm not unique: tied maximal means")

    gaps = mu_star - means
    phi = expected_pseudo_matrix(inst)
    pseudo_gaps = mu_star - phi[:, k_star]

    competitive = frozenset(
        k for k in range(inst.n_arms) if k != k_star and pseudo_gaps[k] <= 0.0
    )
    strictly = frozenset(k for k in competitive if pseudo_gaps[k] < 0.0)
    return InstanceSummary(
        instance_name=inst.name,
        means=means,
        optimal_arm=k_star,
        optimal_mean=mu_star,
        gaps=gaps,
        expected_pseudo=phi,
        pseudo_gaps=pseudo_gaps,
        competitive_suboptimal=competitive,
        strictly_competitive=strictly,
        n_competitive=len(competitive),
        mu_min=float(means.min()),
    )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _cumulative(inst: BanditInstance) -> np.ndarray:
    return np.cumsum(inst.latent.probs)


def sample_state(inst: BanditInstance, rng: np.random.Generator) -> int:
    """Draw one latent-state index by inverse CDF (one uniform consumed)."""
    cum = _cumulative(inst)
    i = int(np.searchsorted(cum, rng.random(), side="right"))
    return min(i, inst.n_states - 1)


def sample_states(inst: BanditInstance, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorised :func:`sample_state`; consumes ``size`` uniforms in order,
    so a batch draw equals ``size`` successive scalar draws."""
    cum = _cumulative(inst)
    idx = np.searchsorted(cum, rng.random(size), side="right")
    return np.minimum(idx, inst.n_states - 1).astype(np.int64)
