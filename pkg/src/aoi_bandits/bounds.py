"""Numeric evaluation of the AoI-regret lower and upper bounds.

The lower bound applies to consistent policies on instances with at least
one strictly competitive arm and grows logarithmically; it takes the
consistency constants and the per-arm divergences to a perturbed reward
distribution as user-supplied parameters (the perturbed instances themselves
are not constructed here).  The upper bounds for the two correlation-aware
policies combine a burn-in threshold solver with per-arm pull-count bounds:
a constant term for non-competitive arms and a logarithmic term for
competitive ones.  All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from aoi_bandits.instance import InstanceSummary

__all__ = [
    "BoundParams",
    "BoundReport",
    "bernoulli_kl",
    "solve_t0",
    "solve_tb",
    "cucb_pull_bounds",
    "cts_pull_bounds",
    "cucb_upper",
    "cts_upper",
    "lower_bound",
    "evaluate_bounds",
]

_REL_TOL = 1e-15
_CHUNK = 1 << 16

BOUND_KINDS = ("lower", "upper_cucb", "upper_cts")


@dataclass(frozen=True)
class BoundParams:
    """User-supplied constants for the bound formulas.

    ``divergences`` maps each strictly competitive arm (0-based) to the
    divergence between its reward distribution and the perturbed one used by
    the lower-bound argument; the perturbation itself lives in prior work and
    is not reproduced here.
    """

    alpha: float = 0.5
    consistency_m: float = 1.0
    divergences: Mapping[int, float] = field(default_factory=dict)
    beta: float = 1.5
    search_cap: int = 10**8

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.consistency_m > 0.0:
            raise ValueError(f"consistency constant must be > 0, got {self.consistency_m}")
        if not self.beta > 1.0:
            raise ValueError(f"beta must be > 1, got {self.beta}")
        if self.search_cap < 2:
            raise ValueError("search_cap must be >= 2")
        divs = dict(self.divergences)
        for arm, value in divs.items():
            if not value > 0.0:
                raise ValueError(f"divergence for arm {arm} must be > 0, got {value}")
        object.__setattr__(self, "divergences", divs)


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence (nats) between Bernoulli(p) and Bernoulli(q).

    Uses the convention 0*log(0) = 0; infinite when q is degenerate and p
    puts mass where q has none.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    if q == 0.0:
        return 0.0 if p == 0.0 else math.inf
    if q == 1.0:
        return 0.0 if p == 1.0 else math.inf
    total = 0.0
    if p > 0.0:
        total += p * math.log(p / q)
    if p < 1.0:
        total += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return total


# ---------------------------------------------------------------------------
# Burn-in threshold solvers
# ---------------------------------------------------------------------------

def _threshold_gap(summary: InstanceSummary) -> float:
    """Smallest of the minimal sub-optimality gap and the non-competitive
    pseudo-gaps; the quantity the burn-in condition must dominate."""
    gap = summary.gap_min
    if not gap > 0.0:
        raise ValueError("no positive sub-optimality gap")
    k_star = summary.optimal_arm
    for k in range(summary.n_arms):
        if k == k_star or k in summary.competitive_suboptimal:
            continue
        gap = min(gap, float(summary.pseudo_gaps[k]))
    return gap


def _solve_threshold(
    gap: float, rhs: Callable[[int], float], floor: int, cap: int
) -> int | None:
    """Smallest integer tau in [floor, cap] with gap >= rhs(tau), or None.

    rhs is strictly decreasing for tau >= 3, so after checking the couple of
    candidates below 3 the first satisfying tau is found by bisection.
    """
    if floor > cap:
        return None
    if gap >= rhs(floor):
        return floor
    lo = max(floor, 3)
    for tau in range(floor + 1, min(lo, cap) + 1):
        if gap >= rhs(tau):
            return tau
    if lo >= cap or rhs(cap) > gap:
        return None
    hi = cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gap >= rhs(mid):
            hi = mid
        else:
            lo = mid
    return hi


def solve_t0(summary: InstanceSummary, search_cap: int = 10**8) -> int | None:
    """Burn-in threshold for the correlated index policy: the smallest slot
    tau >= 2 whose gap condition gap >= 4*sqrt(2K*ln(tau)/tau) holds.

    Returns None when no slot up to ``search_cap`` satisfies it.
    """
    n_arms = summary.n_arms
    gap = _threshold_gap(summary)

    def rhs(tau: int) -> float:
        return 4.0 * math.sqrt(2.0 * n_arms * math.log(tau) / tau)

    return _solve_threshold(gap, rhs, 2, search_cap)


def solve_tb(summary: InstanceSummary, beta: float, search_cap: int = 10**8) -> int | None:
    """Burn-in threshold for Gaussian-posterior sampling: as :func:`solve_t0`
    but with floor exp(11*beta) and condition gap >= 6*sqrt(2K*beta*ln(tau)/tau)."""
    if not beta > 1.0:
        raise ValueError("beta must be > 1")
    n_arms = summary.n_arms
    gap = _threshold_gap(summary)
    floor = math.ceil(math.exp(11.0 * beta))

    def rhs(tau: int) -> float:
        return 6.0 * math.sqrt(2.0 * n_arms * beta * math.log(tau) / tau)

    return _solve_threshold(gap, rhs, floor, search_cap)


# ---------------------------------------------------------------------------
# Series (direct summation with early termination)
# ---------------------------------------------------------------------------

def _sum_decreasing(term: Callable[[np.ndarray], np.ndarray], start: int, stop: int) -> float:
    """Sum term(t) for integer t in [start, stop], terms nonincreasing;
    stops early once terms drop below 1e-15 of the running sum."""
    if stop < start:
        return 0.0
    total = 0.0
    t = start
    while t <= stop:
        hi = min(stop, t + _CHUNK - 1)
        values = term(np.arange(t, hi + 1, dtype=np.float64))
        total += float(values.sum())
        if values[-1] <= _REL_TOL * total:
            break
        t = hi + 1
    return total


def _sum_exp_tail(horizon: int, n_arms: int, gap_min: float) -> float:
    """Sum of 2*K*t*exp(-t*gap_min^2/(2K)) for t = 1..horizon.

    Terms rise to a peak at t = 2K/gap_min^2 then decay geometrically; once
    past the peak the remaining tail is bounded by a geometric series, and
    that bound is added on early termination so the result stays an upper
    bound for the full sum.
    """
    if horizon < 1:
        return 0.0
    rate = gap_min * gap_min / (2.0 * n_arms)
    peak = 1.0 / rate
    total = 0.0
    t = 1
    while t <= horizon:
        hi = min(horizon, t + _CHUNK - 1)
        ts = np.arange(t, hi + 1, dtype=np.float64)
        values = 2.0 * n_arms * ts * np.exp(-rate * ts)
        total += float(values.sum())
        last = float(values[-1])
        if hi > peak and last <= _REL_TOL * total:
            ratio = (hi + 1.0) / hi * math.exp(-rate)
            if ratio < 1.0 and hi < horizon:
                total += last * ratio / (1.0 - ratio)  # geometric remainder bound
            break
        t = hi + 1
    return total


# ---------------------------------------------------------------------------
# Upper bounds
# ---------------------------------------------------------------------------

def cucb_pull_bounds(
    summary: InstanceSummary, horizon: int, t0: int
) -> tuple[float, dict[int, float]]:
    """Per-arm pull-count bound components for the correlated index policy:
    the (arm-independent) non-competitive bound and the per-arm competitive
    bounds."""
    n_arms = summary.n_arms
    u_nc = (
        n_arms * t0
        + 2.0 * n_arms**5 * _sum_decreasing(lambda t: t**-2.0, n_arms * t0, horizon)
        + _sum_decreasing(lambda t: 3.0 * t**-3.0, 1, horizon)
    )
    exp_tail = _sum_exp_tail(horizon, n_arms, summary.gap_min)
    u_c = {}
    for k in sorted(summary.competitive_suboptimal):
        gap_sq = float(summary.gaps[k]) ** 2
        u_c[k] = 8.0 * math.log(horizon) / gap_sq + (1.0 + math.pi**2 / 3.0) + exp_tail
    return u_nc, u_c


def cts_pull_bounds(
    summary: InstanceSummary, horizon: int, tb: int, beta: float
) -> tuple[float, dict[int, float]]:
    """Pull-count bound components for correlated Gaussian-posterior sampling."""
    n_arms = summary.n_arms
    u_nc = (
        n_arms * tb
        + _sum_decreasing(lambda t: 3.0 * t**-3.0, 1, horizon)
        + n_arms**2
        * _sum_decreasing(
            lambda t: (2.0 * n_arms + 3.0) * (t / n_arms) ** -2.0
            + (t / n_arms) ** (1.0 - 2.0 * beta),
            n_arms * tb,
            horizon,
        )
    )
    exp_tail = _sum_exp_tail(horizon, n_arms, summary.gap_min)
    u_c = {}
    for k in sorted(summary.competitive_suboptimal):
        gap_sq = float(summary.gaps[k]) ** 2
        log_term = max(0.0, math.log(horizon * gap_sq))  # clamped for tiny T*gap^2
        u_c[k] = (
            18.0 * log_term / gap_sq + math.exp(11.0 * beta) + 9.0 / gap_sq + exp_tail
        )
    return u_nc, u_c


def _linear_branch(summary: InstanceSummary, horizon: int) -> float:
    return (1.0 / summary.mu_min - 1.0 / summary.optimal_mean) * horizon


def _assemble_upper(
    summary: InstanceSummary, u_nc: float, u_c: dict[int, float]
) -> float:
    k_star = summary.optimal_arm
    noncompetitive = [
        k
        for k in range(summary.n_arms)
        if k != k_star and k not in summary.competitive_suboptimal
    ]
    pulls = sum(float(summary.gaps[k]) * u_nc for k in noncompetitive)
    pulls += sum(float(summary.gaps[k]) * u_c[k] for k in summary.competitive_suboptimal)
    constant = (1.0 - summary.optimal_mean) / (summary.optimal_mean * summary.mu_min)
    return constant + (1.0 / summary.mu_min - 1.0 / summary.optimal_mean) * pulls


def cucb_upper(summary: InstanceSummary, horizon: int, t0: int | None) -> float:
    """Expected AoI-regret upper bound for the correlated index policy at
    ``horizon``; the linear branch applies up to the burn-in threshold (or
    always, when the threshold is infeasible)."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if t0 is None or horizon <= t0:
        return _linear_branch(summary, horizon)
    u_nc, u_c = cucb_pull_bounds(summary, horizon, t0)
    return _assemble_upper(summary, u_nc, u_c)


def cts_upper(summary: InstanceSummary, horizon: int, beta: float, tb: int | None) -> float:
    """Expected AoI-regret upper bound for correlated Gaussian-posterior
    sampling with variance parameter ``beta``."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not beta > 1.0:
        raise ValueError("beta must be > 1")
    if tb is None or horizon <= tb:
        return _linear_branch(summary, horizon)
    u_nc, u_c = cts_pull_bounds(summary, horizon, tb, beta)
    return _assemble_upper(summary, u_nc, u_c)


# ---------------------------------------------------------------------------
# Lower bound
# ---------------------------------------------------------------------------

def lower_bound(summary: InstanceSummary, params: BoundParams, horizon: int) -> float:
    """AoI-regret lower bound for consistent policies at ``horizon``.

    Zero when no arm is strictly competitive; otherwise the best (largest)
    arm-wise bound, floored at zero where the logarithmic term is still
    negative.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    strict = summary.strictly_competitive
    if not strict:
        return 0.0
    missing = sorted(k for k in strict if k not in params.divergences)
    if missing:
        raise ValueError(
            "missing divergence for strictly competitive arm(s): "
            + ", ".join(str(k) for k in missing)
        )
    log_term = (1.0 - params.alpha) * math.log(horizon) - math.log(4.0 * params.consistency_m)
    value = max(
        float(summary.gaps[k])
        / params.divergences[k]
        * log_term
        / summary.optimal_mean
        for k in strict
    )
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# Report over a horizon grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """Bound curves over a horizon grid, with the burn-in thresholds and the
    per-arm pull-bound components behind the upper bounds."""

    instance_name: str
    horizons: tuple[int, ...]
    alpha: float
    consistency_m: float
    beta: float
    t0: int | None
    tb: int | None
    values: dict[str, np.ndarray]
    u_nc: dict[str, np.ndarray] = field(default_factory=dict)
    u_c: dict[str, dict[int, np.ndarray]] = field(default_factory=dict)

    def rows(self) -> list[tuple]:
        """CSV rows: (kind, horizon, value, t0, tb, beta, alpha, M)."""
        out = []
        for kind in BOUND_KINDS:
            if kind not in self.values:
                continue
            for horizon, value in zip(self.horizons, self.values[kind]):
                out.append(
                    (kind, horizon, float(value), self.t0, self.tb, self.beta,
                     self.alpha, self.consistency_m)
                )
        return out


def evaluate_bounds(
    summary: InstanceSummary,
    params: BoundParams,
    horizons: tuple[int, ...],
    kinds: tuple[str, ...] = BOUND_KINDS,
) -> BoundReport:
    """Evaluate the requested bound kinds over a horizon grid."""
    horizons = tuple(int(h) for h in horizons)
    if not horizons or any(h < 1 for h in horizons):
        raise ValueError("horizons must be positive integers")
    unknown = set(kinds) - set(BOUND_KINDS)
    if unknown:
        raise ValueError(f"unknown bound kinds: {sorted(unknown)}")

    t0 = solve_t0(summary, params.search_cap)
    tb = solve_tb(summary, params.beta, params.search_cap)
    values: dict[str, np.ndarray] = {}
    u_nc: dict[str, np.ndarray] = {}
    u_c: dict[str, dict[int, np.ndarray]] = {}

    if "lower" in kinds:
        values["lower"] = np.array([lower_bound(summary, params, h) for h in horizons])
    if "upper_cucb" in kinds:
        values["upper_cucb"] = np.array([cucb_upper(summary, h, t0) for h in horizons])
        if t0 is not None:
            comps = [cucb_pull_bounds(summary, h, t0) for h in horizons]
            u_nc["cucb"] = np.array([c[0] for c in comps])
            u_c["cucb"] = {
                k: np.array([c[1][k] for c in comps])
                for k in sorted(summary.competitive_suboptimal)
            }
    if "upper_cts" in kinds:
        values["upper_cts"] = np.array(
            [cts_upper(summary, h, params.beta, tb) for h in horizons]
        )
        if tb is not None:
            comps = [cts_pull_bounds(summary, h, tb, params.beta) for h in horizons]
            u_nc["cts"] = np.array([c[0] for c in comps])
            u_c["cts"] = {
                k: np.array([c[1][k] for c in comps])
                for k in sorted(summary.competitive_suboptimal)
            }

    return BoundReport(
        instance_name=summary.instance_name,
        horizons=horizons,
        alpha=params.alpha,
        consistency_m=params.consistency_m,
        beta=params.beta,
        t0=t0,
        tb=tb,
        values=values,
        u_nc=u_nc,
        u_c=u_c,
    )
