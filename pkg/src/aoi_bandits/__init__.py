"""Age-of-Information scheduling over correlated channels.

Models the channel-selection problem as a correlated multi-armed bandit,
provides the six scheduling policies (index-based and posterior-sampling,
each with a correlation-aware variant) plus an AoI-aware wrapper, a seeded
Monte-Carlo regret simulator with a coupled oracle baseline, and numeric
evaluation of the matching lower/upper regret bounds.
"""
from aoi_bandits.instance import (
    UNREACHABLE,
    BanditInstance,
    InstanceError,
    InstanceSummary,
    LatentDistribution,
    PseudoRewardTable,
    arm_means,
    builtin_document,
    builtin_instance,
    classify_arms,
    expected_pseudo_matrix,
    expected_pseudo_reward,
    load_instance,
    pseudo_reward_table,
    sample_state,
    sample_states,
)
from aoi_bandits.policies import (
    ArmStatistics,
    PolicyConfig,
    make_policy,
)
from aoi_bandits.simulator import (
    BaselineMode,
    EnsembleResult,
    EpisodeTrace,
    PullStats,
    RegretCurve,
    SimConfig,
    default_checkpoints,
    episode_streams,
    estimate_regret,
    run_ensemble,
    run_episode,
    step_aoi,
)
from aoi_bandits.bounds import (
    BoundParams,
    BoundReport,
    bernoulli_kl,
    cts_upper,
    cucb_upper,
    evaluate_bounds,
    lower_bound,
    solve_t0,
    solve_tb,
)

__version__ = "0.1.0"

__all__ = [
    "UNREACHABLE",
    "BanditInstance",
    "InstanceError",
    "InstanceSummary",
    "LatentDistribution",
    "PseudoRewardTable",
    "arm_means",
    "builtin_document",
    "builtin_instance",
    "classify_arms",
    "expected_pseudo_matrix",
    "expected_pseudo_reward",
    "load_instance",
    "pseudo_reward_table",
    "sample_state",
    "sample_states",
    "ArmStatistics",
    "PolicyConfig",
    "make_policy",
    "BaselineMode",
    "EnsembleResult",
    "EpisodeTrace",
    "PullStats",
    "RegretCurve",
    "SimConfig",
    "default_checkpoints",
    "episode_streams",
    "estimate_regret",
    "run_ensemble",
    "run_episode",
    "step_aoi",
    "BoundParams",
    "BoundReport",
    "bernoulli_kl",
    "cts_upper",
    "cucb_upper",
    "evaluate_bounds",
    "lower_bound",
    "solve_t0",
    "solve_tb",
    "__version__",
]
