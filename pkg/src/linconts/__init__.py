"""Constrained Bernoulli bandits: LinConTS, LinCon-KL-UCB, LP core and bound evaluation."""

from ._backend import BACKENDS, default_backend, get_kernels
from ._rng import Xoshiro256
from .algorithms import (
    CountState,
    PosteriorState,
    RoundDecision,
    RunTrace,
    count_update,
    klucb_index,
    linconklucb_round,
    linconts_round,
    posterior_update,
    replay_policy,
    run_policy,
)
from .environment import (
    BanditInstance,
    load_arms_csv,
    normalize_minmax,
    sample_reward_event,
    synth_coupon_like,
    synth_edx_like,
    write_arms_csv,
)
from .exceptions import (
    CsvFormatError,
    DegeneracyError,
    DomainError,
    InfeasibleError,
    InvalidInputError,
    LinContsError,
    ThresholdRangeError,
)
from .lp_core import (
    ArmParams,
    DualCertificate,
    KktReport,
    LpSolution,
    compute_dual_certificate,
    slack_threshold,
    solve_constrained_lp,
    verify_kkt,
)
from .metrics import (
    AggregateSeries,
    MetricSeries,
    aggregate_runs,
    cumulative_reward,
    metric_series,
    regret_series,
    reward_violation_ratio,
    stationary_optimum,
    violation_series,
)
from .theory import (
    ArmAnalysis,
    BoundReport,
    analyze_arm,
    bernoulli_kl,
    choose_thresholds,
    epsilon_one,
    kappa_vector,
    lemma2_bound,
    theorem_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "AggregateSeries",
    "ArmAnalysis",
    "ArmParams",
    "BanditInstance",
    "BoundReport",
    "CountState",
    "CsvFormatError",
    "DegeneracyError",
    "DomainError",
    "DualCertificate",
    "InfeasibleError",
    "InvalidInputError",
    "KktReport",
    "LinContsError",
    "LpSolution",
    "MetricSeries",
    "PosteriorState",
    "RoundDecision",
    "RunTrace",
    "ThresholdRangeError",
    "Xoshiro256",
    "aggregate_runs",
    "analyze_arm",
    "bernoulli_kl",
    "choose_thresholds",
    "compute_dual_certificate",
    "count_update",
    "cumulative_reward",
    "default_backend",
    "epsilon_one",
    "get_kernels",
    "kappa_vector",
    "klucb_index",
    "lemma2_bound",
    "linconklucb_round",
    "linconts_round",
    "load_arms_csv",
    "metric_series",
    "normalize_minmax",
    "posterior_update",
    "regret_series",
    "replay_policy",
    "reward_violation_ratio",
    "run_policy",
    "sample_reward_event",
    "slack_threshold",
    "solve_constrained_lp",
    "stationary_optimum",
    "synth_coupon_like",
    "synth_edx_like",
    "theorem_bounds",
    "verify_kkt",
    "violation_series",
    "write_arms_csv",
]
