"""Tracking the mean of piecewise stationary sequences from sparse random samples."""

__version__ = "0.1.0"

from .model import (
    MalformedParameterError,
    MeanProfile,
    ParamSet,
    ProfileStructureError,
    SamplingSchedule,
    ValidationResult,
    Violation,
    validate_params,
    validate_profile,
)
from .sequence import RewardFamily, SamplePath, count_samples_upto, generate_path
from .estimators import (
    TrackingTrace,
    WeightVector,
    alpha,
    expand_weights,
    expected_trace,
    recursive_update,
    run_oracle,
    run_recursive,
    weight_square_sum,
)
from .bounds import azuma_bound, chernoff_bound, empirical_tail_vs_bound, known_transitions_success
from .harness import (
    ExperimentConfig,
    GoodEventReport,
    MonteCarloSummary,
    check_good_event,
    run_monte_carlo,
    sweep,
)
from .bandit import BanditConfig, BanditTrace, latch_delay, run_bandit
