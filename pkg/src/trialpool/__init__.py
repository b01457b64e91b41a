"""Seed-variance analysis and early-stopping policy search over pools of training trials."""

__version__ = "0.1.0"

from .correlation import CorrelationMatrix, CorrelationMethod, checkpoint_correlation_matrix, pearson, spearman
from .earlystop import (
    EarlyStopPolicy,
    OptimizationResult,
    SimulationReport,
    budget_of,
    enumerate_policy,
    enumerate_seed_stopping,
    optimize_policy,
    relative_error_reduction,
    simulate_policy,
    simulate_seed_stopping,
)
from .errors import TrialPoolError
from .expected import ExpectedMaxCurve, expected_max, expected_max_curve
from .metrics import ConfusionCounts, confusion_counts, metric_value
from .seeds import AggregatedStdReport, AnovaResult, aggregated_std, anova_f_test, kde, rank_seeds
from .synthgen import SynthConfig, generate, generate_pool
from .trials import (
    EvalPoint,
    MetricKind,
    SeedAxis,
    SeedGrid,
    TrialPool,
    TrialRecord,
    build_seed_grid,
    read_pool,
    validate_pool,
    value_at_fraction,
)

__all__ = [
    "AggregatedStdReport",
    "AnovaResult",
    "ConfusionCounts",
    "CorrelationMatrix",
    "CorrelationMethod",
    "EarlyStopPolicy",
    "EvalPoint",
    "ExpectedMaxCurve",
    "MetricKind",
    "OptimizationResult",
    "SeedAxis",
    "SeedGrid",
    "SimulationReport",
    "SynthConfig",
    "TrialPool",
    "TrialPoolError",
    "TrialRecord",
    "aggregated_std",
    "anova_f_test",
    "budget_of",
    "build_seed_grid",
    "checkpoint_correlation_matrix",
    "confusion_counts",
    "enumerate_policy",
    "enumerate_seed_stopping",
    "expected_max",
    "expected_max_curve",
    "generate",
    "generate_pool",
    "kde",
    "metric_value",
    "optimize_policy",
    "pearson",
    "rank_seeds",
    "read_pool",
    "relative_error_reduction",
    "simulate_policy",
    "simulate_seed_stopping",
    "spearman",
    "validate_pool",
    "value_at_fraction",
]
