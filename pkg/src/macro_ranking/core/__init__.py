"""Domain types, metrics, and exceptions."""

from macro_ranking.core.exceptions import (
    ConfigurationError,
    DatasetError,
    DecompositionError,
    ForecastError,
    MacroRankingError,
    SolverError,
    ValidationError,
)
from macro_ranking.core.metrics import (
    dcg_weights,
    episode_objective,
    progress,
    rr_weights,
    utility,
    violation_cost,
)
from macro_ranking.core.types import (
    Context,
    InterventionSpec,
    Permutation,
    PositionWeights,
    ProgressState,
    RankingPolicy,
)

__all__ = [
    "ConfigurationError",
    "Context",
    "DatasetError",
    "DecompositionError",
    "ForecastError",
    "InterventionSpec",
    "MacroRankingError",
    "Permutation",
    "PositionWeights",
    "ProgressState",
    "RankingPolicy",
    "SolverError",
    "ValidationError",
    "dcg_weights",
    "episode_objective",
    "progress",
    "rr_weights",
    "utility",
    "violation_cost",
]
