"""Progress-to-go forecasting from offline data and gain tuning."""

from macro_ranking.forecast.bootstrap import ForecastPlan, stratified_bootstrap
from macro_ranking.forecast.offline import (
    OfflinePolicy,
    ProgressToGoTable,
    fit_offline_policy,
    progress_to_go,
    progress_to_go_from_plan,
)
from macro_ranking.forecast.source import ForecastSource
from macro_ranking.forecast.strata import STRATA_KEYS, stream_labels, timeline_labels
from macro_ranking.forecast.tuning import TuningResult, apply_grid_point, default_grid, tune_gain

__all__ = [
    "STRATA_KEYS",
    "ForecastPlan",
    "ForecastSource",
    "OfflinePolicy",
    "ProgressToGoTable",
    "TuningResult",
    "apply_grid_point",
    "default_grid",
    "fit_offline_policy",
    "progress_to_go",
    "progress_to_go_from_plan",
    "stratified_bootstrap",
    "stream_labels",
    "timeline_labels",
    "tune_gain",
]
