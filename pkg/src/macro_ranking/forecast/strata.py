"""Named stratum presets mapping a stream position to a label."""

from __future__ import annotations

from collections.abc import Callable

from macro_ranking.core.exceptions import ConfigurationError, ForecastError
from macro_ranking.simhub.datasets import ContextStream

# (position in stream, step value, stream length) -> label
StratumFn = Callable[[int, int, int], str]


def _uniform(index: int, t: int, length: int) -> str:
    return "all"


def _hour_of_day(index: int, t: int, length: int) -> str:
    return str(t % 24)


def _day_of_week(index: int, t: int, length: int) -> str:
    return str((t // 24) % 7)


def _half(index: int, t: int, length: int) -> str:
    return "first" if 2 * index < length else "second"


STRATA_PRESETS: dict[str, StratumFn] = {
    "uniform": _uniform,
    "hour_of_day": _hour_of_day,
    "day_of_week": _day_of_week,
    "half": _half,
}

STRATA_KEYS = (*STRATA_PRESETS, "stratum")


def stream_labels(stream: ContextStream, strata_key: str) -> list[str]:
    """Stratum label of every step of ``stream``.

    ``stratum`` reads the labels carried by the stream itself; the other
    keys are computed from the step value or the position in the stream.
    """
    if strata_key == "stratum":
        if stream.labels is None:
            raise ForecastError("strata key 'stratum' needs a stream with stratum labels")
        return list(stream.labels)
    if strata_key not in STRATA_PRESETS:
        raise ConfigurationError(f"unknown strata key {strata_key!r}; choose from {list(STRATA_KEYS)}")
    fn = STRATA_PRESETS[strata_key]
    return [fn(i, ctx.t, stream.T) for i, ctx in enumerate(stream.contexts)]


def timeline_labels(timeline: ContextStream | int, strata_key: str) -> list[str]:
    """Labels of the target timeline, given as a stream or as a horizon ``T``.

    A bare horizon stands for steps ``1..T``.
    """
    if isinstance(timeline, ContextStream):
        return stream_labels(timeline, strata_key)
    if strata_key == "stratum":
        raise ForecastError("strata key 'stratum' needs the target stream, not only its horizon")
    if strata_key not in STRATA_PRESETS:
        raise ConfigurationError(f"unknown strata key {strata_key!r}; choose from {list(STRATA_KEYS)}")
    fn = STRATA_PRESETS[strata_key]
    return [fn(i, i + 1, timeline) for i in range(timeline)]
