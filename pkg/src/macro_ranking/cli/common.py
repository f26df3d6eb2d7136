"""Shared plumbing for the experiment commands."""

from __future__ import annotations

import functools
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import click
import numpy as np
import pandas as pd
from loguru import logger
from rich.console import Console
from rich.table import Table

from macro_ranking.config.experiment import ExperimentConfig, load_experiment
from macro_ranking.core.exceptions import ConfigurationError
from macro_ranking.core.types import InterventionSpec, PositionWeights
from macro_ranking.forecast.source import ForecastSource
from macro_ranking.simhub.datasets import ContextStream, load_csv
from macro_ranking.simhub.sweep import target_from_baseline
from macro_ranking.simhub.synthetic import generate_synthetic
from macro_ranking.utils.logger import attach_run_log

console = Console()


def experiment_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Flags shared by every experiment command."""
    options = [
        click.option("--config", "-c", "config_path", type=click.Path(path_type=Path), help="Experiment YAML file."),
        click.option("--seed", type=int, default=None, help="Random seed; overrides the config file."),
        click.option(
            "--progress-mode",
            type=click.Choice(["realized", "expected"]),
            default=None,
            help="Progress accounting for every controller.",
        ),
        click.option("--workers", type=int, default=None, help="Parallel worker processes."),
        click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None, help="Output directory."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_config(
    config_path: Path | None,
    seed: int | None,
    progress_mode: str | None,
    workers: int | None,
    out_dir: Path | None,
    extra: dict[str, Any] | None = None,
) -> ExperimentConfig:
    overrides: dict[str, Any] = {
        "seed": seed,
        "progress_mode": progress_mode,
        "workers": workers,
        "output": {"directory": str(out_dir)} if out_dir is not None else None,
        **(extra or {}),
    }
    return load_experiment(config_path, overrides)


@dataclass(eq=False)
class Experiment:
    """Streams, interventions, and forecast source resolved from a configuration."""

    config: ExperimentConfig
    train: ContextStream
    dev: ContextStream
    test: ContextStream

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> Experiment:
        if config.dataset.source == "synthetic":
            stream = generate_synthetic(config.dataset.synthetic, seed=config.seed)
        else:
            assert config.dataset.contexts is not None and config.dataset.groups is not None
            stream = load_csv(config.dataset.contexts, config.dataset.groups)
        if config.dataset.shuffle:
            logger.info(f"Shuffling {stream.T} contexts with seed {config.seed}")
            stream = stream.shuffled(config.seed)
        if config.split.enabled:
            train, dev, test = stream.split(config.split.ratios)
        else:
            train = dev = test = stream
        return cls(config=config, train=train, dev=dev, test=test)

    @property
    def out_dir(self) -> Path:
        return self.config.output.directory

    def weights(self, n: int) -> PositionWeights:
        cutoff = self.config.intervention.cutoff_k
        if cutoff is None and self.config.dataset.source == "synthetic":
            cutoff = self.config.dataset.synthetic.cutoff_k
        return PositionWeights.for_metrics(n, cutoff)

    def intervention(self, stream: ContextStream, phi: float | None = None) -> InterventionSpec:
        """Targets and costs for ``stream``, which may be any of the splits."""
        iv = self.config.intervention
        weights = self.weights(stream.n)
        cost = np.full(stream.m, iv.phi if phi is None else phi)
        if iv.tau is not None:
            if len(iv.tau) != stream.m:
                raise ConfigurationError(f"intervention.tau has {len(iv.tau)} entries for {stream.m} constraints")
            tau = np.asarray(iv.tau, dtype=np.float64) * stream.T / self.test.T
        elif iv.baseline_factors is not None:
            base = InterventionSpec(tau=np.zeros(stream.m), phi=cost, horizon_T=stream.T, weights=weights)
            tau = target_from_baseline(stream, base, iv.baseline_factors)
        else:
            share = iv.target_share if iv.target_share is not None else self.config.dataset.synthetic.target_share
            tau = np.full(stream.m, share * stream.T)
        return InterventionSpec(tau=tau, phi=cost, horizon_T=stream.T, weights=weights)

    def forecast_source(self) -> ForecastSource:
        fc = self.config.forecast
        if fc.method == "oracle":
            return ForecastSource(method="oracle", seed=self.config.seed)
        return ForecastSource(method="bootstrap", train=self.train, strata_key=fc.strata, seed=self.config.seed)


def print_table(frame: pd.DataFrame, title: str, columns: list[str] | None = None) -> None:
    """Render ``frame`` as a rich table on stdout."""
    table = Table(title=title)
    shown = columns or list(frame.columns)
    for column in shown:
        table.add_column(column, justify="right" if pd.api.types.is_numeric_dtype(frame[column]) else "left")
    for _, row in frame.iterrows():
        table.add_row(*(f"{row[c]:.4f}" if isinstance(row[c], float) else str(row[c]) for c in shown))
    console.print(table)


def command_config(config: ExperimentConfig) -> dict[str, Any]:
    """JSON-compatible configuration hashed into manifests."""
    return config.model_dump(mode="json", exclude={"workers", "output"})


def with_experiment(func: Callable[..., Any]) -> Callable[..., Any]:
    """Resolve the shared flags into an ``Experiment`` passed as the first argument."""

    @functools.wraps(func)
    def wrapper(
        config_path: Path | None,
        seed: int | None,
        progress_mode: str | None,
        workers: int | None,
        out_dir: Path | None,
        **kwargs: Any,
    ) -> Any:
        config = load_config(config_path, seed, progress_mode, workers, out_dir)
        experiment = Experiment.from_config(config)
        sink = attach_run_log(experiment.out_dir / f"{func.__name__}.log")
        try:
            return func(experiment, **kwargs)
        finally:
            logger.remove(sink)

    return wrapper
