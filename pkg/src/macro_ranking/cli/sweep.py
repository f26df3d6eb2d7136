"""Violation-cost sweep command."""

import click

from macro_ranking.cli.common import Experiment, command_config, experiment_options, print_table, with_experiment
from macro_ranking.simhub.sweep import TuningSetup, sweep_phi
from macro_ranking.utils.error_handler import handle_exceptions
from macro_ranking.utils.logger import get_command_logger
from macro_ranking.utils.manifest import write_frame

log = get_command_logger(__name__)


@click.command("sweep")
@experiment_options
@click.option("--tune/--no-tune", default=None, help="Re-tune every (controller, phi) cell on the dev split.")
@handle_exceptions()
@with_experiment
def sweep(experiment: Experiment, tune: bool | None):
    """Run every controller at every phi of the grid and write one long CSV."""
    config = experiment.config
    enabled = config.tuning.enabled if tune is None else tune
    tuning = None
    if enabled:
        tuning = TuningSetup(
            dev_stream=experiment.dev,
            dev_spec=experiment.intervention(experiment.dev),
            grids=config.tuning.grids,
            mode=config.tuning.mode,
            repeats=config.tuning.repeats,
        )

    frame = sweep_phi(
        experiment.test,
        experiment.intervention(experiment.test),
        config.controllers,
        config.intervention.phi_grid,
        seed=config.seed,
        workers=config.workers,
        forecast_source=experiment.forecast_source(),
        n_offline=config.forecast.n_offline,
        tuning=tuning,
    )
    write_frame(frame, experiment.out_dir / "sweep.csv", "sweep", command_config(config), config.seed)
    print_table(frame, "Violation-cost sweep", ["controller", "phi", "objective", "utility", "violation"])
