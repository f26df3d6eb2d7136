"""Hyperparameter tuning command."""

import click
import pandas as pd

from macro_ranking.cli.common import Experiment, command_config, experiment_options, print_table, with_experiment
from macro_ranking.forecast.tuning import default_grid, is_tunable, tune_gain
from macro_ranking.simhub.sweep import grid_factory
from macro_ranking.utils.error_handler import handle_exceptions
from macro_ranking.utils.logger import get_command_logger
from macro_ranking.utils.manifest import write_frame

log = get_command_logger(__name__)


@click.command("tune")
@experiment_options
@handle_exceptions()
@with_experiment
def tune(experiment: Experiment):
    """Grid-search every tunable controller at every phi on the dev split.

    Writes the full grid log and the best parameters per (controller, phi).
    """
    config = experiment.config
    source = experiment.forecast_source()
    dev_spec = experiment.intervention(experiment.dev)

    log_rows, best_rows = [], []
    for controller in config.controllers:
        grid = config.tuning.grids.get(controller.kind) or default_grid(controller.kind)
        if not is_tunable(grid):
            log.info(f"Skipping {controller.label}: nothing to tune")
            continue
        for phi in config.intervention.phi_grid:
            spec = dev_spec.with_phi(phi)
            factory = grid_factory(controller, experiment.dev, spec, source, config.forecast.n_offline)
            result = tune_gain(
                experiment.dev,
                factory,
                grid,
                spec,
                mode=config.tuning.mode,
                repeats=config.tuning.repeats,
                seed=config.seed,
            )
            for record in result.records:
                log_rows.append({"controller": controller.label, "phi": phi, **record})
            best_rows.append(
                {"controller": controller.label, "phi": phi, "objective": result.best_objective, **result.best}
            )

    if not best_rows:
        click.secho("No configured controller has hyperparameters to tune.", fg="yellow")
        return
    hashed = command_config(config)
    write_frame(pd.DataFrame(log_rows), experiment.out_dir / "tuning_log.csv", "tune", hashed, config.seed)
    best = pd.DataFrame(best_rows)
    write_frame(best, experiment.out_dir / "tuned.csv", "tune", hashed, config.seed)
    print_table(best, "Tuned parameters")
