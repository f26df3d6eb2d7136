"""Progress-to-go forecasting command."""

import click

from macro_ranking.cli.common import Experiment, command_config, experiment_options, with_experiment
from macro_ranking.utils.error_handler import handle_exceptions
from macro_ranking.utils.logger import get_command_logger
from macro_ranking.utils.manifest import write_frame

log = get_command_logger(__name__)


@click.command("forecast")
@experiment_options
@handle_exceptions()
@with_experiment
def forecast(experiment: Experiment):
    """Forecast progress-to-go for the evaluation stream from the training split.

    Writes a (b, t, constraint_index, value) table; the manifest records the
    number of offline and online forecasts and the strata key.
    """
    config = experiment.config
    fc = config.forecast
    spec = experiment.intervention(experiment.test)
    log.info(f"Forecasting with {fc.method}: B_off={fc.n_offline}, B_on={fc.n_online}, strata={fc.strata}")
    table = experiment.forecast_source().table(experiment.test, spec, fc.n_offline, fc.n_online)

    path = experiment.out_dir / "progress_to_go.csv"
    write_frame(
        table.to_frame(),
        path,
        "forecast",
        command_config(config),
        config.seed,
        method=fc.method,
        n_offline=fc.n_offline,
        n_online=fc.n_online,
        strata=fc.strata,
    )
    click.secho(f"Wrote {table.B} forecasts of {table.T} steps to {path}", fg="green")
