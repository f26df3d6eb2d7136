"""Single-episode comparison of the configured controllers."""

import click
import pandas as pd

from macro_ranking.cli.common import Experiment, command_config, experiment_options, print_table, with_experiment
from macro_ranking.simhub.sweep import run_controller
from macro_ranking.utils.error_handler import handle_exceptions
from macro_ranking.utils.logger import get_command_logger
from macro_ranking.utils.manifest import write_frame

log = get_command_logger(__name__)

SUMMARY_COLUMNS = ["controller", "mode", "objective", "utility", "violation"]


@click.command("run")
@experiment_options
@click.option("--phi", type=float, default=None, help="Violation cost; overrides intervention.phi.")
@handle_exceptions()
@with_experiment
def run(experiment: Experiment, phi: float | None):
    """Run every configured controller once on the evaluation stream.

    Writes one results row per controller and a per-step trace.
    """
    config = experiment.config
    spec = experiment.intervention(experiment.test, phi)
    source = experiment.forecast_source()

    results, traces = [], []
    for controller in config.controllers:
        log.info(f"Running {controller.label} ({controller.progress_mode})")
        episode = run_controller(
            controller,
            experiment.test,
            spec,
            mode=controller.progress_mode,
            seed=config.seed,
            forecast_source=source,
            n_offline=config.forecast.n_offline,
        )
        results.append({**episode.summary(), "phi": float(spec.phi.max())})
        traces.append(episode.trace_frame())

    frame = pd.DataFrame(results)
    hashed = command_config(config)
    write_frame(frame, experiment.out_dir / "results.csv", "run", hashed, config.seed)
    write_frame(pd.concat(traces, ignore_index=True), experiment.out_dir / "trace.csv", "run", hashed, config.seed)
    print_table(frame, f"Episode results (phi={float(spec.phi.max()):g})", SUMMARY_COLUMNS)
