"""Synthetic dataset command."""

from pathlib import Path

import click

from macro_ranking.cli.common import experiment_options, load_config
from macro_ranking.core.exceptions import ConfigurationError
from macro_ranking.simhub.datasets import write_csv
from macro_ranking.simhub.synthetic import generate_synthetic
from macro_ranking.utils.error_handler import handle_exceptions
from macro_ranking.utils.logger import get_command_logger
from macro_ranking.utils.manifest import write_manifest

log = get_command_logger(__name__)


@click.command("synth")
@experiment_options
@click.option("--horizon", type=int, default=None, help="Override the synthetic horizon.")
@handle_exceptions()
def synth(
    config_path: Path | None,
    seed: int | None,
    progress_mode: str | None,
    workers: int | None,
    out_dir: Path | None,
    horizon: int | None,
):
    """Write the synthetic contexts and groups CSVs.

    The files are identical for a fixed configuration and seed.
    """
    extra = {"dataset": {"synthetic": {"horizon": horizon}}} if horizon is not None else None
    config = load_config(config_path, seed, progress_mode, workers, out_dir, extra)
    if config.dataset.source != "synthetic":
        raise ConfigurationError("synth needs dataset.source = synthetic")

    stream = generate_synthetic(config.dataset.synthetic, seed=config.seed)
    directory = config.output.directory
    contexts_path, groups_path = directory / "contexts.csv", directory / "groups.csv"
    try:
        write_csv(stream, contexts_path, groups_path)
    except OSError as e:
        raise ConfigurationError(f"cannot write to {directory}: {e}", cause=e) from e

    hashed = config.dataset.model_dump(mode="json")
    for path in (contexts_path, groups_path):
        write_manifest(path, "synth", hashed, config.seed, {"checksum": stream.checksum()})
    log.info(f"Synthetic stream checksum {stream.checksum()}")
    click.secho(f"Wrote {stream.T} steps of {stream.n} items to {contexts_path}", fg="green")
    click.echo(f"Groups: {groups_path}")
