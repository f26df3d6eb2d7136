"""Main CLI entry point for macro ranking experiments."""

import click

from macro_ranking import __version__
from macro_ranking.cli.forecast import forecast
from macro_ranking.cli.run import run
from macro_ranking.cli.sweep import sweep
from macro_ranking.cli.synth import synth
from macro_ranking.cli.tune import tune
from macro_ranking.config.settings import settings
from macro_ranking.utils.error_handler import handle_exceptions
from macro_ranking.utils.logger import get_command_logger, setup_logger

log = get_command_logger(__name__)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="macro-ranking")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging output.")
@handle_exceptions()
def cli(verbose: bool):
    """Macro Ranking CLI - simulate constrained ranking controllers.

    \b
    * synth: write the synthetic dataset
    * run: compare controllers on one episode
    * sweep: compare controllers across violation costs
    * forecast: estimate progress-to-go from the training split
    * tune: grid-search controller hyperparameters
    """
    setup_logger(verbose)
    log.debug(f"Macro Ranking CLI started in {settings.ENVIRONMENT} environment")


cli.add_command(synth)
cli.add_command(run)
cli.add_command(sweep)
cli.add_command(forecast)
cli.add_command(tune)


@cli.command("version")
@handle_exceptions()
def version():
    """Show the current version."""
    click.echo(f"Macro Ranking version: {__version__}")
    click.echo(f"Environment: {settings.ENVIRONMENT}")


@cli.command("info")
@handle_exceptions()
def info():
    """Display the active environment settings."""
    click.echo("Macro Ranking Configuration:")
    click.echo(f"Environment: {settings.ENVIRONMENT}")
    click.echo(f"Output Directory: {settings.OUTPUT_DIR}")
    click.echo(f"Log Level: {settings.LOG_LEVEL}")
    click.echo(f"Workers: {settings.WORKERS}")
    click.echo(f"Monolithic LP limit: {settings.MONOLITHIC_LP_MAX_VARIABLES} variables")


if __name__ == "__main__":
    cli()
