"""
Command-line entry point for HydroDeep.

This module sets up the click group with all commands and maps errors to
exit codes: 0 success, 1 usage or configuration, 2 data, 3 numeric
verification.
"""
import sys
from typing import List, Optional

import click

from hydrodeep import __version__
from hydrodeep.cli.commands.data import generate
from hydrodeep.cli.commands.training import compare, evaluate, sweep_lag, train
from hydrodeep.cli.commands.transfer import transfer
from hydrodeep.cli.commands.verification import gradcheck
from hydrodeep.config.logging import configure_logging
from hydrodeep.utils.exceptions import HydroDeepError


class HydroDeepGroup(click.Group):
    """Click group that turns application errors into one-line diagnostics."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except HydroDeepError as e:
            click.echo(f"Error: {e.message}", err=True)
            ctx.exit(e.exit_code)
        except click.UsageError as e:
            e.show()
            ctx.exit(1)


@click.group(cls=HydroDeepGroup)
@click.version_option(__version__, prog_name="hydrodeep")
@click.option("--log-level", default=None, help="Log level; defaults to HYDRODEEP_LOG_LEVEL.")
def cli(log_level: Optional[str]) -> None:
    """HydroDeep river discharge prediction with transfer across watersheds."""
    configure_logging(log_level)


cli.add_command(generate)
cli.add_command(train)
cli.add_command(evaluate)
cli.add_command(sweep_lag)
cli.add_command(compare)
cli.add_command(transfer)
cli.add_command(gradcheck)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the command line and return its exit code.

    Args:
        argv (Optional[List[str]]): Arguments without the program name;
            defaults to ``sys.argv[1:]``.

    Returns:
        int: Process exit code.
    """
    try:
        result = cli.main(args=argv, prog_name="hydrodeep", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 1
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
