"""Command line interface for :mod:`lumenplan`.

Each scenario in :data:`lumenplan.scenarios.scenario_registry` becomes a
subcommand::

    $ lumenplan safety --out safety.csv
    $ lumenplan backhaul --config backhaul.cfg
    $ lumenplan coverage --heatmap-format pgm --out coverage.pgm
    $ lumenplan materials --print-defaults

Exit codes are 0 on success, 2 for configuration and usage errors, and 3 when
a computation fails numerically or leaves its domain.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Optional

import click
import numpy as np

from .backhaul import BoundaryOutsideDomainError
from .beam import QuadratureError
from .config import ConfigError, RunConfig, default_config, format_defaults, load_config
from .safety import UnsupportedRegimeError, WavelengthDomainError
from .scenarios import Scenario, scenario_registry
from .version import VERSION
from .writers import BINARY_FORMATS, heatmap_registry

__all__ = [
    "main",
    "ConfigurationFailure",
    "NumericFailure",
]

logger = logging.getLogger(__name__)

#: Failures that are reported with exit code 3
NUMERIC_ERRORS = (
    QuadratureError,
    WavelengthDomainError,
    UnsupportedRegimeError,
    BoundaryOutsideDomainError,
    FloatingPointError,
    ZeroDivisionError,
)

LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


class ConfigurationFailure(click.ClickException):
    """An invalid configuration, reported with exit code 2."""

    exit_code = 2


class NumericFailure(click.ClickException):
    """A failed computation, reported with exit code 3."""

    exit_code = 3


@click.group()
@click.version_option(VERSION, prog_name="lumenplan")
@click.option("-v", "--verbose", count=True, help="Log progress (-v) or everything (-vv) to standard error.")
def main(verbose: int) -> None:
    """Plan eye-safe laser-based optical wireless links."""
    logging.basicConfig(
        level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _resolve(
    name: str, config_path: Optional[Path], output_path: Optional[str], heatmap_format: Optional[str]
) -> RunConfig:
    """Load the configuration of a subcommand and apply the command line overrides."""
    try:
        config = load_config(config_path, scenario=name) if config_path is not None else default_config(name)
        overrides: dict[str, Any] = {}
        if output_path is not None:
            overrides["output_path"] = output_path
        if heatmap_format is not None:
            overrides["heatmap_format"] = heatmap_format
        if overrides:
            config = config.updated(overrides)
    except ConfigError as e:
        raise ConfigurationFailure(str(e)) from e
    if name == "coverage" and config.heatmap_format in BINARY_FORMATS and config.output_path == "-":
        raise ConfigurationFailure(f"heatmap_format: {config.heatmap_format} output needs a file, use --out")
    return config


def _execute(scenario: Scenario) -> None:
    """Run a scenario and emit its output once the computation has finished."""
    try:
        with np.errstate(divide="raise", over="raise", invalid="raise"):
            result = scenario.run()
    except NUMERIC_ERRORS as e:
        raise NumericFailure(str(e)) from e
    except ValueError as e:
        raise ConfigurationFailure(str(e)) from e

    output_path = scenario.config.output_path
    if output_path == "-":
        click.echo(result.document, nl=False)
    else:
        Path(output_path).write_bytes(result.document)
        logger.info("wrote %d bytes to %s", len(result.document), output_path)
    for line in result.summary:
        click.echo(line)


def _make_command(name: str, scenario_cls: type[Scenario]) -> click.Command:
    def _command(
        config_path: Optional[Path],
        output_path: Optional[str],
        print_defaults: bool,
        heatmap_format: Optional[str] = None,
    ) -> None:
        if print_defaults:
            click.echo(format_defaults(name), nl=False)
            return
        config = _resolve(name, config_path, output_path, heatmap_format)
        _execute(scenario_registry.make(scenario_cls, config=config))

    _command.__doc__ = scenario_cls.__doc__
    command = click.option("--print-defaults", is_flag=True, help="Print every key with its default and exit.")(
        _command
    )
    command = click.option("--out", "output_path", help="Output file, overriding output_path.")(command)
    command = click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        help="Configuration file. Without it the defaults are used.",
    )(command)
    if name == "coverage":
        command = heatmap_registry.get_option(
            "--heatmap-format", as_string=True, help="Grid format, overriding heatmap_format."
        )(command)
    return click.command(name=name, help=(scenario_cls.__doc__ or "").split("\n")[0])(command)


for _name, _cls in scenario_registry.lookup_dict.items():
    main.add_command(_make_command(_name, _cls))


if __name__ == "__main__":
    main()
