"""
Command-line driver: `dilatio run` and `dilatio sweep`.
"""
from pathlib import Path
from typing import List, Optional
import json
import logging
import sys

import click

from .config import settings
from .exceptions import EXIT_CONFIG_ERROR, DilatioException, error_payload
from .runner import exit_code, run_scenario, run_sweep, write_reports, write_sweep
from .scenario import load_config

logger = logging.getLogger(__name__)


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s - %(levelname)s - %(message)s", force=True)


def _split_ids(value: Optional[str]) -> Optional[List[str]]:
    if not value:
        return None
    return [part.strip() for part in value.split(",") if part.strip()]


def _fail(exc: Exception) -> None:
    click.echo(json.dumps(error_payload(exc), default=str), err=True)
    sys.exit(exc.exit_code if isinstance(exc, DilatioException) else EXIT_CONFIG_ERROR)


config_option = click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
                             help="Scenario YAML file")
seed_option = click.option("--seed", type=int, default=None, help="Base seed override")
samples_option = click.option("--samples", type=click.IntRange(min=1), default=None,
                              help="Monte Carlo samples per estimate")
out_option = click.option("--out", type=click.Path(file_okay=False), default=None, help="Report directory")
verbose_option = click.option("--verbose", "-v", is_flag=True, help="Debug logging")


class DilatioGroup(click.Group):
    """Command group whose usage errors exit with the config-error code."""

    def main(self, *args, standalone_mode: bool = True, **kwargs):
        if not standalone_mode:
            return super().main(*args, standalone_mode=False, **kwargs)
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as exc:
            exc.show()
            sys.exit(EXIT_CONFIG_ERROR)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=DilatioGroup)
def main() -> None:
    """Numerical checks of dilation, entropy and concentration inequalities."""


@main.command()
@config_option
@seed_option
@samples_option
@out_option
@click.option("--checks", default=None, help="Comma-separated check ids to run")
@click.option("--sweep", "sweep_spec", default=None, help="Run a parameter sweep instead: check.param=a,b,c")
@verbose_option
def run(config_path: str, seed: Optional[int], samples: Optional[int], out: Optional[str],
        checks: Optional[str], sweep_spec: Optional[str], verbose: bool) -> None:
    """Run a scenario and write report.json and report.csv."""
    _configure_logging(verbose)
    if sweep_spec:
        _sweep(config_path, sweep_spec, seed, samples, out)
        return
    try:
        config = load_config(config_path)
        report = run_scenario(config, seed=seed, samples=samples, checks=_split_ids(checks))
        json_path, csv_path = write_reports(report, config, Path(out) if out else None)
    except DilatioException as exc:
        _fail(exc)
        return
    summary = report.summary()
    click.echo(f"{report.scenario}: {summary['pass']} pass, {summary['fail']} fail, "
               f"{summary['inconclusive']} inconclusive, {len(report.errors)} errors")
    click.echo(f"reports: {json_path} {csv_path}")
    sys.exit(exit_code(report))


def _sweep(config_path: str, sweep_spec: str, seed: Optional[int], samples: Optional[int],
           out: Optional[str]) -> None:
    try:
        config = load_config(config_path)
        frame = run_sweep(config, sweep_spec, seed=seed, samples=samples)
        path = write_sweep(frame, config, Path(out) if out else None)
    except DilatioException as exc:
        _fail(exc)
        return
    click.echo(f"sweep: {len(frame)} rows written to {path}")
    sys.exit(0)


@main.command()
@config_option
@click.argument("parameter")
@seed_option
@samples_option
@out_option
@verbose_option
def sweep(config_path: str, parameter: str, seed: Optional[int], samples: Optional[int], out: Optional[str],
          verbose: bool) -> None:
    """Rerun one check over PARAMETER=a,b,c and write sweep.csv."""
    _configure_logging(verbose)
    _sweep(config_path, parameter, seed, samples, out)


if __name__ == "__main__":
    main()
