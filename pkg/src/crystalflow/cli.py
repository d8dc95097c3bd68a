"""Command-line entry points.

Scenario runs are driven by a JSON config document; flags can override the
seed and the output directory.  Exit codes: 0 success, 2 invalid config,
3 numerical failure (a CrystalflowError raised mid-run), 4 I/O failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .errors import ConfigInvalid, CrystalflowError
from .harness.config import RunConfig
from .harness.runner import run as run_scenario
from .spectral import critical_threshold

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _execute(scenario: str, config_path: str, seed: int | None, out: str | None) -> None:
    try:
        cfg = RunConfig.from_file(config_path)
        if cfg.scenario != scenario:
            raise ConfigInvalid(
                f"config declares scenario {cfg.scenario!r}, command expects {scenario!r}"
            )
        if seed is not None:
            cfg.seed = seed
        if out is not None:
            cfg.out_dir = out
    except ConfigInvalid as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        out_dir = run_scenario(cfg)
    except CrystalflowError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {out_dir}")


def _scenario_command(group, scenario, name=None):
    @group.command(name=name or scenario)
    @click.option("--config", "config_path", required=True, type=click.Path())
    @click.option("--seed", type=int, default=None)
    @click.option("--out", type=click.Path(), default=None)
    def _cmd(config_path, seed, out):
        _execute(scenario, config_path, seed, out)

    return _cmd


@click.group()
def main():
    """Multiscale crystal-surface simulation toolkit."""


_scenario_command(main, "kmc")
_scenario_command(main, "compare")
_scenario_command(main, "h_equation")


@main.group()
def pde():
    """Regularized continuum flow."""


_scenario_command(pde, "pde", name="run")


@main.group()
def meso():
    """Mesoscale step-flow ODE system."""


_scenario_command(meso, "meso", name="run")


@main.group()
def statmech():
    """Equilibrium slope ensembles."""


@statmech.command()
@click.option("--beta", type=float, required=True)
@click.option("--p", type=int, default=2, show_default=True)
@click.option("--u-min", type=float, default=-0.5, show_default=True)
@click.option("--u-max", type=float, default=0.5, show_default=True)
@click.option("--num", type=int, default=11, show_default=True)
@click.option("--kappa", type=float, default=100.0, show_default=True)
@click.option("--out", type=click.Path(), default="out")
def table(beta, p, u_min, u_max, num, kappa, out):
    """Surface tension table over a grid of mean slopes."""
    try:
        cfg = RunConfig.from_dict({
            "scenario": "statmech_table",
            "out_dir": out,
            "parameters": {
                "beta": beta, "p": p, "u_min": u_min, "u_max": u_max,
                "num": num, "kappa": kappa,
            },
        })
    except ConfigInvalid as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        out_dir = run_scenario(cfg)
    except CrystalflowError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"wrote {out_dir}")


@main.group()
def spectral():
    """Fourier-side norms and audits."""


@spectral.command()
@click.option("--traj", "traj_dir", required=True, type=click.Path(exists=True))
@click.option("--s1", type=float, required=True)
@click.option("--s2", type=float, required=True)
@click.option("--out", type=click.Path(), default=None)
def audit(traj_dir, s1, s2, out):
    """Lyapunov and decay audits over a stored snapshot trajectory."""
    try:
        cfg = RunConfig.from_dict({
            "scenario": "spectral_audit",
            "out_dir": out if out is not None else str(Path(traj_dir)),
            "parameters": {"traj_dir": str(traj_dir), "s1": s1, "s2": s2},
        })
        out_dir = run_scenario(cfg)
    except ConfigInvalid as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except FileNotFoundError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except CrystalflowError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"wrote {out_dir}")


@spectral.command()
@click.option("--s", type=float, required=True)
def threshold(s):
    """Critical series threshold y* with f_s(y*) = 1, to 12 digits."""
    try:
        y = critical_threshold(s)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(f"{y:.12f}")
