"""Command-line entry point.

Usage:
    depsym list                          # preset catalog
    depsym preset IIC2-squeezer --out o  # run a preset, write reports to o/
    depsym run scenario.json --out o     # run a JSON scenario
    depsym validate scenario.json        # parse and validate only
"""
from __future__ import annotations

import sys

import click

from .presets import get_preset, list_presets
from .scenario import ConfigError, RunResult, load_config, run

_overrides = [
    click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                 help="Directory for report.json, trajectories.csv, forms.csv and scan.csv."),
    click.option("--tol-accept", type=float, default=None, help="Defect below which a check holds."),
    click.option("--tol-reject", type=float, default=None, help="Defect above which a check is broken."),
    click.option("--cutoff-bump", type=click.IntRange(min=0), default=None,
                 help="Extra Fock levels for the truncation leakage check."),
    click.option("--grid-points", type=click.IntRange(min=1), default=None, help="Number of time points."),
]


def with_overrides(fn):
    for opt in reversed(_overrides):
        fn = opt(fn)
    return fn


def _apply(cfg, tol_accept, tol_reject, cutoff_bump, grid_points):
    try:
        return cfg.with_overrides(accept=tol_accept, reject=tol_reject, cutoff_bump=cutoff_bump,
                                  points=grid_points)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def _summarize(result: RunResult, out) -> None:
    rep = result.report
    click.echo(f"scenario {rep['scenario']}: {rep['status']} ({rep['elapsed_s']:.2f} s)")
    for c in rep["checks"]:
        mark = "ok  " if c["passed"] else "FAIL"
        detail = c.get("error") or f"expected {c['expected']}, observed {c['observed']}"
        click.echo(f"  [{mark}] {c['check']}: {detail}")
    for cl in rep.get("claims", []):
        if "statement" in cl:
            click.echo(f"  claim '{cl['claim']}': {cl['statement']} (max defect {cl['max_defect']:.3e})")
    if out:
        click.echo(f"  reports written to {out}")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Check dependent symmetries and constants of reduced open dynamics."""


@main.command("list")
def list_cmd():
    """List the built-in presets."""
    for name, desc in list_presets().items():
        click.echo(f"{name:26s} {desc}")


@main.command()
@click.argument("name")
@with_overrides
def preset(name, out, tol_accept, tol_reject, cutoff_bump, grid_points):
    """Run the preset NAME."""
    try:
        cfg = get_preset(name)
    except KeyError as exc:
        raise click.UsageError(exc.args[0]) from None
    cfg = _apply(cfg, tol_accept, tol_reject, cutoff_bump, grid_points)
    result = run(cfg, out)
    _summarize(result, out)
    sys.exit(result.exit_code)


@main.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@with_overrides
def run_cmd(config, out, tol_accept, tol_reject, cutoff_bump, grid_points):
    """Run the JSON scenario CONFIG."""
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        click.echo(f"{config}:\n{exc}", err=True)
        sys.exit(2)
    cfg = _apply(cfg, tol_accept, tol_reject, cutoff_bump, grid_points)
    result = run(cfg, out)
    _summarize(result, out)
    sys.exit(result.exit_code)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
def validate(config):
    """Parse and validate CONFIG without running it."""
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        click.echo(f"{config}:\n{exc}", err=True)
        sys.exit(2)
    click.echo(f"{config}: valid scenario {cfg.name!r}")


if __name__ == "__main__":  # pragma: no cover
    main()
