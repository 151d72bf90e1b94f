"""Command line entry point ``cylstable``.

Exit status: 0 when every verdict passes, 1 when one fails, 2 for a rejected
configuration (unknown key, failed hypothesis gate), 3 when a computation
raised.
"""

from __future__ import annotations

import sys
import traceback

import click

from ..errors import ConfigError, CylStableError, GateError
from .acceptance import run_acceptance
from .config import DEFAULT_TOLERANCES, ExperimentConfig, load_config, tomllib
from .experiments import run
from .report import write_report

__all__ = ["main"]


def _origin(exc: BaseException) -> str:
    """Dotted module of the innermost package frame that raised ``exc``."""
    mod = "cylstable"
    for frame in traceback.extract_tb(exc.__traceback__):
        path = frame.filename.replace("\\", "/")
        if "/cylstable/" in path:
            tail = path.split("/cylstable/", 1)[1].rsplit(".", 1)[0]
            mod = "cylstable." + tail.replace("/", ".")
    return mod


def _options(f):
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                     show_default=True, help="Table format.")(f)
    f = click.option("--threads", type=click.IntRange(min=1), default=None,
                     help="Monte Carlo threads (results do not depend on it).")(f)
    f = click.option("--out", type=click.Path(file_okay=False), default="cylstable-out",
                     show_default=True, help="Output directory.")(f)
    f = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None,
                     help="Random seed (unsigned 64-bit).")(f)
    f = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="TOML experiment configuration.")(f)
    return f


def _finish(report, out, fmt):
    write_report(report, out, fmt)
    click.echo(report.summary(), nl=False)
    click.echo(f"wrote {out}")
    sys.exit(0 if report.passed else 1)


def _guarded(fn):
    try:
        return fn()
    except (ConfigError, GateError) as exc:
        raise click.UsageError(str(exc)) from exc
    except CylStableError as exc:
        click.echo(f"error in {_origin(exc)}: {type(exc).__name__}: {exc}", err=True)
        sys.exit(3)


def _experiment_command(kind):
    @_options
    def cmd(config_path, seed, out, threads, fmt):
        def go():
            if config_path is not None:
                cfg = load_config(config_path)
                if cfg.experiment != kind:
                    raise ConfigError(f"config describes {cfg.experiment!r}, not {kind!r}")
            else:
                cfg = ExperimentConfig(kind)
            cfg = cfg.with_overrides(seed=seed, threads=threads)
            return run(cfg)

        _finish(_guarded(go), out, fmt)

    cmd.__doc__ = f"Run a {kind} experiment."
    return click.command(kind)(cmd)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Experiments on SDEs driven by cylindrical alpha-stable noise."""


for _kind in ("simulate", "kernel", "besov", "semigroup-scaling", "kolmogorov", "density"):
    main.add_command(_experiment_command(_kind))


@main.command("all-acceptance")
@_options
@click.option("--only", default=None, help="Comma-separated criterion numbers to run.")
def all_acceptance(config_path, seed, out, threads, fmt, only):
    """Run acceptance criteria 1 to 13 (criterion 14 compares two runs' CSVs).

    A --config file may only contain a [tolerances] table.
    """
    def go():
        tol = None
        if config_path is not None:
            with open(config_path, "rb") as fh:
                try:
                    data = tomllib.load(fh)
                except tomllib.TOMLDecodeError as exc:
                    raise ConfigError(str(exc)) from exc
            extra = sorted(set(data) - {"tolerances"})
            if extra:
                raise ConfigError(f"all-acceptance config accepts only [tolerances]; "
                                  f"got {', '.join(extra)}")
            tol = data.get("tolerances", {})
            bad = sorted(set(tol) - set(DEFAULT_TOLERANCES))
            if bad:
                raise ConfigError(f"unknown tolerance keys: {', '.join(bad)}")
        crit = None
        if only:
            try:
                crit = [int(c) for c in only.split(",")]
            except ValueError as exc:
                raise ConfigError(f"--only expects integers, got {only!r}") from exc
        return run_acceptance(42 if seed is None else seed, threads or 1, crit, tol,
                              progress=lambda s: click.echo(f"running {s}", err=True))

    _finish(_guarded(go), out, fmt)


if __name__ == "__main__":
    main()
