"""
Command-line interface for tsirelson_lab.

Usage:
    tsirelson-lab norm --def tsirelson vector.txt      # exact norm
    tsirelson-lab norm --def norm_jn --j 1 --n 2 --cert vector.txt
    tsirelson-lab schreier member --n 1 "{2,3,4}"
    tsirelson-lab average --n 1 --eps 1/4 --k 1
    tsirelson-lab stabilize --n 1 --eps 1/8 --csv results/stabilize.csv
    tsirelson-lab distort theta --theta 1/2 --n 1
    tsirelson-lab oracle-check --support 6 --trials 100 --seed 7

Exit codes: 0 success, 1 usage, 2 domain error, 3 verification failure.
"""
import dataclasses
import logging
import os
import sys
from fractions import Fraction
from typing import Optional, Tuple

import click
import pandas as pd

from . import construct, engine, lab, oracle
from .config import Budgets, Settings, load_experiment_config, load_settings
from .exceptions import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, TsirelsonLabError, VerificationError
from .schreier import fin_set, is_admissible, is_maximal, is_member
from .vectors import format_scalar, format_vector, read_vector_file

logger = logging.getLogger(__name__)

NORM_DEFINITIONS = ["tsirelson", "norm_n", "norm_jn", "seminorm_jn", "schreier", "mixed", "tree"]


class LabGroup(click.Group):
    """Click group that maps package errors onto the documented exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except TsirelsonLabError as e:
            prefix = "Verification failed" if isinstance(e, VerificationError) else "Error"
            click.echo(f"{prefix}: {e}", err=True)
            ctx.exit(e.exit_code)
        except ValueError as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(EXIT_DOMAIN)

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            if not standalone_mode:
                raise
            e.show()
            sys.exit(EXIT_USAGE)
        except click.exceptions.Abort:
            if not standalone_mode:
                raise
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        if standalone_mode:
            sys.exit(rv if isinstance(rv, int) else EXIT_OK)
        return rv


def parse_rational(value: str, name: str) -> Fraction:
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"'{value}' is not an exact rational p/q", param_hint=name)


def parse_set(text: str) -> Tuple[int, ...]:
    """'{2,3,4}', '2,3,4' or '{}' to a sorted tuple."""
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    if not body.strip():
        return ()
    try:
        return fin_set(int(part) for part in body.split(","))
    except ValueError as e:
        raise click.BadParameter(f"'{text}' is not a finite set of positive integers ({e})")


def _settings(ctx: click.Context) -> Settings:
    return ctx.obj


def _emit_frame(frame: pd.DataFrame, csv_path: Optional[str]) -> None:
    click.echo(frame.to_string(index=False))
    if csv_path:
        directory = os.path.dirname(csv_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        frame.to_csv(csv_path, index=False)
        click.echo(f"Wrote {len(frame)} rows to {csv_path}")


@click.group(cls=LabGroup)
@click.option('--verbose', '-v', is_flag=True, help='Log progress at INFO level')
@click.option('--settings', 'settings_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='YAML file with a settings: mapping')
@click.option('--env-file', type=click.Path(dir_okay=False), default=None, help='.env file to load')
@click.pass_context
def cli(ctx: click.Context, verbose: bool, settings_path: Optional[str], env_file: Optional[str]):
    """Exact Tsirelson-type norms, Schreier families and averaging experiments."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )
    ctx.obj = load_settings(settings_path, env_file)


# ---------- norm ----------

def _definition(name: str, n: int, j: int, theta: Fraction, c_rule: str) -> engine.NormDef:
    if name == "tsirelson":
        return engine.tsirelson_def(theta)
    if name == "norm_n":
        return engine.norm_n_def(n)
    if name == "norm_jn":
        return engine.norm_jn_def(j, n)
    if name == "seminorm_jn":
        return engine.seminorm_jn_def(j, n)
    if name == "mixed":
        return engine.mixed_def(engine.COEFFICIENT_RULES[c_rule], theta)
    return engine.tree_def(ratio=theta)


@cli.command()
@click.option('--def', 'definition', type=click.Choice(NORM_DEFINITIONS), default='tsirelson', show_default=True)
@click.option('--n', type=int, default=1, show_default=True, help='Order for norm_n, norm_jn, seminorm_jn')
@click.option('--j', type=int, default=0, show_default=True, help='Terminal residue for norm_jn, seminorm_jn')
@click.option('--theta', default='1/2', show_default=True, help='Weight for tsirelson and mixed, level ratio for tree')
@click.option('--m', type=int, default=1, show_default=True, help='Order of the Schreier norm')
@click.option('--c-rule', type=click.Choice(sorted(engine.COEFFICIENT_RULES)), default='geometric', show_default=True)
@click.option('--cert', is_flag=True, help='Print and re-check the optimal tree')
@click.argument('vectorfile', type=click.Path(dir_okay=False))
@click.pass_context
def norm(ctx, definition, n, j, theta, m, c_rule, cert, vectorfile):
    """Exact norm of the vector in VECTORFILE."""
    settings = _settings(ctx)
    x = read_vector_file(vectorfile)
    if definition == "schreier":
        click.echo(format_scalar(engine.schreier_norm(x, m), settings.decimal_digits))
        return
    norm_def = _definition(definition, n, j, parse_rational(theta, "--theta"), c_rule)
    result = engine.evaluate(x, norm_def, settings)
    click.echo(format_scalar(result.value, settings.decimal_digits))
    if cert:
        checked = engine.check_certificate(x, norm_def, result.certificate)
        if checked != result.value:
            raise VerificationError(f"certificate gives {checked}, norm is {result.value}")
        click.echo(result.certificate.render())


# ---------- schreier ----------

@cli.group()
def schreier():
    """Membership, maximality and admissibility checks."""


def _echo_bool(value: bool) -> None:
    click.echo("true" if value else "false")


@schreier.command()
@click.option('--n', type=int, required=True)
@click.argument('finset')
def member(n, finset):
    """Is FINSET in S_n?"""
    _echo_bool(is_member(parse_set(finset), n))


@schreier.command()
@click.option('--n', type=int, required=True)
@click.argument('finset')
def maximal(n, finset):
    """Is FINSET maximal in S_n?"""
    _echo_bool(is_maximal(parse_set(finset), n))


@schreier.command()
@click.option('--k', type=int, required=True)
@click.option('--scale', type=int, default=1, show_default=True)
@click.argument('sets', nargs=-1, required=True)
def admissible(k, scale, sets):
    """Are SETS (successive, e.g. "{2}" "{3,4}") k-admissible?"""
    _echo_bool(is_admissible([parse_set(s) for s in sets], k, scale))


# ---------- constructions ----------

@cli.command()
@click.option('--n', type=int, required=True)
@click.option('--eps', 'epsilon', required=True, help='Exact rational p/q')
@click.option('--k', type=int, default=1, show_default=True)
@click.option('--relax', is_flag=True, help='Build the tightest average that fits the support budget')
@click.option('--output', '-o', type=click.Path(dir_okay=False), default=None, help='Vector file to write')
@click.pass_context
def average(ctx, n, epsilon, k, relax, output):
    """(n, eps) average (k) of the unit basis, with its verified certificate."""
    settings = _settings(ctx)
    basis = construct.unit_basis(settings.basis_length)
    z, certificate = construct.n_eps_average(basis, n, parse_rational(epsilon, "--eps"), k, settings, relax)
    text = format_vector(z, "\n".join(certificate.summary()))
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
        click.echo("\n".join(certificate.summary()))
        click.echo(f"Wrote average to {output}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option('--n', type=int, default=1, show_default=True)
@click.option('--eps', 'epsilon', default='1/8', show_default=True)
@click.option('--k', type=int, default=3, show_default=True)
@click.option('--relax', is_flag=True)
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Experiment configuration (YAML); overrides the other options')
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), default=None)
@click.pass_context
def stabilize(ctx, n, epsilon, k, relax, config_path, csv_path):
    """Stabilization report: |z|_j^n for 0 <= j <= n on a stabilized vector."""
    settings = _settings(ctx)
    if config_path:
        config = load_experiment_config(config_path)
        _emit_frame(lab.run_experiment(config, settings), csv_path)
        return
    basis = construct.unit_basis(settings.basis_length)
    report = lab.stabilization_experiment(n, parse_rational(epsilon, "--eps"), basis, k, settings, relax)
    _emit_frame(report.to_frame(settings.decimal_digits), csv_path)
    click.echo(f"||z|| = {format_scalar(report.norm_of_z, settings.decimal_digits)}")


@cli.group()
def distort():
    """Distortion experiments."""


@distort.command()
@click.option('--theta', default='1/2', show_default=True)
@click.option('--n', type=int, default=1, show_default=True)
@click.option('--intervals', type=int, default=None, help='Cap on the number of intervals')
@click.option('--averages', type=int, default=None, help='Cap on the number of stacked averages')
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), default=None)
@click.pass_context
def theta(ctx, theta, n, intervals, averages, csv_path):
    """Interval-sum norm against T(S_n, theta^n)."""
    settings = _settings(ctx)
    budget = Budgets.from_settings(settings)
    budget = dataclasses.replace(budget, intervals=intervals or budget.intervals, averages=averages or budget.averages)
    report = lab.theta_distortion_experiment(parse_rational(theta, "--theta"), n, budget, settings)
    _emit_frame(report.to_frame(), csv_path)


@distort.command()
@click.option('--c-rule', type=click.Choice(sorted(engine.COEFFICIENT_RULES)), default='geometric', show_default=True)
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), default=None)
@click.pass_context
def mixed(ctx, c_rule, csv_path):
    """Mixed Tsirelson norm against the Tsirelson norm."""
    settings = _settings(ctx)
    report = lab.mixed_weight_experiment(engine.COEFFICIENT_RULES[c_rule], Budgets.from_settings(settings), settings)
    frame = report.to_frame()
    frame.insert(0, "vector", report.labels)
    _emit_frame(frame, csv_path)


# ---------- oracle ----------

@cli.command('oracle-check')
@click.option('--support', type=int, default=6, show_default=True)
@click.option('--trials', type=int, default=100, show_default=True)
@click.option('--seed', type=int, default=None, help='Defaults to the configured seed')
@click.option('--jobs', type=int, default=None, help='Parallel workers (joblib)')
@click.pass_context
def oracle_check(ctx, support, trials, seed, jobs):
    """Compare the engine with exhaustive enumeration on random vectors."""
    settings = _settings(ctx)
    if jobs is not None:
        settings = dataclasses.replace(settings, jobs=jobs)
    seed = settings.seed if seed is None else seed
    report = oracle.equivalence_sweep(support, trials, seed, settings)
    click.echo(report.summary())
    if not report.ok:
        click.echo(report.mismatch_frame().to_string(index=False), err=True)
        raise VerificationError(f"{report.trials - report.matches} trials disagree")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
