"""
Command-line interface of the verification engine.

Every sub-command writes a machine report (JSON or CSV) to a file and a short
human summary to stdout. Exit codes: 0 when every check in the report passed,
1 on a failed check or an untrusted count, 2 on invalid input.
"""

import json
import logging
import os
from functools import wraps
from typing import Callable, Dict, Optional

import click

from config import get_config
from models.data_models import OutputFormat, RunConfig
from models.exceptions import (
    ConfigError, DegenerateConstraintError, EngineError, GridError, GroupMismatchError,
    NotMorseBottError, OffManifoldError, ProjectionError, SingularActionError
)
from sample_data import read_run_file, gamma_from_dict, list_examples
from utils.logging import setup_logging
from verification_engine import VerificationEngine

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2

INVALID_INPUT = (
    ConfigError, NotMorseBottError, GridError, SingularActionError, GroupMismatchError,
    OffManifoldError, ProjectionError, DegenerateConstraintError
)

SEARCH_FLAGS = {
    'budget': 'max_shots',
    'scan_points': 'scan_points',
    'tol_match': 'match_tol',
    'tol_dedup': 'dedup_radius',
    'tol_refine': 'refine_tol',
}


def parse_floats(_ctx, _param, value: Optional[str]):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma separated numbers, got '{value}'")


def report_options(func: Callable) -> Callable:
    """Options shared by every reporting sub-command."""
    func = click.option('--format', 'output_format', type=click.Choice([f.value for f in OutputFormat]),
                        default=None, help='Report format (default json)')(func)
    func = click.option('-o', '--out', type=click.Path(dir_okay=False), default=None,
                        help='Report path (default <OUTPUT_DIR>/<command>-<target>.<format>)')(func)
    func = click.option('--seed', type=int, default=None, help='Random seed (default from config)')(func)
    return func


def search_options(func: Callable) -> Callable:
    """Budgets and tolerances of the cascade search."""
    func = click.option('--tol-refine', type=float, default=None, help='Bisection tolerance')(func)
    func = click.option('--tol-dedup', type=float, default=None, help='Deduplication radius')(func)
    func = click.option('--tol-match', type=float, default=None, help='Chaining tolerance')(func)
    func = click.option('--scan-points', type=int, default=None, help='Scan grid points per parameter')(func)
    func = click.option('--budget', type=int, default=None, help='Maximum number of shots')(func)
    return func


class Session:
    """Configuration shared by the sub-commands of one invocation."""

    def __init__(self, env: Optional[str], run_file: Optional[str], verbose: bool):
        self.cfg = get_config(env)
        self.run_file = read_run_file(run_file) if run_file else {}
        self.verbose = verbose

    @property
    def run_section(self) -> Dict:
        return self.run_file.get('run', {})

    def seed(self, seed: Optional[int]) -> int:
        if seed is not None:
            return seed
        return int(self.run_section.get('seed', self.cfg.DEFAULT_SEED))

    def output_format(self, value: Optional[str]) -> OutputFormat:
        try:
            return OutputFormat(value or self.run_section.get('format', 'json'))
        except ValueError:
            raise ConfigError(f"unknown output format '{value}'")

    def search_overrides(self, flags: Dict) -> Dict:
        overrides = {key: float(value) for key, value in self.run_file.get('search', {}).items()}
        for flag, field in SEARCH_FLAGS.items():
            if flags.get(flag) is not None:
                overrides[field] = flags[flag]
        return overrides

    def engine(self, seed: int, overrides: Optional[Dict] = None) -> VerificationEngine:
        try:
            return VerificationEngine(self.cfg, seed=seed, search_overrides=overrides)
        except (KeyError, ValueError) as e:
            raise ConfigError(f"invalid search override: {e}")


def guarded(func: Callable) -> Callable:
    """Map engine errors to exit codes."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except INVALID_INPUT as e:
            logger.error(f"{ctx.command.name}: invalid input - {e}")
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_INVALID)
        except EngineError as e:
            logger.error(f"{ctx.command.name}: {type(e).__name__} - {e}")
            click.echo(f"failed: {e}", err=True)
            ctx.exit(EXIT_FAILURE)
    return wrapper


def emit(session: Session, engine: VerificationEngine, command: str, target: Optional[str], body: Dict,
         out: Optional[str], output_format: Optional[str], overrides: Optional[Dict] = None) -> int:
    """Write the report, print a summary and return the exit code."""
    fmt = session.output_format(output_format)
    run = RunConfig(command=command, target=target, seed=engine.seed, overrides=overrides or {},
                    output=out, output_format=fmt)
    path = out or os.path.join(session.cfg.OUTPUT_DIR, f"{command}-{target or 'all'}.{fmt.value}")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    if fmt is OutputFormat.JSON:
        report = engine.export_report(run, body)
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        engine.report_table(command, body).to_csv(path, index=False, float_format='%.12g')

    passed = bool(body.get("passed"))
    click.echo(f"{command} {target or ''}".rstrip() + f": {'PASS' if passed else 'FAIL'}")
    work = engine.get_run_statistics().get(command, {}).get("work")
    if work:
        click.echo("Work: " + ", ".join(f"{count} {name.replace('_', ' ')}" for name, count in sorted(work.items())))
    click.echo(f"Report written to {path}")
    logger.info(f"{command} report written to {path} (passed={passed})")
    return EXIT_OK if passed else EXIT_FAILURE


@click.group()
@click.option('--verbose', is_flag=True, help='Log to stderr as well as to the log files')
@click.option('--env', type=click.Choice(['development', 'production', 'testing', 'default']),
              default=None, help='Configuration profile (default MBH_ENV)')
@click.option('--config', 'run_file', type=click.Path(exists=True, dir_okay=False), default=None,
              help='TOML run file with [run], [search] and [gamma] sections')
@click.pass_context
def cli(ctx, verbose: bool, env: Optional[str], run_file: Optional[str]):
    """Morse-Bott homology, path-space involution, Novikov and moment map checks."""
    try:
        session = Session(env, run_file, verbose)
    except ConfigError as e:
        click.echo(f"error: {e}", err=True)
        ctx.exit(EXIT_INVALID)
    level = logging.DEBUG if verbose or session.cfg.DEBUG else logging.INFO
    setup_logging(session.cfg.LOG_DIR, level=level, console=verbose)
    ctx.obj = session


@cli.command()
@click.pass_obj
def examples(session: Session):
    """List the built-in examples."""
    for row in list_examples():
        click.echo(f"{row['name']:<18} {row['manifold']:<24} {row['description']}")


@cli.command('morse-bott')
@click.argument('example')
@report_options
@click.pass_obj
@guarded
def morse_bott(session: Session, example: str, seed, out, output_format):
    """Hessian kernel check of every critical submanifold."""
    engine = session.engine(session.seed(seed))
    body = engine.run_morse_bott(example)
    for sub in body["submanifolds"]:
        click.echo(f"  {sub['name']:<8} kernel {sorted(set(sub['kernel_dims']))} "
                   f"dim {sub['expected_dim']}: {'ok' if sub['passed'] else sub['diagnostic']}")
    click.get_current_context().exit(emit(session, engine, 'morse-bott', example, body, out, output_format))


@cli.command()
@click.argument('example')
@report_options
@search_options
@click.pass_obj
@guarded
def homology(session: Session, example: str, seed, out, output_format, **flags):
    """Morse-Bott complex and mod-2 Betti numbers of EXAMPLE (name or TOML file)."""
    overrides = session.search_overrides(flags)
    engine = session.engine(session.seed(seed), overrides)
    body = engine.run_homology(example)
    click.echo(f"  generators {len(body['generators'])}, boundary entries {len(body['boundary'])}")
    click.echo(f"  betti {body['betti']}, euler {body['euler']}, d^2 = 0: {body['d_squared_ok']}")
    click.get_current_context().exit(emit(session, engine, 'homology', body["example"], body, out, output_format, overrides))


@cli.command()
@click.argument('example')
@click.option('--seeds', type=int, default=10, show_default=True, help='Number of random starting points')
@click.option('--trajectory', type=click.Path(dir_okay=False), default=None,
              help='Also write the first trajectory as CSV')
@report_options
@click.pass_obj
@guarded
def flow(session: Session, example: str, seeds: int, trajectory: Optional[str], seed, out, output_format):
    """Exponential decay of gradient flow lines of EXAMPLE."""
    from algorithms.flow import write_trajectory_csv

    engine = session.engine(session.seed(seed))
    body = engine.run_flow(example, seeds=seeds)
    if trajectory and engine.trajectories:
        write_trajectory_csv(trajectory, engine.trajectories[0])
    click.echo(f"  {body['checked']} of {body['seeds']} runs checked")
    click.get_current_context().exit(emit(session, engine, 'flow', body["example"], body, out, output_format))


@cli.command()
@click.argument('example')
@click.option('--source', default=None, help='Source generator label')
@click.option('--target', default=None, help='Target generator label')
@click.option('-m', '--cascades', 'm', type=int, default=1, show_default=True, help='Number of cascades')
@report_options
@search_options
@click.pass_obj
@guarded
def cascades(session: Session, example: str, source, target, m: int, seed, out, output_format, **flags):
    """Flow lines with cascades between two generators, or the trichotomy scan when no pair is given."""
    overrides = session.search_overrides(flags)
    engine = session.engine(session.seed(seed), overrides)
    if source is None and target is None:
        body = engine.run_trichotomy(example)
        click.echo(f"  {body['checked']} searches, {len(body['violations'])} violations, "
                   f"{len(body['skipped'])} skipped")
        click.get_current_context().exit(emit(session, engine, 'trichotomy', body["example"], body, out, output_format, overrides))
    if source is None or target is None:
        raise ConfigError("--source and --target must be given together")
    body = engine.run_cascades(example, source, target, m)
    click.echo(f"  {len(body['lines'])} lines with {m} cascades, count mod 2 = {body['count_mod2']}")
    click.get_current_context().exit(emit(session, engine, 'cascades', body["example"], body, out, output_format, overrides))


@cli.command()
@click.option('--kmax', type=int, default=None, help='Highest level k (default KMAX)')
@click.option('--grid', type=int, default=None, help='Grid size N, a power of two (default GRID)')
@click.option('--dim', type=int, default=None, help='Complex dimension n (default COMPLEX_DIM)')
@report_options
@click.pass_obj
@guarded
def involutions(session: Session, kmax, grid, dim, seed, out, output_format):
    """Operator identities, spectra and determinants of the path-space involutions."""
    kmax = session.cfg.KMAX if kmax is None else kmax
    grid = session.cfg.GRID if grid is None else grid
    dim = session.cfg.COMPLEX_DIM if dim is None else dim
    engine = session.engine(session.seed(seed))
    body = engine.run_involutions(kmax, grid, dim)
    for k, spectrum in sorted(body["lemma"]["spectra"].items()):
        click.echo(f"  L_{k}^2 spectrum {spectrum['observed']}")
    for row in body["lemma"]["determinants"]:
        if row["t"] == body["lemma"]["determinants"][0]["t"]:
            click.echo(f"  |det A| k={row['k']}: {row['observed']:.6g} (expected {row['expected']}, "
                       f"claimed {row['claimed']})")
    overrides = {"kmax": kmax, "grid": grid, "dim": dim}
    click.get_current_context().exit(emit(session, engine, 'involutions', f"N{grid}-n{dim}-k{kmax}", body, out, output_format,
                          overrides))


@cli.group()
def novikov():
    """Novikov field arithmetic."""


@novikov.command()
@click.option('--samples', type=int, default=100, show_default=True, help='Random elements per suite')
@report_options
@click.pass_obj
@guarded
def selftest(session: Session, samples: int, seed, out, output_format):
    """Inversion round trips, ring axioms and grading additivity."""
    engine = session.engine(session.seed(seed))
    body = engine.run_novikov(samples=samples, gamma=gamma_from_dict(session.run_file))
    click.echo(f"  {body['samples']} inversions, {body['inversions_failed']} failed; "
               f"grading failures {body['grading_failed']}")
    click.get_current_context().exit(emit(session, engine, 'novikov', 'selftest', body, out, output_format, {"samples": samples}))


@cli.command()
@click.argument('action')
@click.option('--tau', callback=parse_floats, default=None, help='Level tau, comma separated components')
@click.option('--points', type=int, default=20, show_default=True, help='Random points for the identity check')
@report_options
@click.pass_obj
@guarded
def moment(session: Session, action: str, tau, points: int, seed, out, output_format):
    """Moment map identity and hypothesis H2 for ACTION (name or TOML file)."""
    engine = session.engine(session.seed(seed))
    body = engine.run_moment(action, tau=tau, points=points)
    h2 = body["h2"]
    click.echo(f"  identity residual {body['identity']['max_residual']:.2e}")
    click.echo(f"  H2 {'pass' if h2['passed'] else 'fail'} on {len(h2['samples'])} samples, "
               f"quotient dimension {h2['quotient_dim']}")
    overrides = {"tau": list(body["tau"])} if tau is not None else {}
    click.get_current_context().exit(emit(session, engine, 'moment', body["action"], body, out, output_format, overrides))


@cli.command()
@report_options
@click.pass_obj
@guarded
def check(session: Session, seed, out, output_format):
    """Every suite on the built-in examples."""
    engine = session.engine(session.seed(seed))
    body = engine.run_all()
    for name, report in sorted(body["homology"].items()):
        click.echo(f"  homology {name}: betti {report['betti']}")
    click.echo(f"  involutions: {'pass' if body['involutions']['passed'] else 'fail'}")
    click.echo(f"  novikov: {'pass' if body['novikov']['passed'] else 'fail'}")
    click.get_current_context().exit(emit(session, engine, 'check', None, body, out, output_format))


if __name__ == '__main__':
    cli()
