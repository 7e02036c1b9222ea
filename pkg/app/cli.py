"""
Command-line front end: ``solve``, ``validate`` and ``serve``.

Exit codes: 0 converged (solve) or accepted (validate); 2 iteration limit
reached; 1 configuration error or rejected parameters.
"""
import sys

import click

import config
from app.core.problems import BUILTINS, build_problem
from app.core.runner import RunConfig, load_spec, run_solve
from app.core.splitting import ALGO_MODES, Mode, default_gamma, default_params, validate_params
from app.utils.errors import RingSplitError
from app.utils.logger import get_app_logger, setup_logging

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_MAX_ITERS = 2

logger = get_app_logger()


def _fail(message):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_CONFIG_ERROR)


def _problem_options(f):
    f = click.option('--d', 'd', type=int, default=None, help='Dimension for seeded builtins.')(f)
    f = click.option('--n', 'n', type=int, default=None, help='Number of operators A_i for seeded builtins.')(f)
    f = click.option('--seed', type=int, default=config.DEFAULT_SEED, show_default=True,
                     help='Seed for builtins (RINGSPLIT_SEED overrides).')(f)
    f = click.option('--builtin', type=click.Choice(sorted(BUILTINS)), default=None,
                     help='Registered problem name.')(f)
    f = click.option('--problem', 'problem_path', type=str, default=None, help='JSON problem file.')(f)
    return f


@click.group()
def cli():
    """RingSplit: distributed splitting solvers on a ring."""
    setup_logging()


@cli.command()
@_problem_options
@click.option('--algo', type=click.Choice(sorted(ALGO_MODES)), default=None,
              help='fb (cocoercive), frb (lipschitz) or mixed; defaults to the problem mode.')
@click.option('--lambda', 'lam', type=float, default=None, help='Step size lambda.')
@click.option('--gamma', type=float, default=None, help='Relaxation gamma.')
@click.option('--tol', type=float, default=config.DEFAULT_TOL_RESIDUAL_SQ, show_default=True,
              help='Stop when ||z^{k+1} - z^k||^2 <= tol.')
@click.option('--max-iters', type=int, default=config.DEFAULT_MAX_ITERS, show_default=True)
@click.option('--check-period', type=int, default=config.DEFAULT_CHECK_PERIOD, show_default=True)
@click.option('--exec', 'execution', type=click.Choice(['sequential', 'ring']), default='sequential',
              show_default=True)
@click.option('--trace', 'trace_path', type=click.Path(dir_okay=False), default=None, help='Trace CSV output.')
@click.option('--log-messages', 'message_log_path', type=click.Path(dir_okay=False), default=None,
              help='Ring message log (JSON lines).')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None, help='Final state JSON.')
def solve(**options):
    """Run a sequential or ring-simulated solve."""
    try:
        cfg = RunConfig(**options)
        outcome = run_solve(cfg)
    except RingSplitError as e:
        _fail(e.message)
    except (ValueError, OSError) as e:
        _fail(str(e))

    summary = outcome.summary()
    click.echo(f"problem:   {summary['problem']} ({summary['mode']}, exec={cfg.execution})")
    click.echo(f"params:    lambda={outcome.params.lam:.17g} gamma={outcome.params.gamma:.17g}")
    click.echo(f"status:    {summary['status']}")
    click.echo(f"iterations: {summary['iterations']}")
    click.echo(f"residual:  {config.CSV_FLOAT_FORMAT % summary['final_residual_sq']}")
    head = ', '.join(config.CSV_FLOAT_FORMAT % v for v in summary['solution_head'])
    more = ', ...' if summary['dim'] > len(summary['solution_head']) else ''
    click.echo(f"x_1:       [{head}{more}]")
    if summary['oracle_distance'] is not None:
        click.echo(f"oracle:    {summary['oracle']} distance {summary['oracle_distance']:.3e}")
    sys.exit(EXIT_OK if outcome.converged else EXIT_MAX_ITERS)


@cli.command()
@_problem_options
@click.option('--algo', type=click.Choice(sorted(ALGO_MODES)), default=None)
@click.option('--L', 'lipschitz', type=float, default=None, help='Lipschitz constant (max over forwards).')
@click.option('--lambda', 'lam', type=float, default=None)
@click.option('--gamma', type=float, default=None)
def validate(problem_path, builtin, seed, n, d, algo, lipschitz, lam, gamma):
    """Check lambda and gamma against the admissible intervals; no solve is run."""
    try:
        if problem_path or builtin:
            spec = load_spec(RunConfig(problem_path=problem_path, builtin=builtin, seed=seed, n=n, d=d, algo=algo))
            problem = build_problem(spec, check_properties=False)
            n, mode = problem.n, spec.mode
            lipschitz = problem.lipschitz if lipschitz is None else lipschitz
        else:
            if n is None or lipschitz is None:
                _fail("validate needs --n and --L, or a problem source")
            mode = ALGO_MODES[algo or 'fb']
    except RingSplitError as e:
        _fail(e.message)
    except (ValueError, OSError) as e:
        _fail(str(e))

    usable = n >= 2 and lipschitz >= 0
    if lam is None:
        lam = default_params(n, mode, lipschitz).lam if usable else float('nan')
    if gamma is None:
        gamma = default_gamma(n, mode, lipschitz, lam) if usable and lam > 0 else float('nan')
    check = validate_params(n, mode, lipschitz, lam, gamma)
    click.echo(f"n={n} mode={Mode(mode).value} L={lipschitz:.17g}")
    click.echo('accept' if check.accepted else f"reject: {check.reason}")
    if check.lambda_rule:
        click.echo(f"lambda in (0, {check.lambda_rule}) = (0, {check.lambda_upper:.6g})")
    if check.gamma_upper is not None:
        click.echo(f"gamma in (0, {check.gamma_rule}) = (0, {check.gamma_upper:.6g})")
    sys.exit(EXIT_OK if check.accepted else EXIT_CONFIG_ERROR)


@cli.command()
@click.option('--host', default=config.HOST, show_default=True)
@click.option('--port', type=int, default=config.PORT, show_default=True)
def serve(host, port):
    """Start the JSON HTTP service."""
    from app import create_app

    app = create_app()
    click.echo(f"RingSplit service on http://{host}:{port}")
    app.run(host=host, port=port, debug=config.DEBUG)
