"""
Solver routes: parameter validation and solves over JSON.
"""
import os

from flask import Blueprint, current_app, request

from app.core.runner import RunConfig, run_solve
from app.core.splitting import Mode, validate_params
from app.utils.decorators import api_route, validate_json
from app.utils.errors import ValidationError
from app.utils.file_utils import create_result_dir, save_params
from app.utils.logger import get_app_logger

solver_bp = Blueprint('solver', __name__)
logger = get_app_logger()

# JSON keys accepted by /solver/solve and the RunConfig field they map to
SOLVE_FIELDS = {
    'builtin': 'builtin', 'problem': 'problem', 'seed': 'seed', 'n': 'n', 'd': 'd',
    'algo': 'algo', 'lambda': 'lam', 'gamma': 'gamma', 'tol': 'tol',
    'max_iters': 'max_iters', 'check_period': 'check_period', 'exec': 'execution',
}


def _number(data, key):
    try:
        return float(data[key])
    except (TypeError, ValueError):
        raise ValidationError(f"'{key}' must be a number", details={'field': key})


@solver_bp.route('/validate', methods=['POST'])
@api_route
@validate_json('n', 'mode', 'L', 'lambda', 'gamma')
def validate():
    """Accept/reject lambda and gamma for (n, mode, L) with the active intervals."""
    data = request.get_json()
    try:
        n = int(data['n'])
    except (TypeError, ValueError):
        raise ValidationError("'n' must be an integer", details={'field': 'n'})
    mode = data['mode']
    if mode not in {m.value for m in Mode}:
        raise ValidationError(f"Unknown mode '{mode}'", details={'known': [m.value for m in Mode]})
    check = validate_params(n, mode, _number(data, 'L'), _number(data, 'lambda'), _number(data, 'gamma'))
    return check.to_dict()


@solver_bp.route('/solve', methods=['POST'])
@api_route
def solve():
    """Run a solve on a builtin or inline problem; optionally save the trace under RESULTS_DIR."""
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ValidationError("Request body must be a JSON object")
    unknown = sorted(set(data) - set(SOLVE_FIELDS) - {'save'})
    if unknown:
        raise ValidationError(f"Unknown fields: {', '.join(unknown)}", details={'unknown': unknown})

    cap = current_app.config['SERVICE_MAX_ITERS']
    options = {SOLVE_FIELDS[key]: value for key, value in data.items() if key in SOLVE_FIELDS}
    options.setdefault('max_iters', cap)
    try:
        cfg = RunConfig(**options)
    except ValueError as e:
        raise ValidationError(f"Invalid solve request: {e}")
    if cfg.max_iters > cap:
        raise ValidationError(f"max_iters is capped at {cap} for HTTP requests", details={'cap': cap})

    result_dir = None
    if data.get('save'):
        result_dir = create_result_dir(cfg.builtin or (cfg.problem or {}).get('name', 'problem'))
        cfg.trace_path = os.path.join(result_dir, 'trace.csv')
        cfg.out_path = os.path.join(result_dir, 'final_state.json')

    outcome = run_solve(cfg)
    if result_dir:
        save_params(result_dir, {**outcome.params.to_dict(), 'problem': outcome.spec.name,
                                 'exec': cfg.execution, 'tol': cfg.tol, 'max_iters': cfg.max_iters,
                                 'check_period': cfg.check_period})
        logger.info(f"Saved solve of {outcome.spec.name} to {result_dir}")
    summary = outcome.summary()
    summary['result_dir'] = result_dir
    return summary
