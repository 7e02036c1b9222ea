"""
Index and health routes.
"""
from flask import Blueprint, jsonify

from app.core.problems import BUILTINS
from app.core.splitting import ALGO_MODES
from app.utils.decorators import api_route

main_bp = Blueprint('main', __name__)


@main_bp.route('/')
@api_route
def index():
    """Builtin problems, algorithms and endpoints."""
    return {
        'service': 'ringsplit',
        'builtins': [{'name': name, 'description': text} for name, text in sorted(BUILTINS.items())],
        'algorithms': {name: mode.value for name, mode in ALGO_MODES.items()},
        'endpoints': ['GET /health', 'POST /solver/validate', 'POST /solver/solve'],
    }


@main_bp.route('/health')
def health():
    return jsonify({'status': 'ok'})
