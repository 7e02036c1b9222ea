"""
RingSplit Flask Application Factory
"""
from flask import Flask
from werkzeug.middleware.proxy_fix import ProxyFix
import config
import logging


def create_app():
    """Create and configure the Flask application."""
    # Disable werkzeug request logging
    logging.getLogger('werkzeug').setLevel(logging.WARNING)

    app = Flask(__name__)

    # Honour X-Forwarded-* headers when served behind a reverse proxy
    app.wsgi_app = ProxyFix(app.wsgi_app, x_for=1, x_proto=1, x_host=1, x_port=1, x_prefix=1)

    app.config['SECRET_KEY'] = config.SECRET_KEY
    app.config['MAX_CONTENT_LENGTH'] = config.MAX_CONTENT_LENGTH
    app.config['RESULTS_DIR'] = config.RESULTS_DIR
    app.config['SERVICE_MAX_ITERS'] = config.SERVICE_MAX_ITERS

    from app.routes.main import main_bp
    from app.routes.solver import solver_bp

    app.register_blueprint(main_bp)
    app.register_blueprint(solver_bp, url_prefix='/solver')

    # Every error leaves as JSON
    from app.utils.responses import handle_exception

    @app.errorhandler(Exception)
    def json_error_handler(err):
        return handle_exception(err)

    from app.utils.logger import setup_logging
    setup_logging(app)

    return app
