"""
Logging configuration for RingSplit.
"""
import os
import logging
from logging.handlers import RotatingFileHandler
import config


def setup_logging(app=None):
    """Configure the front-end and solver loggers."""
    # Ensure log directory exists
    try:
        os.makedirs(config.LOGS_DIR, exist_ok=True)
        log_dir_available = os.access(config.LOGS_DIR, os.W_OK)
    except (PermissionError, OSError):
        log_dir_available = False

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    level = getattr(logging, config.LOG_LEVEL, logging.INFO)

    app_logger = logging.getLogger('ringsplit.app')
    app_logger.setLevel(level)
    app_logger.debug(f"log_dir_available: {log_dir_available}")

    solver_logger = logging.getLogger('ringsplit.solver')
    solver_logger.setLevel(level)

    if log_dir_available and not any(isinstance(h, RotatingFileHandler) for h in app_logger.handlers):
        app_handler = RotatingFileHandler(
            os.path.join(config.LOGS_DIR, 'app.log'),
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5
        )
        app_handler.setFormatter(formatter)
        app_handler.setLevel(level)
        app_logger.addHandler(app_handler)

        solver_handler = RotatingFileHandler(
            os.path.join(config.LOGS_DIR, 'solver.log'),
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5
        )
        solver_handler.setFormatter(formatter)
        solver_handler.setLevel(level)
        solver_logger.addHandler(solver_handler)

    # Console handler for interactive use; solver chatter stays in the file
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    console_handler.setLevel(logging.WARNING)
    if not app_logger.handlers:
        app_logger.addHandler(console_handler)
    if not solver_logger.handlers:
        solver_logger.addHandler(console_handler)

    if app:
        app.logger.handlers = app_logger.handlers
        app.logger.setLevel(level)

    return app_logger, solver_logger


def get_app_logger():
    """Get the front-end (CLI/HTTP) logger."""
    return logging.getLogger('ringsplit.app')


def get_solver_logger():
    """Get the numerical core logger."""
    return logging.getLogger('ringsplit.solver')
