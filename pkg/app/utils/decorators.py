"""
Route decorators: uniform error handling and request validation.
"""
from functools import wraps
from flask import request
from typing import Callable
from .responses import APIResponse, handle_exception
from .errors import ValidationError
from .logger import get_app_logger

logger = get_app_logger()


def api_route(f: Callable) -> Callable:
    """Wrap a view so plain return values become success responses and errors become JSON.

    Usage:
        @api_route
        def list_builtins():
            return {...}
    """
    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            result = f(*args, **kwargs)

            # Already a response (or a (response, status) tuple)
            if hasattr(result, 'status_code') or isinstance(result, tuple):
                return result

            return APIResponse.success(data=result)

        except Exception as e:
            if getattr(e, 'status_code', 500) >= 500:
                logger.error(f"API error in {f.__name__}: {str(e)}", exc_info=True)
            else:
                logger.info(f"Rejected request in {f.__name__}: {str(e)}")
            return handle_exception(e)

    return wrapper


def validate_json(*required_fields):
    """Require a JSON body containing the given fields.

    Usage:
        @validate_json('n', 'mode', 'L')
        def validate():
            data = request.get_json()
    """
    def decorator(f: Callable) -> Callable:
        @wraps(f)
        def wrapper(*args, **kwargs):
            if not request.is_json:
                raise ValidationError("Request body must be JSON")

            data = request.get_json(silent=True)
            if not isinstance(data, dict):
                raise ValidationError("Request body must be a JSON object")

            missing_fields = [field for field in required_fields
                              if field not in data or data[field] is None]
            if missing_fields:
                raise ValidationError(
                    f"Missing required fields: {', '.join(missing_fields)}",
                    details={"missing_fields": missing_fields}
                )

            return f(*args, **kwargs)

        return wrapper
    return decorator
