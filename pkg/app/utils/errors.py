"""
Structured error types shared by the numerical core, the CLI and the HTTP service.
"""


class RingSplitError(Exception):
    """Base class for every structured error."""

    def __init__(self, message: str, code: str = "ERROR", details: dict = None, status_code: int = 400):
        self.message = message
        self.code = code
        self.details = details or {}
        self.status_code = status_code
        super().__init__(self.message)

    def to_dict(self):
        return {
            "message": self.message,
            "code": self.code,
            "details": self.details,
            "status_code": self.status_code
        }


class ValidationError(RingSplitError):
    """Invalid parameters, configuration or problem arity."""

    def __init__(self, message: str, details: dict = None):
        super().__init__(
            message=message,
            code="VALIDATION_ERROR",
            details=details,
            status_code=400
        )


class DimensionError(RingSplitError):
    """A vector does not have the dimension its operator expects."""

    def __init__(self, expected: int, got: int, where: str = "operator"):
        super().__init__(
            message=f"Dimension mismatch in {where}: expected {expected}, got {got}",
            code="DIMENSION_MISMATCH",
            details={"expected": expected, "got": got, "where": where},
            status_code=400
        )


class NonFiniteError(RingSplitError):
    """A vector contains NaN or Inf entries."""

    def __init__(self, where: str = "operator"):
        super().__init__(
            message=f"Non-finite entries in input to {where}",
            code="NON_FINITE",
            details={"where": where},
            status_code=400
        )


class CertificateError(RingSplitError):
    """The (x*, v) certificate passed to build_fixed_point does not close."""

    def __init__(self, residual: float, tolerance: float):
        super().__init__(
            message=f"Certificate residual {residual:.3e} exceeds {tolerance:.1e}",
            code="BAD_CERTIFICATE",
            details={"residual": residual, "tolerance": tolerance},
            status_code=400
        )


class ProtocolError(RingSplitError):
    """A ring channel is missing a message, holds a duplicate, or violates adjacency."""

    def __init__(self, message: str, edge=None, round_number: int = None):
        super().__init__(
            message=message,
            code="PROTOCOL_VIOLATION",
            details={"edge": list(edge) if edge else None, "round": round_number},
            status_code=500
        )


class TraceError(RingSplitError):
    """A trace lacks the data requested from it."""

    def __init__(self, message: str):
        super().__init__(
            message=message,
            code="TRACE_ERROR",
            status_code=400
        )


class OracleError(RingSplitError):
    """No independent oracle applies to the requested problem."""

    def __init__(self, message: str, details: dict = None):
        super().__init__(
            message=message,
            code="ORACLE_UNAVAILABLE",
            details=details,
            status_code=422
        )


class NotFoundError(RingSplitError):
    """Unknown builtin problem or missing problem file."""

    def __init__(self, resource: str = "resource"):
        super().__init__(
            message=f"{resource} not found",
            code="NOT_FOUND",
            status_code=404
        )
