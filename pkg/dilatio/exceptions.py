"""
Exception hierarchy and error payloads for dilatio
"""
from typing import Any, Dict, Optional
import logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG_ERROR = 3


class DilatioException(Exception):
    """Base exception for dilatio"""
    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_FAIL,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ConstructionError(DilatioException):
    """Raised when a body, measure or function is built from invalid parameters"""
    def __init__(self, message: str = "Invalid construction parameters", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_CONFIG_ERROR, details)


class DomainError(DilatioException):
    """Raised when an argument lies outside the operation's domain"""
    def __init__(self, message: str = "Argument outside the domain", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_FAIL, details)


class UnsupportedOperationError(DilatioException):
    """Raised when an operation is not available for the given kind"""
    def __init__(self, message: str = "Operation not supported for this kind", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_FAIL, details)


class DegenerateInputError(DilatioException):
    """Raised when an input makes a functional undefined (e.g. zero total mass)"""
    def __init__(self, message: str = "Degenerate input", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_FAIL, details)


class ConsistencyError(DilatioException):
    """Raised when a claimed smoothness property does not hold at an evaluation point"""
    def __init__(self, message: str = "Claimed smoothness violated", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_FAIL, details)


class QuasiConvexityViolation(DilatioException):
    """Raised when a dilation difference quotient is negative beyond tolerance"""
    def __init__(self, message: str = "Function is not symmetric quasi-convex", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_FAIL, details)


class SamplingError(DilatioException):
    """Raised when a sampler cannot produce draws (e.g. rejection rate too low)"""
    def __init__(self, message: str = "Sampling failed", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_FAIL, details)


class ConfigError(DilatioException):
    """Raised when a scenario config cannot be parsed or resolved"""
    def __init__(self, message: str = "Invalid scenario config", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, EXIT_CONFIG_ERROR, details)


def error_payload(exc: Exception) -> Dict[str, Any]:
    """Render any exception in the report/stderr error format"""
    if isinstance(exc, DilatioException):
        logger.error(f"{exc.__class__.__name__}: {exc.message} - Details: {exc.details}")
        return {
            "error": {
                "message": exc.message,
                "type": exc.__class__.__name__,
                "details": exc.details
            }
        }
    logger.error(f"Unexpected error: {exc}")
    return {
        "error": {
            "message": str(exc),
            "type": exc.__class__.__name__,
            "details": {}
        }
    }
