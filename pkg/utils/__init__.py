"""Utilities package for the flow map laboratory."""

from .logger import attach_run_log, detach_run_log, get_logger
from .exceptions import (
    FlowMapBaseException,
    ConfigurationError,
    ValidationError,
    DomainError,
    UsageError,
    NumericError,
    AcceptanceError,
    InternalError
)

__all__ = [
    'get_logger',
    'attach_run_log',
    'detach_run_log',
    'FlowMapBaseException',
    'ConfigurationError',
    'ValidationError',
    'DomainError',
    'UsageError',
    'NumericError',
    'AcceptanceError',
    'InternalError'
]
