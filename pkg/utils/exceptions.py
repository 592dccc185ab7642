"""
Custom exceptions for the flow map laboratory.
Each exception carries the process exit code the CLI reports for it.
"""


class FlowMapBaseException(Exception):
    """Base exception for all flow map laboratory errors."""
    exit_code = 1


class ConfigurationError(FlowMapBaseException):
    """Raised when an experiment config or checkpoint reference is invalid."""
    exit_code = 2


class ValidationError(ConfigurationError):
    """Raised when argument validation fails."""
    pass


class DomainError(FlowMapBaseException, ValueError):
    """Raised when a time or schedule argument lies outside its domain."""
    exit_code = 2


class UsageError(FlowMapBaseException):
    """Raised when an operation is called with unusable inputs."""
    exit_code = 2


class NumericError(FlowMapBaseException):
    """
    Raised when a computation produces non-finite values.

    Attributes:
        layer: Offending network layer index, if known
        step: Offending integration or training step, if known
        node: Name of the graph node that produced the value, if known
    """
    exit_code = 3

    def __init__(self, message: str, layer=None, step=None, node=None):
        details = []
        if layer is not None:
            details.append(f"layer={layer}")
        if step is not None:
            details.append(f"step={step}")
        if node is not None:
            details.append(f"node={node}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)
        self.layer = layer
        self.step = step
        self.node = node


class AcceptanceError(FlowMapBaseException):
    """Raised when an oracle or acceptance check fails."""
    exit_code = 4


class InternalError(FlowMapBaseException):
    """Raised when a third-party solver fails unexpectedly."""
    exit_code = 1
