#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Exceptions raised by the spin_expansion package."""

from typing import Optional

from .const import EXIT_CAP, EXIT_NUMERICAL, EXIT_VALIDATION


class SpinExpansionError(Exception):
    """Base error; `status` is the process exit code the CLI reports."""

    status = EXIT_NUMERICAL

    def __init__(self, message: str, status: Optional[int] = None):
        """Initialize."""
        super().__init__(message)
        if status is not None:
            self.status = status


class ModelError(SpinExpansionError):
    """Raised when a graph or spin model is invalid."""

    status = EXIT_VALIDATION


class ParseError(ModelError):
    """Raised when a model document or option cannot be parsed."""

    def __init__(self, message: str, path: Optional[str] = None):
        """Initialize."""
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path


class AdmissibilityError(ModelError):
    """Raised when parameters fall outside what an operation supports."""


class NumericalError(SpinExpansionError):
    """Raised when a numerical step fails or produces an invalid value."""

    status = EXIT_NUMERICAL


class CapExceededError(SpinExpansionError):
    """Raised when a dimension or state-space cap is exceeded."""

    status = EXIT_CAP

    def __init__(self, cap_name: str, limit: int, requested: int):
        """Initialize."""
        super().__init__(f"{cap_name} exceeded: requested {requested}, limit {limit}")
        self.cap_name = cap_name
        self.limit = limit
        self.requested = requested
