"""
Exception hierarchy shared by the analysis modules and the CLI.

Each class carries the process exit code the command line reports for it.
"""

from typing import Optional


class AnalysisError(Exception):
    """Base class for every failure the CLI knows how to report."""

    exit_code = 1


class ConfigError(AnalysisError):
    """Malformed or incomplete run configuration."""

    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParameterDomainError(ConfigError, ValueError):
    """A closed-form result was requested outside its domain of validity."""


class NumericalError(AnalysisError):
    """A numerical procedure could not certify its result."""

    exit_code = 3


class ContourHitsRoot(NumericalError):
    """The counting contour passes (numerically) through a root."""


class IncompleteRootSearch(NumericalError):
    """Winding count and located roots disagree."""

    def __init__(self, message: str, roots=None, expected: int = 0, found: int = 0):
        super().__init__(message)
        self.roots = roots or []
        self.expected = expected
        self.found = found


class IntegrationError(NumericalError, ValueError):
    """Invalid step selection or non-finite state during integration."""


class UndecidableDynamics(NumericalError):
    """Long-time behaviour could not be classified from the trajectory."""
