"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli.py): configuration
problems exit 2, diverged evolutions 3, failed blowup-time extraction
4, and solver-level failures (series, quadrature, root scan) 5.
"""


class SimilabError(Exception):
    """Base class for all package errors."""


class ConfigError(SimilabError):
    """Invalid parameter, config file entry, or CFL violation."""

    exit_code = 2


class DivergenceError(SimilabError):
    """Evolution produced NaN/Inf; carries the step index and time."""

    exit_code = 3

    def __init__(self, message, step=None, tau=None):
        super().__init__(message)
        self.step = step
        self.tau = tau


class ExtractionError(SimilabError):
    """Blowup-time root find failed (no sign change, max iterations)."""

    exit_code = 4

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class SolverError(SimilabError):
    """Series construction, quadrature, or root-scan failure."""

    exit_code = 5


class ResonanceError(SolverError):
    """Frobenius construction requested too close to a resonant index."""
