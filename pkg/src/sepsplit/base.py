"""Shared exceptions, check reports and vector coercion."""

from dataclasses import dataclass

import numpy as np


class SepSplitError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(SepSplitError, ValueError):
    """Invalid parameters, dimensions or problem definitions."""


class NumericalError(SepSplitError, ArithmeticError):
    """A linear solve or similar numerical kernel broke down."""


class LineSearchError(SepSplitError):
    """Backtracking exhausted its trial budget."""

    def __init__(self, message, trials=None, iteration=None):
        super().__init__(message)
        self.trials = trials
        self.iteration = iteration


class InfeasibleError(SepSplitError):
    """A projection target set turned out to be empty."""


class UnsupportedError(SepSplitError):
    """Operation not available for the given object (e.g. unknown solution set)."""


def as_vector(x, dim=None, name="x"):
    """Return ``x`` as a finite 1-D float64 array, checking its dimension."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ConfigurationError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class Report:
    """Outcome of one numerical check.

    ``passed`` is ``None`` for informational or skipped checks. ``value`` is
    the measured quantity compared against ``tol``.
    """

    name: str
    passed: bool | None
    value: float
    tol: float
    detail: str = ""
    skipped: bool = False

    @property
    def status(self):
        if self.skipped:
            return "SKIP"
        if self.passed is None:
            return "INFO"
        return "PASS" if self.passed else "FAIL"

    def line(self):
        text = f"{self.status:4s} {self.name}: value={self.value:.3e} tol={self.tol:.1e}"
        if self.detail:
            text += f" ({self.detail})"
        return text

    @property
    def ok(self):
        """True unless the check ran and failed."""
        return self.passed is not False
