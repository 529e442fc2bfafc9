"""Exception types shared across the package."""

from __future__ import annotations


class MtlabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(MtlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class FunctionalOverflowError(MtlabError, OverflowError):
    """The exponent of the growth function exceeded the overflow guard."""

    def __init__(self, x: float, guard: float) -> None:
        self.x = x
        self.guard = guard
        super().__init__(f"exponent {x:.6g} exceeds overflow guard {guard:.6g}")


class AccuracyError(MtlabError, ArithmeticError):
    """Adaptive refinement stopped before reaching the requested tolerance.

    Carries the best available estimate so callers can still inspect it.
    """

    def __init__(self, message: str, estimate: float, error: float) -> None:
        self.estimate = estimate
        self.error = error
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")


class DegenerateProfileError(MtlabError, ValueError):
    """A profile with zero or non-finite energy cannot be normalized."""


class UnsupportedPoleError(MtlabError, ValueError):
    """Off-center Green-function poles are only available in dimension two."""


class SingularityError(MtlabError, ValueError):
    """Evaluation requested at the pole of a Green function."""


class ConstructionError(MtlabError, RuntimeError):
    """Building a member of the concentrating family failed."""

    def __init__(self, message: str, diagnostics: dict | None = None) -> None:
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class OptimizationFailedError(MtlabError, RuntimeError):
    """Every optimizer seed failed to produce a usable profile."""

    def __init__(self, message: str, seed_reports: list | None = None) -> None:
        self.seed_reports = list(seed_reports or [])
        super().__init__(message)
