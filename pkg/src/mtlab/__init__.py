"""Numerical laboratory for critical exponential-growth problems on the unit ball.

Importing the package pulls in only the closed-form layer; the heavier
numerical modules (profiles, green, bubbles, optimize) load on first
attribute access so that command line runs of the closed-form tools stay
fast.
"""

import importlib

from .core import (
    ProblemParams,
    ball_volume,
    concentration_threshold,
    exp_tail,
    harmonic_number,
    integrand_slope,
    integrand_value,
    moser_constant,
    sphere_measure,
)
from .errors import (
    AccuracyError,
    ConstructionError,
    DegenerateProfileError,
    DomainError,
    FunctionalOverflowError,
    MtlabError,
    OptimizationFailedError,
    SingularityError,
    UnsupportedPoleError,
)

__version__ = "0.1.0"

_SUBMODULES = {"core", "errors", "profiles", "green", "bubbles", "optimize", "cli"}

_LAZY_EXPORTS = {
    "RadialProfile": "profiles",
    "moser_coordinate": "profiles",
    "radius_from_moser": "profiles",
    "DiskGreen": "green",
    "SequenceParams": "bubbles",
    "build_params": "bubbles",
    "bubble_profile": "bubbles",
    "excess_report": "bubbles",
    "sequence_functional": "bubbles",
    "GridObjective": "optimize",
    "OptimizerConfig": "optimize",
    "OptResult": "optimize",
    "continuation_path": "optimize",
    "crossing_estimate": "optimize",
    "lambda_scan": "optimize",
    "maximize": "optimize",
}


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    target = _LAZY_EXPORTS.get(name)
    if target is not None:
        module = importlib.import_module(f".{target}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(set(globals()) | _SUBMODULES | set(_LAZY_EXPORTS))


__all__ = [
    "AccuracyError",
    "ConstructionError",
    "DegenerateProfileError",
    "DiskGreen",
    "DomainError",
    "FunctionalOverflowError",
    "GridObjective",
    "MtlabError",
    "OptResult",
    "OptimizationFailedError",
    "OptimizerConfig",
    "ProblemParams",
    "RadialProfile",
    "SequenceParams",
    "SingularityError",
    "UnsupportedPoleError",
    "ball_volume",
    "bubble_profile",
    "build_params",
    "concentration_threshold",
    "continuation_path",
    "crossing_estimate",
    "excess_report",
    "exp_tail",
    "harmonic_number",
    "integrand_slope",
    "integrand_value",
    "lambda_scan",
    "maximize",
    "moser_constant",
    "moser_coordinate",
    "radius_from_moser",
    "sequence_functional",
    "sphere_measure",
    "__version__",
]
