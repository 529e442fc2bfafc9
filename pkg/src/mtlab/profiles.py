"""Radial profiles on the unit ball in the logarithmic coordinate.

A profile is stored as a piecewise linear function of t = -n log r, the
coordinate in which the Dirichlet energy of radial functions has constant
density.  Knots start at the boundary t = 0 where admissible profiles
vanish, and the profile extends constantly to the right of the last knot.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from . import _kernels
from .core import OVERFLOW_X, ProblemParams, integrand_value, sphere_measure
from .errors import (
    AccuracyError,
    DegenerateProfileError,
    DomainError,
    FunctionalOverflowError,
)

_HEADER_RE = re.compile(r"^# moser-profile n=(\d+)$")


def moser_coordinate(n: int, r: float) -> float:
    """Logarithmic coordinate t = -n log r of a radius in (0, 1]."""
    if not 0.0 < r <= 1.0:
        raise DomainError(f"radius must lie in (0, 1], got {r!r}")
    return -n * math.log(r)


def radius_from_moser(n: int, t: float) -> float:
    """Radius corresponding to the logarithmic coordinate t >= 0."""
    if t < 0.0:
        raise DomainError(f"coordinate must be >= 0, got {t!r}")
    return math.exp(-t / n)


class RadialProfile:
    """Piecewise linear radial profile with zero boundary value."""

    __slots__ = ("n", "knots", "values")

    def __init__(self, n: int, knots, values) -> None:
        if not isinstance(n, int) or n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
        knots = np.ascontiguousarray(knots, dtype=np.float64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size < 2:
            raise DomainError("knots and values must be equal-length 1-d arrays of size >= 2")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(values))):
            raise DomainError("knots and values must be finite")
        if knots[0] != 0.0:
            raise DomainError(f"first knot must sit on the boundary t = 0, got {knots[0]!r}")
        if values[0] != 0.0:
            raise DomainError(f"profile must vanish on the boundary, got {values[0]!r}")
        if np.any(np.diff(knots) <= 0.0):
            raise DomainError("knots must be strictly increasing")
        knots.flags.writeable = False
        values.flags.writeable = False
        self.n = n
        self.knots = knots
        self.values = values

    @classmethod
    def from_radial(cls, n: int, radii, heights) -> "RadialProfile":
        """Build a profile from radius samples; r = 1 must carry height 0."""
        radii = np.asarray(radii, dtype=np.float64)
        heights = np.asarray(heights, dtype=np.float64)
        if radii.ndim != 1 or radii.shape != heights.shape:
            raise DomainError("radii and heights must be equal-length 1-d arrays")
        if np.any(radii <= 0.0) or np.any(radii > 1.0):
            raise DomainError("radii must lie in (0, 1]")
        knots = -n * np.log(radii)
        order = np.argsort(knots)
        return cls(n, knots[order], heights[order])

    @property
    def radii(self) -> np.ndarray:
        """Knot positions converted back to radii, decreasing from 1."""
        return np.exp(-self.knots / self.n)

    def height_at(self, t):
        """Profile height at coordinate t, constant beyond the last knot."""
        return np.interp(t, self.knots, self.values)

    def _require_dimension(self, params: ProblemParams) -> None:
        if params.n != self.n:
            raise DomainError(
                f"profile lives in dimension {self.n}, parameters in {params.n}"
            )

    def _max_exponent(self, params: ProblemParams) -> float:
        peak = float(np.max(np.abs(self.values)))
        return params.beta * peak ** (self.n / (self.n - 1.0))

    def dirichlet_energy(self) -> float:
        """Exact n-Dirichlet energy of the piecewise linear profile."""
        dv = np.abs(np.diff(self.values))
        dt = np.diff(self.knots)
        density = float(np.sum(dv**self.n / dt ** (self.n - 1)))
        return sphere_measure(self.n) * self.n ** (self.n - 1) * density

    def _growth_integral(self, params: ProblemParams, tol: float) -> tuple[float, float]:
        """Raw integral of F(v(t)) e^{-t} over [0, infinity), plus its error."""
        raw, err, status = _kernels.integrate_piecewise(
            self.knots, self.values, params.n, params.m, params.lam, params.beta, tol
        )
        if status == _kernels.STATUS_OVERFLOW:
            raise FunctionalOverflowError(self._max_exponent(params), OVERFLOW_X)
        tail = integrand_value(params, float(self.values[-1])) * math.exp(
            -float(self.knots[-1])
        )
        if status == _kernels.STATUS_NO_CONVERGENCE:
            raise AccuracyError(
                "growth integral did not reach the requested tolerance",
                raw + tail,
                err,
            )
        return raw + tail, err

    def functional_value(self, params: ProblemParams, tol: float = 1e-10) -> float:
        """Integral of the growth integrand over the unit ball."""
        self._require_dimension(params)
        raw, _ = self._growth_integral(params, tol)
        return sphere_measure(self.n) / self.n * raw

    def normalize(self) -> "RadialProfile":
        """Rescale heights so the Dirichlet energy is exactly one."""
        energy = self.dirichlet_energy()
        if not math.isfinite(energy) or energy <= 0.0:
            raise DegenerateProfileError(
                f"cannot normalize a profile with energy {energy!r}"
            )
        return RadialProfile(
            self.n, self.knots, self.values * energy ** (-1.0 / self.n)
        )

    def concentration_fraction(
        self, params: ProblemParams, radius: float = 0.1, tol: float = 1e-10
    ) -> float:
        """Share of the growth integral carried by the ball of given radius."""
        self._require_dimension(params)
        t_split = moser_coordinate(self.n, radius)
        total, _ = self._growth_integral(params, tol)
        t_max = float(self.knots[-1])
        tail_height = float(self.values[-1])
        if t_split >= t_max:
            inner = integrand_value(params, tail_height) * math.exp(-t_split)
        else:
            keep = self.knots > t_split
            sub_knots = np.concatenate(([t_split], self.knots[keep]))
            sub_values = np.concatenate(
                ([float(self.height_at(t_split))], self.values[keep])
            )
            raw, _, status = _kernels.integrate_piecewise(
                sub_knots, sub_values, params.n, params.m, params.lam, params.beta, tol
            )
            if status == _kernels.STATUS_OVERFLOW:
                raise FunctionalOverflowError(self._max_exponent(params), OVERFLOW_X)
            if status == _kernels.STATUS_NO_CONVERGENCE:
                raise AccuracyError("inner growth integral did not converge", raw, tol)
            inner = raw + integrand_value(params, tail_height) * math.exp(-t_max)
        return inner / total

    def eval_report(
        self, params: ProblemParams, conc_radius: float = 0.1, tol: float = 1e-10
    ) -> dict:
        """Summary of the profile under the given parameters."""
        return {
            "value": self.functional_value(params, tol),
            "energy": self.dirichlet_energy(),
            "peak": float(np.max(np.abs(self.values))),
            "conc_fraction": self.concentration_fraction(params, conc_radius, tol),
        }

    def save(self, path) -> None:
        """Write the profile as a two-column text file that round-trips."""
        lines = [f"# moser-profile n={self.n}"]
        for t, v in zip(self.knots, self.values):
            lines.append(f"{t:.17g} {v:.17g}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> "RadialProfile":
        lines = Path(path).read_text(encoding="ascii").splitlines()
        if not lines:
            raise DomainError(f"{path}: empty profile file")
        match = _HEADER_RE.match(lines[0])
        if match is None:
            raise DomainError(f"{path}: missing profile header")
        n = int(match.group(1))
        knots = []
        values = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected two columns")
            try:
                knots.append(float(parts[0]))
                values.append(float(parts[1]))
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from exc
        return cls(n, np.array(knots), np.array(values))

    def __repr__(self) -> str:
        return (
            f"RadialProfile(n={self.n}, knots={self.knots.size}, "
            f"t_max={self.knots[-1]:.3g}, peak={np.max(np.abs(self.values)):.6g})"
        )
