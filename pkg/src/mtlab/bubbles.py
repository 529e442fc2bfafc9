"""Concentrating family of unit-energy test profiles.

Each member is a truncated logarithm glued to a smooth cap at scale eps,
with the cap height chosen so the n-Dirichlet energy is exactly one.  The
family drives the lower-bound side of the problem: as eps shrinks, the
functional approaches the concentration threshold from above, and the
rate at which it does carries the leading coefficient checked by the
reports here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    OVERFLOW_X,
    ProblemParams,
    ball_volume,
    concentration_threshold,
    harmonic_number,
    integrand_value,
    moser_constant,
)
from .errors import AccuracyError, ConstructionError, DomainError, FunctionalOverflowError

EPS_FLOOR = 1e-6

_BISECTIONS = 30
_NEWTON_STEPS = 60
_ENERGY_TOL = 1e-14


def _validate_order(n: int, m: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"truncation order must be an integer >= 1, got {m!r}")


def bubble_coefficient(n: int) -> float:
    """Coefficient (ball volume)^{1/(n-1)} inside the cap logarithm."""
    return ball_volume(n) ** (1.0 / (n - 1.0))


def cap_energy_integral(n: int, x: float) -> float:
    """Closed form of the cap energy integral int_0^x y^{n-1}/(1+y)^n dy."""
    if x < 0.0:
        raise DomainError(f"integral endpoint must be >= 0, got {x!r}")
    total = math.log1p(x)
    for k in range(n - 1):
        total += (
            math.comb(n - 1, k)
            * (-1) ** (n - 1 - k)
            * ((1.0 + x) ** (k - n + 1) - 1.0)
            / (k - n + 1)
        )
    return total


@dataclass(frozen=True)
class SequenceParams:
    """One member of the concentrating family, energy already normalized."""

    n: int
    m: int
    eps: float
    length_scale: float
    kink: float
    inner_arg: float
    peak_base: float
    log_shift: float

    @property
    def inv_denominator(self) -> float:
        return 1.0 / (moser_constant(self.n) * self.peak_base ** (1.0 / (self.n - 1.0)))

    @property
    def peak_height(self) -> float:
        """Height at the center of the ball."""
        return self.peak_base - self.log_shift * self.inv_denominator

    @property
    def concentration_center(self) -> float:
        """Log coordinate where the cap argument passes through one."""
        return (self.n - 1.0) * math.log(bubble_coefficient(self.n)) - self.n * math.log(
            self.eps
        )

    def kernel_shape(self) -> np.ndarray:
        """Shape vector consumed by the kernel bubble integrator."""
        return np.array(
            [
                self.kink,
                self.inv_denominator,
                self.peak_base,
                self.log_shift,
                bubble_coefficient(self.n),
                math.log(self.eps),
                self.n / (self.n - 1.0),
            ]
        )

    def height_in_log(self, t):
        """Profile height at log coordinate t; vectorized."""
        t = np.asarray(t, dtype=np.float64)
        q = self.n / (self.n - 1.0)
        z = bubble_coefficient(self.n) * np.exp(q * (-t / self.n - math.log(self.eps)))
        cap = self.peak_base - (
            (self.n - 1.0) * np.log1p(z) + self.log_shift
        ) * self.inv_denominator
        return np.where(t < self.kink, t * self.inv_denominator, cap)

    def height_at_radius(self, r: float) -> float:
        """Profile height at radius r in (0, 1]."""
        if not 0.0 < r <= 1.0:
            raise DomainError(f"radius must lie in (0, 1], got {r!r}")
        if r >= self.length_scale * self.eps:
            return -self.n * math.log(r) * self.inv_denominator
        z = bubble_coefficient(self.n) * (r / self.eps) ** (self.n / (self.n - 1.0))
        return self.peak_base - (
            (self.n - 1.0) * math.log1p(z) + self.log_shift
        ) * self.inv_denominator


def energy_closed_form(n: int, m: int, eps: float, peak_base: float) -> float:
    """Exact Dirichlet energy of the glued profile with the given cap height."""
    _validate_order(n, m)
    length = (-math.log(eps)) ** (m + 1)
    x = bubble_coefficient(n) * length ** (n / (n - 1.0))
    kink = -n * math.log(length * eps)
    numerator = kink + (n - 1.0) * cap_energy_integral(n, x)
    return numerator / (moser_constant(n) * peak_base ** (n / (n - 1.0)))


def asymptotic_peak_base(
    n: int, m: int, eps: float, pole_regular_value: float = 0.0
) -> float:
    """Small-eps approximation of the cap height that normalizes energy."""
    _validate_order(n, m)
    alpha = moser_constant(n)
    k = (
        -(n - 1.0) * float(harmonic_number(n - 1))
        + math.log(ball_volume(n))
        - n * math.log(eps)
        + alpha * pole_regular_value
    )
    if k <= 0.0:
        raise ConstructionError(
            "scale too coarse for the asymptotic height", {"eps": eps, "k": k}
        )
    return (k / alpha) ** ((n - 1.0) / n)


def build_params(n: int, m: int, eps: float) -> SequenceParams:
    """Construct the family member at scale eps with unit Dirichlet energy.

    The cap height solves energy = 1 by bisection from the asymptotic
    bracket followed by a Newton polish.
    """
    _validate_order(n, m)
    if not (math.isfinite(eps) and EPS_FLOOR <= eps < 1.0):
        raise ConstructionError(
            f"scale must lie in [{EPS_FLOOR:g}, 1), got {eps!r}", {"eps": eps}
        )
    length = (-math.log(eps)) ** (m + 1)
    if length * eps >= 1.0:
        raise ConstructionError(
            "cap radius reaches the boundary at this scale",
            {"eps": eps, "length_scale": length, "cap_radius": length * eps},
        )
    guess = asymptotic_peak_base(n, m, eps)
    lo, hi = 0.5 * guess, 2.0 * guess
    if not energy_closed_form(n, m, eps, lo) > 1.0 > energy_closed_form(n, m, eps, hi):
        raise ConstructionError(
            "asymptotic bracket does not enclose the unit-energy height",
            {"eps": eps, "bracket": (lo, hi)},
        )
    for _ in range(_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if energy_closed_form(n, m, eps, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    q = n / (n - 1.0)
    for _ in range(_NEWTON_STEPS):
        energy = energy_closed_form(n, m, eps, c)
        if abs(energy - 1.0) <= _ENERGY_TOL:
            break
        # d energy / dC = -q energy / C
        c += c * (energy - 1.0) / (q * energy)
    else:
        raise ConstructionError(
            "energy normalization did not converge",
            {"eps": eps, "residual": energy_closed_form(n, m, eps, c) - 1.0},
        )
    alpha = moser_constant(n)
    x = bubble_coefficient(n) * length ** q
    kink = -n * math.log(length * eps)
    shift = alpha * c**q - kink - (n - 1.0) * math.log1p(x)
    return SequenceParams(
        n=n,
        m=m,
        eps=float(eps),
        length_scale=length,
        kink=kink,
        inner_arg=x,
        peak_base=c,
        log_shift=shift,
    )


def log_shift_defect(seq: SequenceParams) -> float:
    """Distance of the logarithmic shift from its concentration limit.

    The limit is -(n-1) H_{n-1}; the defect decays like the inverse of
    the cap argument.
    """
    limit = -(seq.n - 1.0) * float(harmonic_number(seq.n - 1))
    return seq.log_shift - limit


def sequence_functional(
    seq: SequenceParams, params: ProblemParams, tol: float = 1e-10
) -> float:
    """Growth functional of the family member under the given parameters."""
    if params.n != seq.n:
        raise DomainError(
            f"family member lives in dimension {seq.n}, parameters in {params.n}"
        )
    shape = seq.kernel_shape()
    t_end = -seq.n * math.log(seq.eps) + 40.0
    pieces = []
    for a, b, share in ((0.0, seq.kink, 0.25), (seq.kink, t_end, 0.75)):
        value, err, status = _kernels.integrate_bubble(
            a, b, shape, params.n, params.m, params.lam, params.beta, share * tol
        )
        if status == _kernels.STATUS_OVERFLOW:
            peak_x = params.beta * abs(seq.peak_height) ** (seq.n / (seq.n - 1.0))
            raise FunctionalOverflowError(peak_x, OVERFLOW_X)
        if status == _kernels.STATUS_NO_CONVERGENCE:
            raise AccuracyError("functional quadrature did not converge", value, err)
        pieces.append(value)
    tail_height = float(seq.height_in_log(t_end))
    tail = integrand_value(params, tail_height) * math.exp(-t_end)
    return ball_volume(seq.n) * (pieces[0] + pieces[1] + tail)


def excess_scale_exponent(n: int, m: int) -> float:
    """Power of the cap height that rescales the excess to order one."""
    return n * (m + 1) / (n - 1.0) ** 2


def leading_coefficient(n: int, m: int) -> float:
    """Limit coefficient of the rescaled excess along the family.

    Comes from the first dropped series term integrated against the
    outer logarithmic slope: ball_volume * Gamma(p+1) / ((m+1)! alpha^
    {(m+1)/(n-1)}) with p = n (m+1)/(n-1).
    """
    _validate_order(n, m)
    p = n * (m + 1) / (n - 1.0)
    return (
        ball_volume(n)
        * math.gamma(p + 1.0)
        / (math.factorial(m + 1) * moser_constant(n) ** ((m + 1) / (n - 1.0)))
    )


def excess_report(n: int, m: int, eps_values, tol: float = 1e-10) -> list[dict]:
    """Functional excess over the threshold along the family.

    One row per scale with the raw value, the excess, and the excess
    rescaled by peak_base^excess_scale_exponent.
    """
    params = ProblemParams(n, m, 1.0)
    bar = concentration_threshold(n)
    exponent = excess_scale_exponent(n, m)
    rows = []
    for eps in eps_values:
        seq = build_params(n, m, float(eps))
        value = sequence_functional(seq, params, tol)
        excess = value - bar
        rows.append(
            {
                "eps": seq.eps,
                "L": seq.length_scale,
                "C": seq.peak_base,
                "Lambda": seq.log_shift,
                "value": value,
                "excess": excess,
                "scaled_excess": excess * seq.peak_base**exponent,
            }
        )
    return rows


def bubble_profile(
    seq: SequenceParams, knot_count: int = 400, t_max: float | None = None
) -> "RadialProfile":
    """Sample the family member onto a graded knot grid.

    Roughly half the knots cover the concentration window around the cap,
    the rest split between the outer ramp and the flat interior; the kink
    always receives a knot.  The result is not renormalized, so its
    energy sits slightly below one from the sampling.
    """
    from .profiles import RadialProfile

    if knot_count < 16:
        raise DomainError(f"need at least 16 knots, got {knot_count}")
    center = seq.concentration_center
    width = 10.0 * (seq.n - 1.0) + 2.0
    if t_max is None:
        t_max = max(-seq.n * math.log(seq.eps) + 40.0, center + width + 10.0)
    window_lo = max(0.0, min(seq.kink, center - width))
    window_hi = min(t_max, center + width)
    interior = knot_count - 2
    in_window = max(int(round(0.55 * interior)), 1)
    before = max(int(round(0.20 * interior)), 1) if window_lo > 0.0 else 0
    after = interior - in_window - before
    parts = [np.array([0.0, t_max])]
    if before:
        parts.append(np.linspace(0.0, window_lo, before + 2)[1:-1])
    parts.append(np.linspace(window_lo, window_hi, in_window + 2)[1:-1])
    parts.append(np.linspace(window_hi, t_max, after + 2)[1:-1])
    knots = np.unique(np.concatenate(parts))
    # pin the kink exactly by replacing the nearest interior knot
    idx = int(np.argmin(np.abs(knots - seq.kink)))
    if knots[idx] != seq.kink and 0 < idx < knots.size - 1:
        knots[idx] = seq.kink
        knots = np.unique(knots)
    return RadialProfile(seq.n, knots, seq.height_in_log(knots))
