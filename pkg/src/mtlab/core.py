"""Dimensional constants, the growth integrand, and exact identities.

Everything here is pure stdlib (``math`` and ``fractions``) so the module
imports fast and can feed both the numerical kernels and the exact
rational checks used by the command line tool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, FunctionalOverflowError

# Largest exponent fed to math.exp before we refuse to evaluate.  Doubles
# overflow just above 709, so this leaves headroom for downstream sums.
OVERFLOW_X = 700.0

# Below this exponent the exponential tail is summed term by term; above it
# the subtraction exp(x) - partial_sum(x) is already cancellation-free.
TAIL_CROSSOVER = 30.0


def _sphere_measure_exact(n: int) -> tuple[Fraction, int]:
    """Surface measure of the unit sphere in R^n as (coefficient, pi power).

    The measure is 2 pi^{n/2} / Gamma(n/2), which is always a rational
    multiple of an integer power of pi.
    """
    if n < 2:
        raise DomainError(f"dimension must be at least 2, got {n}")
    if n % 2 == 0:
        k = n // 2
        return Fraction(2, math.factorial(k - 1)), k
    k = (n - 1) // 2
    # Gamma(k + 1/2) = (2k)! sqrt(pi) / (4^k k!), the sqrt(pi) cancels one
    # half power of pi in pi^{n/2}.
    return Fraction(2 * 4**k * math.factorial(k), math.factorial(2 * k)), k


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere bounding the unit ball in R^n."""
    coeff, power = _sphere_measure_exact(n)
    return float(coeff) * math.pi**power


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    coeff, power = _sphere_measure_exact(n)
    return float(coeff / n) * math.pi**power


def moser_constant(n: int) -> float:
    """Critical exponent coefficient n * sphere_measure(n)^{1/(n-1)}."""
    return n * sphere_measure(n) ** (1.0 / (n - 1))


def harmonic_number(k: int) -> Fraction:
    """Exact k-th harmonic number; harmonic_number(0) == 0."""
    if k < 0:
        raise DomainError(f"harmonic number needs k >= 0, got {k}")
    total = Fraction(0)
    for j in range(1, k + 1):
        total += Fraction(1, j)
    return total


@dataclass(frozen=True)
class ProblemParams:
    """Parameters of the perturbed functional on the unit ball.

    The integrand is exp(x) - lam * sum_{k=1}^{m} x^k / k! evaluated at
    x = beta * |t|^{n/(n-1)}.  By default beta is the critical coefficient
    moser_constant(n); smaller values give the subcritical family used for
    continuation.
    """

    n: int
    m: int
    lam: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.m, int) or self.m < 1:
            raise DomainError(f"truncation order must be an integer >= 1, got {self.m!r}")
        if not math.isfinite(self.lam) or self.lam < 0.0:
            raise DomainError(f"perturbation weight must be finite and >= 0, got {self.lam!r}")
        critical = moser_constant(self.n)
        if self.beta == 0.0:
            object.__setattr__(self, "beta", critical)
        if not 0.0 < self.beta <= critical * (1.0 + 1e-12):
            raise DomainError(
                f"growth coefficient must lie in (0, {critical:.6g}], got {self.beta!r}"
            )

    @property
    def theta(self) -> float:
        """Ratio of the growth coefficient to its critical value."""
        return self.beta / moser_constant(self.n)


def exp_argument(params: ProblemParams, t: float) -> float:
    """Exponent beta * |t|^{n/(n-1)} of the growth integrand."""
    return params.beta * abs(t) ** (params.n / (params.n - 1.0))


def exponential_partial_sum(x: float, m: int) -> float:
    """sum_{k=1}^{m} x^k / k!, the polynomial subtracted from exp."""
    if m < 0:
        raise DomainError(f"truncation order must be >= 0, got {m}")
    acc = 0.0
    for k in range(m, 0, -1):
        acc = x / k * (1.0 + acc)
    return acc


def exp_tail(x: float, m: int) -> float:
    """sum_{k=m+1}^{infinity} x^k / k! for x >= 0, without cancellation.

    Small arguments are summed term by term.  Large arguments with m < x
    use exp(x) minus the partial sum, which is safe there because the tail
    still carries most of the mass of exp(x).
    """
    if m < 0:
        raise DomainError(f"truncation order must be >= 0, got {m}")
    if x < 0.0 or not math.isfinite(x):
        raise DomainError(f"tail argument must be finite and >= 0, got {x!r}")
    if x > OVERFLOW_X:
        raise FunctionalOverflowError(x, OVERFLOW_X)
    if x == 0.0:
        return 0.0
    if x <= TAIL_CROSSOVER or m >= x:
        term = 1.0
        for k in range(1, m + 2):
            term *= x / k
        acc = 0.0
        k = m + 1
        while True:
            acc += term
            k += 1
            term *= x / k
            if term <= acc * 1e-17:
                return acc
    return math.exp(x) - (1.0 + exponential_partial_sum(x, m))


def integrand_value(params: ProblemParams, t: float) -> float:
    """Growth integrand at profile height t.

    Evaluated as (1 - lam) * exp(x) + lam * (1 + exp_tail(x, m)) so that
    the subtraction of the truncated series never cancels.
    """
    x = exp_argument(params, t)
    if x > OVERFLOW_X:
        raise FunctionalOverflowError(x, OVERFLOW_X)
    return (1.0 - params.lam) * math.exp(x) + params.lam * (1.0 + exp_tail(x, params.m))


def integrand_slope(params: ProblemParams, t: float) -> float:
    """Derivative of the growth integrand with respect to t."""
    n = params.n
    x = exp_argument(params, t)
    if x > OVERFLOW_X:
        raise FunctionalOverflowError(x, OVERFLOW_X)
    inner = (1.0 - params.lam) * math.exp(x) + params.lam * exp_tail(x, params.m - 1)
    scale = params.beta * (n / (n - 1.0)) * abs(t) ** (1.0 / (n - 1.0))
    return math.copysign(scale, t) * inner


def concentration_threshold(
    n: int, pole_regular_value: float = 0.0, offset: float | None = None
) -> float:
    """Energy level separating compact from concentrating maximizing families.

    Equals offset + ball_volume(n) * exp(moser_constant(n) * s + H_{n-1})
    where s is the regular part of the Green function at the pole and
    H_{n-1} the harmonic number.  The offset defaults to ball_volume(n),
    the value of the functional on the zero profile, which gives
    ball_volume(n) * (1 + e) in dimension two.
    """
    if offset is None:
        offset = ball_volume(n)
    h = float(harmonic_number(n - 1))
    return offset + ball_volume(n) * math.exp(moser_constant(n) * pole_regular_value + h)


def harmonic_binomial_identity(n: int) -> tuple[Fraction, Fraction]:
    """Exact identity behind the profile energy expansion.

    Returns (lhs, rhs) with
    lhs = -sum_{k=0}^{n-2} C(n-1, k) (-1)^{n-1-k} / (n-1-k) and
    rhs = harmonic_number(n-1); the two agree for every n >= 2.
    """
    if n < 2:
        raise DomainError(f"dimension must be at least 2, got {n}")
    lhs = Fraction(0)
    for k in range(n - 1):
        lhs -= Fraction(math.comb(n - 1, k) * (-1) ** (n - 1 - k), n - 1 - k)
    return lhs, harmonic_number(n - 1)


def inverse_binomial_identity(m: int) -> tuple[Fraction, Fraction]:
    """Exact identity behind the leading coefficient of the excess.

    Returns (lhs, rhs) with
    lhs = sum_{k=0}^{m} (-1)^{m-k} C(m, k) / (m-k+1) and rhs = 1/(m+1).
    """
    if m < 0:
        raise DomainError(f"truncation order must be >= 0, got {m}")
    lhs = Fraction(0)
    for k in range(m + 1):
        lhs += Fraction((-1) ** (m - k) * math.comb(m, k), m - k + 1)
    return lhs, Fraction(1, m + 1)
