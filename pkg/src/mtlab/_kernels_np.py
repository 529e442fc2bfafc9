"""Pure numpy backend for the hot numerical kernels.

Every public function here has a twin in ``_kernels_nb`` with the same
signature and status-code contract; ``_kernels`` picks one of the two at
import time.  Functions never raise on numerical trouble, they report it
through the returned status code so both backends stay interchangeable.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

STATUS_OK = 0
STATUS_OVERFLOW = 1
STATUS_NO_CONVERGENCE = 2

OVERFLOW_X = 700.0
TAIL_CROSSOVER = 30.0

_GX, _GW = leggauss(16)

_MAX_WORKLIST = 65536
_MAX_ROUNDS = 64


def _tail_array(x: np.ndarray, m: int) -> np.ndarray:
    """Elementwise sum_{k>m} x^k / k! for x in [0, OVERFLOW_X]."""
    flat = x.ravel()
    out = np.empty_like(flat)
    series = (flat <= TAIL_CROSSOVER) | (m >= flat)
    xs = flat[series]
    if xs.size:
        term = np.ones_like(xs)
        for k in range(1, m + 2):
            term *= xs / k
        acc = np.zeros_like(xs)
        k = m + 1
        while True:
            acc += term
            k += 1
            term *= xs / k
            if np.all(term <= acc * 1e-17):
                break
        out[series] = acc
    xb = flat[~series]
    if xb.size:
        partial = np.zeros_like(xb)
        for k in range(m, 0, -1):
            partial = xb / k * (1.0 + partial)
        out[~series] = np.exp(xb) - (1.0 + partial)
    return out.reshape(x.shape)


def _f_array(x: np.ndarray, m: int, lam: float) -> np.ndarray:
    return (1.0 - lam) * np.exp(x) + lam * (1.0 + _tail_array(x, m))


def _exponent(h: np.ndarray, n: int, beta: float) -> np.ndarray:
    return beta * np.abs(h) ** (n / (n - 1.0))


def integrand_values(t, n, m, lam, beta):
    """Growth integrand on an array of profile heights."""
    t = np.asarray(t, dtype=np.float64)
    x = _exponent(t, n, beta)
    if not np.all(np.isfinite(x)) or np.any(x > OVERFLOW_X):
        return np.empty(0), STATUS_OVERFLOW
    return _f_array(x, m, lam), STATUS_OK


def integrand_slopes(t, n, m, lam, beta):
    """Height derivative of the growth integrand on an array of heights."""
    t = np.asarray(t, dtype=np.float64)
    x = _exponent(t, n, beta)
    if not np.all(np.isfinite(x)) or np.any(x > OVERFLOW_X):
        return np.empty(0), STATUS_OVERFLOW
    inner = (1.0 - lam) * np.exp(x) + lam * _tail_array(x, m - 1)
    scale = beta * (n / (n - 1.0)) * np.abs(t) ** (1.0 / (n - 1.0))
    return np.copysign(scale, t) * inner, STATUS_OK


def weighted_values(v, w, n, m, lam, beta):
    """sum_i w_i * F(v_i) for precomputed quadrature weights w."""
    vals, status = integrand_values(v, n, m, lam, beta)
    if status != STATUS_OK:
        return 0.0, status
    return float(np.dot(np.asarray(w, dtype=np.float64), vals)), STATUS_OK


def weighted_values_and_slopes(v, w, n, m, lam, beta):
    """Objective sum together with the per-node terms w_i * F'(v_i)."""
    w = np.asarray(w, dtype=np.float64)
    vals, status = integrand_values(v, n, m, lam, beta)
    if status != STATUS_OK:
        return 0.0, np.empty(0), status
    slopes, status = integrand_slopes(v, n, m, lam, beta)
    if status != STATUS_OK:
        return 0.0, np.empty(0), status
    return float(np.dot(w, vals)), w * slopes, STATUS_OK


def _panels_linear(a, b, wa, wb, n, m, lam, beta):
    """Gauss value of F(height) e^{-t} on panels with linear heights."""
    half = 0.5 * (b - a)
    tq = 0.5 * (a + b)[:, None] + half[:, None] * _GX[None, :]
    hq = 0.5 * (wa + wb)[:, None] + 0.5 * (wb - wa)[:, None] * _GX[None, :]
    x = _exponent(hq, n, beta)
    if not np.all(np.isfinite(x)) or np.any(x > OVERFLOW_X):
        return np.empty(0), STATUS_OVERFLOW
    f = _f_array(x, m, lam)
    return half * np.sum(_GW[None, :] * f * np.exp(-tq), axis=1), STATUS_OK


def _bubble_heights(tq, shape, n):
    tstar, invd, peak, shift, cn, log_eps, q = shape
    z = cn * np.exp(q * (-tq / n - log_eps))
    inner = peak - ((n - 1.0) * np.log1p(z) + shift) * invd
    return np.where(tq < tstar, tq * invd, inner)


def _panels_bubble(a, b, shape, n, m, lam, beta):
    half = 0.5 * (b - a)
    tq = 0.5 * (a + b)[:, None] + half[:, None] * _GX[None, :]
    hq = _bubble_heights(tq, shape, n)
    x = _exponent(hq, n, beta)
    if not np.all(np.isfinite(x)) or np.any(x > OVERFLOW_X):
        return np.empty(0), STATUS_OVERFLOW
    f = _f_array(x, m, lam)
    return half * np.sum(_GW[None, :] * f * np.exp(-tq), axis=1), STATUS_OK


def _adaptive_worklist(a, b, wa, wb, tols, shape, kind, n, m, lam, beta):
    """Shared bisection loop; kind 0 uses linear heights, kind 1 the bubble."""
    value = 0.0
    err = 0.0
    status = STATUS_OK
    for _ in range(_MAX_ROUNDS):
        if a.size == 0:
            return value, err, status
        mid = 0.5 * (a + b)
        if kind == 0:
            wm = 0.5 * (wa + wb)
            whole, st1 = _panels_linear(a, b, wa, wb, n, m, lam, beta)
            left, st2 = _panels_linear(a, mid, wa, wm, n, m, lam, beta)
            right, st3 = _panels_linear(mid, b, wm, wb, n, m, lam, beta)
        else:
            wm = mid
            whole, st1 = _panels_bubble(a, b, shape, n, m, lam, beta)
            left, st2 = _panels_bubble(a, mid, shape, n, m, lam, beta)
            right, st3 = _panels_bubble(mid, b, shape, n, m, lam, beta)
        if st1 or st2 or st3:
            return value, err, STATUS_OVERFLOW
        refined = left + right
        e = np.abs(refined - whole)
        # absolute target plus a machine-precision relative floor per panel
        goal = tols + 1e-15 * np.abs(refined)
        done = (e <= goal) | (b - a <= 1e-13 * (1.0 + np.abs(a)))
        if np.any(e[done] > goal[done]):
            status = STATUS_NO_CONVERGENCE
        value += float(refined[done].sum())
        err += float(e[done].sum())
        keep = ~done
        if 2 * int(keep.sum()) > _MAX_WORKLIST:
            value += float(refined[keep].sum())
            err += float(e[keep].sum())
            return value, err, STATUS_NO_CONVERGENCE
        a, b = np.concatenate([a[keep], mid[keep]]), np.concatenate([mid[keep], b[keep]])
        wa, wb = np.concatenate([wa[keep], wm[keep]]), np.concatenate([wm[keep], wb[keep]])
        half_tol = 0.5 * tols[keep]
        tols = np.concatenate([half_tol, half_tol])
    if a.size:
        if kind == 0:
            leftover, st = _panels_linear(a, b, wa, wb, n, m, lam, beta)
        else:
            leftover, st = _panels_bubble(a, b, shape, n, m, lam, beta)
        if st:
            return value, err, STATUS_OVERFLOW
        value += float(leftover.sum())
        err += float(tols.sum())
        status = STATUS_NO_CONVERGENCE
    return value, err, status


def _split_tolerance(knots, tol):
    mass = np.exp(-knots[:-1]) - np.exp(-knots[1:])
    total = float(mass.sum())
    nseg = knots.size - 1
    if total <= 0.0:
        return np.full(nseg, tol / nseg)
    return 0.5 * tol * mass / total + 0.5 * tol / nseg


def integrate_piecewise(tk, vk, n, m, lam, beta, tol):
    """integral of F(v(t)) e^{-t} over [tk[0], tk[-1]], v piecewise linear.

    Returns (value, error_estimate, status).
    """
    tk = np.asarray(tk, dtype=np.float64)
    vk = np.asarray(vk, dtype=np.float64)
    tols = _split_tolerance(tk, tol)
    empty = np.empty(0)
    return _adaptive_worklist(
        tk[:-1].copy(), tk[1:].copy(), vk[:-1].copy(), vk[1:].copy(),
        tols, empty, 0, n, m, lam, beta,
    )


def integrate_bubble(a, b, shape, n, m, lam, beta, tol):
    """integral of F(w(t)) e^{-t} over [a, b] for the concentrating profile.

    shape packs (kink position, inverse peak denominator, peak constant,
    logarithmic shift, bubble coefficient, log eps, conjugate exponent);
    heights are evaluated from it directly, so panels split exactly.
    """
    shape = np.asarray(shape, dtype=np.float64)
    arr_a = np.array([a], dtype=np.float64)
    arr_b = np.array([b], dtype=np.float64)
    tols = np.array([tol], dtype=np.float64)
    return _adaptive_worklist(
        arr_a, arr_b, arr_a.copy(), arr_b.copy(), tols, shape, 1, n, m, lam, beta
    )


def backend_ready() -> bool:
    """Cheap self-check used by the dispatcher at import time."""
    vals, status = integrand_values(np.array([0.0, 1.0]), 2, 1, 0.5, 4.0 * math.pi)
    return status == STATUS_OK and vals.shape == (2,)
