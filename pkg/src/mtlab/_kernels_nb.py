"""Numba backend for the hot numerical kernels.

Mirrors ``_kernels_np`` function by function; see that module for the
contract.  Kernels are written as scalar loops so the jit can fuse them,
and they communicate failure through status codes instead of exceptions.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from numpy.polynomial.legendre import leggauss

STATUS_OK = 0
STATUS_OVERFLOW = 1
STATUS_NO_CONVERGENCE = 2

OVERFLOW_X = 700.0
TAIL_CROSSOVER = 30.0

_GX, _GW = leggauss(16)

_MAX_STACK = 256
_MAX_PANELS = 20000


@njit(cache=True, nogil=True)
def _tail_scalar(x, m):
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
    partial = 0.0
    for k in range(m, 0, -1):
        partial = x / k * (1.0 + partial)
    return math.exp(x) - (1.0 + partial)


@njit(cache=True, nogil=True)
def _f_scalar(x, m, lam):
    return (1.0 - lam) * math.exp(x) + lam * (1.0 + _tail_scalar(x, m))


@njit(cache=True, nogil=True)
def integrand_values(t, n, m, lam, beta):
    q = n / (n - 1.0)
    out = np.empty(t.size)
    for i in range(t.size):
        x = beta * abs(t[i]) ** q
        if not math.isfinite(x) or x > OVERFLOW_X:
            return np.empty(0), STATUS_OVERFLOW
        out[i] = _f_scalar(x, m, lam)
    return out, STATUS_OK


@njit(cache=True, nogil=True)
def integrand_slopes(t, n, m, lam, beta):
    q = n / (n - 1.0)
    out = np.empty(t.size)
    for i in range(t.size):
        x = beta * abs(t[i]) ** q
        if not math.isfinite(x) or x > OVERFLOW_X:
            return np.empty(0), STATUS_OVERFLOW
        inner = (1.0 - lam) * math.exp(x) + lam * _tail_scalar(x, m - 1)
        scale = beta * q * abs(t[i]) ** (1.0 / (n - 1.0))
        out[i] = math.copysign(scale, t[i]) * inner
    return out, STATUS_OK


@njit(cache=True, nogil=True)
def weighted_values(v, w, n, m, lam, beta):
    q = n / (n - 1.0)
    total = 0.0
    for i in range(v.size):
        x = beta * abs(v[i]) ** q
        if not math.isfinite(x) or x > OVERFLOW_X:
            return 0.0, STATUS_OVERFLOW
        total += w[i] * _f_scalar(x, m, lam)
    return total, STATUS_OK


@njit(cache=True, nogil=True)
def weighted_values_and_slopes(v, w, n, m, lam, beta):
    q = n / (n - 1.0)
    total = 0.0
    terms = np.empty(v.size)
    for i in range(v.size):
        x = beta * abs(v[i]) ** q
        if not math.isfinite(x) or x > OVERFLOW_X:
            return 0.0, np.empty(0), STATUS_OVERFLOW
        total += w[i] * _f_scalar(x, m, lam)
        inner = (1.0 - lam) * math.exp(x) + lam * _tail_scalar(x, m - 1)
        scale = beta * q * abs(v[i]) ** (1.0 / (n - 1.0))
        terms[i] = w[i] * math.copysign(scale, v[i]) * inner
    return total, terms, STATUS_OK


@njit(cache=True, nogil=True)
def _bubble_height(t, shape, n):
    tstar = shape[0]
    invd = shape[1]
    if t < tstar:
        return t * invd
    peak = shape[2]
    shift = shape[3]
    cn = shape[4]
    log_eps = shape[5]
    q = shape[6]
    z = cn * math.exp(q * (-t / n - log_eps))
    return peak - ((n - 1.0) * math.log1p(z) + shift) * invd


@njit(cache=True, nogil=True)
def _panel(a, b, wa, wb, shape, kind, n, m, lam, beta):
    half = 0.5 * (b - a)
    midt = 0.5 * (a + b)
    midw = 0.5 * (wa + wb)
    dw = 0.5 * (wb - wa)
    q = n / (n - 1.0)
    acc = 0.0
    for j in range(16):
        t = midt + half * _GX[j]
        if kind == 0:
            h = midw + dw * _GX[j]
        else:
            h = _bubble_height(t, shape, n)
        x = beta * abs(h) ** q
        if not math.isfinite(x) or x > OVERFLOW_X:
            return 0.0, STATUS_OVERFLOW
        acc += _GW[j] * _f_scalar(x, m, lam) * math.exp(-t)
    return half * acc, STATUS_OK


@njit(cache=True, nogil=True)
def _adaptive_interval(a0, b0, wa0, wb0, tol0, shape, kind, n, m, lam, beta):
    stack_a = np.empty(_MAX_STACK)
    stack_b = np.empty(_MAX_STACK)
    stack_wa = np.empty(_MAX_STACK)
    stack_wb = np.empty(_MAX_STACK)
    stack_tol = np.empty(_MAX_STACK)
    stack_a[0] = a0
    stack_b[0] = b0
    stack_wa[0] = wa0
    stack_wb[0] = wb0
    stack_tol[0] = tol0
    top = 1
    value = 0.0
    err = 0.0
    status = STATUS_OK
    panels = 0
    while top > 0:
        top -= 1
        a = stack_a[top]
        b = stack_b[top]
        wa = stack_wa[top]
        wb = stack_wb[top]
        tol = stack_tol[top]
        whole, st = _panel(a, b, wa, wb, shape, kind, n, m, lam, beta)
        if st != STATUS_OK:
            return value, err, st
        mid = 0.5 * (a + b)
        if kind == 0:
            wm = 0.5 * (wa + wb)
        else:
            wm = mid
        left, st = _panel(a, mid, wa, wm, shape, kind, n, m, lam, beta)
        if st != STATUS_OK:
            return value, err, st
        right, st = _panel(mid, b, wm, wb, shape, kind, n, m, lam, beta)
        if st != STATUS_OK:
            return value, err, st
        refined = left + right
        e = abs(refined - whole)
        panels += 1
        # absolute target plus a machine-precision relative floor per panel
        goal = tol + 1e-15 * abs(refined)
        narrow = (b - a) <= 1e-13 * (1.0 + abs(a))
        out_of_room = top + 2 > _MAX_STACK or panels > _MAX_PANELS
        if e <= goal or narrow or out_of_room:
            value += refined
            err += e
            if e > goal:
                status = STATUS_NO_CONVERGENCE
        else:
            stack_a[top] = a
            stack_b[top] = mid
            stack_wa[top] = wa
            stack_wb[top] = wm
            stack_tol[top] = 0.5 * tol
            stack_a[top + 1] = mid
            stack_b[top + 1] = b
            stack_wa[top + 1] = wm
            stack_wb[top + 1] = wb
            stack_tol[top + 1] = 0.5 * tol
            top += 2
    return value, err, status


@njit(cache=True, nogil=True)
def integrate_piecewise(tk, vk, n, m, lam, beta, tol):
    nseg = tk.size - 1
    total_mass = 0.0
    for i in range(nseg):
        total_mass += math.exp(-tk[i]) - math.exp(-tk[i + 1])
    value = 0.0
    err = 0.0
    status = STATUS_OK
    shape = np.empty(0)
    for i in range(nseg):
        mass = math.exp(-tk[i]) - math.exp(-tk[i + 1])
        if total_mass > 0.0:
            tol_i = 0.5 * tol * mass / total_mass + 0.5 * tol / nseg
        else:
            tol_i = tol / nseg
        v, e, st = _adaptive_interval(
            tk[i], tk[i + 1], vk[i], vk[i + 1], tol_i, shape, 0, n, m, lam, beta
        )
        value += v
        err += e
        if st != STATUS_OK:
            if st == STATUS_OVERFLOW:
                return value, err, st
            status = st
    return value, err, status


@njit(cache=True, nogil=True)
def integrate_bubble(a, b, shape, n, m, lam, beta, tol):
    return _adaptive_interval(a, b, a, b, tol, shape, 1, n, m, lam, beta)


def backend_ready() -> bool:
    """Force one compilation so import failures surface in the dispatcher."""
    vals, status = integrand_values(np.array([0.0, 1.0]), 2, 1, 0.5, 4.0 * math.pi)
    return status == STATUS_OK and vals.shape == (2,)
