"""Compiled inner loops.

Everything here is deliberately free of Python objects: plain float64 arrays
in, scalars out, no threading and no fastmath, so results are bit-reproducible
for identical inputs on the same build.

Status codes shared by the steppers:
    0  completed
    1  non-finite or runaway cell value
    2  negativity clip exceeded the audit tolerance
PSOR status codes:
    0  converged
    1  iteration budget exhausted
    2  residual diverging
"""

from __future__ import annotations

import numpy as np
from numba import njit

DT_FLOOR = 1e-30
CLIP_AUDIT = 1e-12


@njit(cache=True)
def _ipow(x: float, k: int) -> float:
    acc = 1.0
    base = x
    e = k
    while e > 0:
        if e & 1:
            acc *= base
        base *= base
        e >>= 1
    return acc


@njit(cache=True)
def pressure_into_1d(n, p, gamma, int_gamma, use_int_pow):
    maxp = 0.0
    for i in range(n.shape[0]):
        if use_int_pow:
            p[i] = _ipow(n[i], int_gamma)
        else:
            p[i] = n[i] ** gamma
        if p[i] > maxp:
            maxp = p[i]
    return maxp


@njit(cache=True)
def pressure_into_2d(n, p, gamma, int_gamma, use_int_pow):
    maxp = 0.0
    for i in range(n.shape[0]):
        for j in range(n.shape[1]):
            if use_int_pow:
                p[i, j] = _ipow(n[i, j], int_gamma)
            else:
                p[i, j] = n[i, j] ** gamma
            if p[i, j] > maxp:
                maxp = p[i, j]
    return maxp


@njit(cache=True)
def max_grad_1d(p, h):
    m = p.shape[0]
    maxg = 0.0
    for i in range(m):
        if i == 0:
            d = (p[1] - p[0]) / h
        elif i == m - 1:
            d = (p[m - 1] - p[m - 2]) / h
        else:
            d = (p[i + 1] - p[i - 1]) / (2.0 * h)
        if abs(d) > maxg:
            maxg = abs(d)
    return maxg


@njit(cache=True)
def max_grad_2d(p, h):
    m0, m1 = p.shape
    maxg = 0.0
    for i in range(m0):
        for j in range(m1):
            if i == 0:
                dx = (p[1, j] - p[0, j]) / h
            elif i == m0 - 1:
                dx = (p[m0 - 1, j] - p[m0 - 2, j]) / h
            else:
                dx = (p[i + 1, j] - p[i - 1, j]) / (2.0 * h)
            if j == 0:
                dy = (p[i, 1] - p[i, 0]) / h
            elif j == m1 - 1:
                dy = (p[i, m1 - 1] - p[i, m1 - 2]) / h
            else:
                dy = (p[i, j + 1] - p[i, j - 1]) / (2.0 * h)
            g = abs(dx)
            if abs(dy) > g:
                g = abs(dy)
            if g > maxg:
                maxg = g
    return maxg


@njit(cache=True)
def euler_step_1d(n, p, out, dt, h, g0, p_max, runaway):
    """One conservative Euler step; exterior faces carry no flux.

    Returns (status, clip, bad_index).
    """
    m = n.shape[0]
    clip = 0.0
    for i in range(m):
        if i < m - 1:
            fr = 0.5 * (n[i] + n[i + 1]) * (p[i + 1] - p[i]) / h
        else:
            fr = 0.0
        if i > 0:
            fl = 0.5 * (n[i - 1] + n[i]) * (p[i] - p[i - 1]) / h
        else:
            fl = 0.0
        div = fr / h - fl / h
        growth = g0 * (1.0 - p[i] / p_max)
        val = n[i] + dt * (div + n[i] * growth)
        if not np.isfinite(val) or val > runaway:
            return 1, clip, i
        if val < 0.0:
            if -val > clip:
                clip = -val
            val = 0.0
        out[i] = val
    if clip > CLIP_AUDIT:
        return 2, clip, -1
    return 0, clip, -1


@njit(cache=True)
def euler_step_2d(n, p, out, dt, h, g0, p_max, runaway):
    m0, m1 = n.shape
    clip = 0.0
    for i in range(m0):
        for j in range(m1):
            if i < m0 - 1:
                fxr = 0.5 * (n[i, j] + n[i + 1, j]) * (p[i + 1, j] - p[i, j]) / h
            else:
                fxr = 0.0
            if i > 0:
                fxl = 0.5 * (n[i - 1, j] + n[i, j]) * (p[i, j] - p[i - 1, j]) / h
            else:
                fxl = 0.0
            if j < m1 - 1:
                fyr = 0.5 * (n[i, j] + n[i, j + 1]) * (p[i, j + 1] - p[i, j]) / h
            else:
                fyr = 0.0
            if j > 0:
                fyl = 0.5 * (n[i, j - 1] + n[i, j]) * (p[i, j] - p[i, j - 1]) / h
            else:
                fyl = 0.0
            div = fxr / h - fxl / h + fyr / h - fyl / h
            growth = g0 * (1.0 - p[i, j] / p_max)
            val = n[i, j] + dt * (div + n[i, j] * growth)
            if not np.isfinite(val) or val > runaway:
                return 1, clip, i * m1 + j
            if val < 0.0:
                if -val > clip:
                    clip = -val
                val = 0.0
            out[i, j] = val
    if clip > CLIP_AUDIT:
        return 2, clip, -1
    return 0, clip, -1


@njit(cache=True)
def advance_1d(n, gamma, int_gamma, use_int_pow, g0, p_max, h, cfl, t, t_stop, runaway):
    """March from t to t_stop at the stability-limited step size.

    Returns (t_reached, steps, status, worst_clip, bad_index).
    """
    m = n.shape[0]
    p = np.empty(m)
    out = np.empty(m)
    steps = 0
    worst_clip = 0.0
    while t < t_stop:
        maxp = pressure_into_1d(n, p, gamma, int_gamma, use_int_pow)
        maxg = max_grad_1d(p, h)
        dt = cfl * h * h / (2.0 * 1.0 * (gamma * maxp + maxg * h + DT_FLOOR))
        remaining = t_stop - t
        if dt >= remaining:
            dt = remaining
            t = t_stop
        else:
            t = t + dt
        status, clip, bad = euler_step_1d(n, p, out, dt, h, g0, p_max, runaway)
        if status != 0:
            return t, steps, status, clip, bad
        if clip > worst_clip:
            worst_clip = clip
        n[:] = out
        steps += 1
    return t, steps, 0, worst_clip, -1


@njit(cache=True)
def advance_2d(n, gamma, int_gamma, use_int_pow, g0, p_max, h, cfl, t, t_stop, runaway):
    m0, m1 = n.shape
    p = np.empty((m0, m1))
    out = np.empty((m0, m1))
    steps = 0
    worst_clip = 0.0
    while t < t_stop:
        maxp = pressure_into_2d(n, p, gamma, int_gamma, use_int_pow)
        maxg = max_grad_2d(p, h)
        dt = cfl * h * h / (2.0 * 2.0 * (gamma * maxp + maxg * h + DT_FLOOR))
        remaining = t_stop - t
        if dt >= remaining:
            dt = remaining
            t = t_stop
        else:
            t = t + dt
        status, clip, bad = euler_step_2d(n, p, out, dt, h, g0, p_max, runaway)
        if status != 0:
            return t, steps, status, clip, bad
        if clip > worst_clip:
            worst_clip = clip
        n[:, :] = out
        steps += 1
    return t, steps, 0, worst_clip, -1


@njit(cache=True)
def psor_1d(w, neg_f, h2, omega, tol, max_iters):
    """Projected SOR for (-lap) w = -F, w >= 0, in fixed lexicographic order.

    Returns (sweeps, residual, status).  The residual is the complementarity
    measure max(-w, -(-lap w + F), |w * (-lap w + F)|); -w never contributes
    because the projection keeps w nonnegative exactly.
    """
    m = w.shape[0]
    inv_diag = h2 / 2.0
    res_ref = np.inf
    residual = np.inf
    for sweep in range(max_iters):
        for i in range(m):
            left = w[i - 1] if i > 0 else 0.0
            right = w[i + 1] if i < m - 1 else 0.0
            r = neg_f[i] - (2.0 * w[i] - left - right) / h2
            wi = w[i] + omega * r * inv_diag
            w[i] = wi if wi > 0.0 else 0.0
        resid = 0.0
        for i in range(m):
            left = w[i - 1] if i > 0 else 0.0
            right = w[i + 1] if i < m - 1 else 0.0
            eq = (2.0 * w[i] - left - right) / h2 - neg_f[i]
            if -eq > resid:
                resid = -eq
            prod = w[i] * eq
            if prod < 0.0:
                prod = -prod
            if prod > resid:
                resid = prod
        residual = resid
        if resid <= tol:
            return sweep + 1, residual, 0
        if (sweep + 1) % 1000 == 0:
            if resid > 10.0 * res_ref:
                return sweep + 1, residual, 2
            res_ref = resid
    return max_iters, residual, 1


@njit(cache=True)
def psor_2d(w, neg_f, h2, omega, tol, max_iters):
    m0, m1 = w.shape
    inv_diag = h2 / 4.0
    res_ref = np.inf
    residual = np.inf
    for sweep in range(max_iters):
        for i in range(m0):
            for j in range(m1):
                up = w[i - 1, j] if i > 0 else 0.0
                dn = w[i + 1, j] if i < m0 - 1 else 0.0
                lf = w[i, j - 1] if j > 0 else 0.0
                rt = w[i, j + 1] if j < m1 - 1 else 0.0
                r = neg_f[i, j] - (4.0 * w[i, j] - up - dn - lf - rt) / h2
                wij = w[i, j] + omega * r * inv_diag
                w[i, j] = wij if wij > 0.0 else 0.0
        resid = 0.0
        for i in range(m0):
            for j in range(m1):
                up = w[i - 1, j] if i > 0 else 0.0
                dn = w[i + 1, j] if i < m0 - 1 else 0.0
                lf = w[i, j - 1] if j > 0 else 0.0
                rt = w[i, j + 1] if j < m1 - 1 else 0.0
                eq = (4.0 * w[i, j] - up - dn - lf - rt) / h2 - neg_f[i, j]
                if -eq > resid:
                    resid = -eq
                prod = w[i, j] * eq
                if prod < 0.0:
                    prod = -prod
                if prod > resid:
                    resid = prod
        residual = resid
        if resid <= tol:
            return sweep + 1, residual, 0
        if (sweep + 1) % 1000 == 0:
            if resid > 10.0 * res_ref:
                return sweep + 1, residual, 2
            res_ref = resid
    return max_iters, residual, 1
