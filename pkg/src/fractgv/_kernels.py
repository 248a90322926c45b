"""Compiled inner loops for the pair-difference block of the solver.

These are the O(n^2) hot spots of one primal-dual iteration. The pure numpy
counterparts live in :mod:`fractgv.fracnorm` and :mod:`fractgv.prox`; the test
suite checks the two against each other.
"""

import math

import numpy as np
from numba import njit

from .errors import NumericalError

LOG2 = math.log(2.0)


@njit(cache=True)
def pair_diff(v, C, out):
    n = v.shape[0]
    for i in range(n):
        vi = v[i]
        for j in range(n):
            out[i, j] = (vi - v[j]) * C[i, j]


@njit(cache=True)
def pair_diff_adjoint(Y, C):
    n = Y.shape[0]
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            t = C[i, j] * Y[i, j]
            acc += t
            out[j] -= t
        out[i] += acc
    return out


@njit(cache=True)
def lp_norm(Y, p):
    a = Y.ravel()
    top = 0.0
    for i in range(a.shape[0]):
        top = max(top, abs(a[i]))
    if top == 0.0:
        return 0.0
    acc = 0.0
    for i in range(a.shape[0]):
        acc += (abs(a[i]) / top) ** p
    return top * acc ** (1.0 / p)


def pair_opnorm(C, iters=60):
    """Largest singular value of ``v -> ((v_i - v_j) C_ij)_{ij}``."""
    n = C.shape[0]
    out = np.empty((n, n))
    x = np.cos(np.arange(n) * (math.pi * (n - 1) / n))  # oscillating start
    x -= x.mean()
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        pair_diff(x, C, out)
        y = pair_diff_adjoint(out, C)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        est = max(est, float(np.dot(x, y)))
        x = y / nrm
    return math.sqrt(est)


# --- l_q ball projection ---------------------------------------------------------------


class LqState:
    """Warm-start data carried between successive projections."""

    def __init__(self, size):
        self.x = np.zeros(size)
        self.log_lam = np.nan


@njit(cache=True)
def _logaddexp(a, b):
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


@njit(cache=True)
def _residual(log_a, nz, log_lam, q, x):
    """Solve every coordinate at multiplier ``exp(log_lam)``; return ``||t||_q - 1``."""
    qm1 = q - 1.0
    top = -np.inf
    for i in range(log_a.shape[0]):
        if not nz[i]:
            continue
        la = log_a[i]
        hi = min(la, (la - log_lam) / qm1)
        lo = min(la - LOG2, (la - LOG2 - log_lam) / qm1)
        xi = x[i]
        if not (lo <= xi <= hi):
            xi = hi
        for _ in range(60):
            e2 = log_lam + qm1 * xi
            lse = _logaddexp(xi, e2)
            G = lse - la
            if G > 0.0:
                hi = xi
            else:
                lo = xi
            w2 = math.exp(e2 - lse)
            step = G / (1.0 + (q - 2.0) * w2)
            xn = xi - step
            if not (lo < xn < hi):
                xn = 0.5 * (lo + hi)
            if abs(xn - xi) < 1e-14:
                xi = xn
                break
            xi = xn
        x[i] = xi
        if xi > top:
            top = xi
    if top == -np.inf:
        return -1.0
    acc = 0.0
    for i in range(log_a.shape[0]):
        if nz[i]:
            acc += math.exp(q * (x[i] - top))
    return math.exp(top + math.log(acc) / q) - 1.0


@njit(cache=True)
def _project(z, q, radius, tol, max_iter, x, log_lam_hint):
    n = z.shape[0]
    log_a = np.empty(n)
    nz = np.empty(n, dtype=np.bool_)
    # norm check and normalisation
    top = 0.0
    for i in range(n):
        top = max(top, abs(z[i]))
    if top == 0.0:
        return log_lam_hint, 0
    acc = 0.0
    for i in range(n):
        acc += (abs(z[i]) / top) ** q
    nrm = top * acc ** (1.0 / q)
    if nrm <= radius:
        return log_lam_hint, 0
    if nrm <= radius * (1.0 + tol):
        # vanishing multiplier: radial scaling is within the tolerance
        for i in range(n):
            z[i] *= radius / nrm
        return log_lam_hint, 0
    c = q / (q - 1.0)
    amax = -np.inf
    for i in range(n):
        a = abs(z[i]) / radius
        nz[i] = a > 0.0
        log_a[i] = math.log(a) if a > 0.0 else -np.inf
        if a > 0.0 and log_a[i] > amax:
            amax = log_a[i]
    acc = 0.0
    for i in range(n):
        if nz[i]:
            acc += math.exp(c * (log_a[i] - amax))
    asym = (q - 1.0) * (math.log(acc) / q + amax / (q - 1.0))

    # bracket: hi has residual <= 0, lo has residual > 0
    if math.isnan(log_lam_hint):
        hi = asym
        g_hi = _residual(log_a, nz, hi, q, x)
        if g_hi > 0.0:
            hi += 1.0
            g_hi = _residual(log_a, nz, hi, q, x)
        lo = hi - 1.0
        g_lo = _residual(log_a, nz, lo, q, x)
        step = 1.0
        while g_lo <= 0.0:
            step *= 2.0
            lo -= step
            g_lo = _residual(log_a, nz, lo, q, x)
            if step > 1e4:
                return np.nan, -1
    else:
        start = min(log_lam_hint, asym)
        g0 = _residual(log_a, nz, start, q, x)
        if abs(g0) <= tol:
            _finish(z, radius, q, x, nz)
            return start, 1
        step = 1e-3
        if g0 > 0.0:
            lo, g_lo = start, g0
            hi = min(start + step, asym)
            g_hi = _residual(log_a, nz, hi, q, x)
            while g_hi > 0.0:
                lo, g_lo = hi, g_hi
                step *= 4.0
                hi = min(hi + step, asym + 1.0)
                g_hi = _residual(log_a, nz, hi, q, x)
        else:
            hi, g_hi = start, g0
            lo = start - step
            g_lo = _residual(log_a, nz, lo, q, x)
            while g_lo <= 0.0:
                hi, g_hi = lo, g_lo
                step *= 4.0
                lo -= step
                g_lo = _residual(log_a, nz, lo, q, x)
                if step > 1e6:
                    return np.nan, -1

    side = 0
    for it in range(max_iter):
        if abs(g_hi) <= tol:
            _residual(log_a, nz, hi, q, x)
            _finish(z, radius, q, x, nz)
            return hi, it + 2
        if abs(g_lo) <= tol:
            _residual(log_a, nz, lo, q, x)
            _finish(z, radius, q, x, nz)
            return lo, it + 2
        cand = hi - g_hi * (hi - lo) / (g_hi - g_lo)
        if not (min(lo, hi) < cand < max(lo, hi)) or it % 8 == 7:
            cand = 0.5 * (lo + hi)
        g = _residual(log_a, nz, cand, q, x)
        if g > 0.0:
            lo, g_lo = cand, g
            if side == -1:
                g_hi *= 0.5
            side = -1
        else:
            hi, g_hi = cand, g
            if side == 1:
                g_lo *= 0.5
            side = 1
    return np.nan, -1


@njit(cache=True)
def _finish(z, radius, q, x, nz):
    n = z.shape[0]
    top = -np.inf
    for i in range(n):
        if nz[i] and x[i] > top:
            top = x[i]
    acc = 0.0
    for i in range(n):
        if nz[i]:
            acc += math.exp(q * (x[i] - top))
    nrm = math.exp(top + math.log(acc) / q)
    shrink = 1.0 / nrm if nrm > 1.0 else 1.0
    for i in range(n):
        if nz[i]:
            t = math.exp(x[i]) * shrink
            z[i] = radius * t if z[i] > 0.0 else -radius * t
        else:
            z[i] = 0.0


def project_lq_inplace(z, q, radius, tol, state, max_iter=200):
    """Project the flat view ``z`` onto the ``l_q`` ball of ``radius`` in place."""
    if radius <= 0.0:
        z[:] = 0.0
        return
    if q >= 1e6:
        np.clip(z, -radius, radius, out=z)
        return
    log_lam, count = _project(z, q, radius, tol, max_iter, state.x, state.log_lam)
    if count < 0:
        raise NumericalError("l_q projection did not converge", residual=float("nan"))
    if count > 0:
        state.log_lam = log_lam
