"""Projections and proximal maps used by the primal-dual solver."""

from __future__ import annotations

import numpy as np

from .errors import NumericalError
from .signal import Signal

# q at or above this is treated as the max-norm
Q_INF = 1e6


def clip_linf(z, radius: float) -> np.ndarray:
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    return np.clip(np.asarray(z, dtype=np.float64), -radius, radius)


def clip_interval(t: float, radius: float) -> float:
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    return float(min(max(t, -radius), radius))


def lq_norm(z, q: float) -> float:
    """``||z||_q`` computed without overflow for large ``q``."""
    a = np.abs(np.asarray(z, dtype=np.float64)).ravel()
    top = a.max(initial=0.0)
    if top == 0.0:
        return 0.0
    if not np.isfinite(q) or q >= Q_INF:
        return float(top)
    return float(top * np.sum((a / top) ** q) ** (1.0 / q))


def _inner_solve(log_a: np.ndarray, log_lam: float, q: float, iters: int = 60) -> np.ndarray:
    """Solve ``t + lam t^{q-1} = a`` per coordinate, returning ``log t``.

    Newton on ``G(x) = log(e^x + lam e^{(q-1)x}) - log a``, which is convex and
    increasing in ``x = log t``. Starting from the upper bound
    ``min(log a, (log a - log lam)/(q-1))`` the iterates decrease monotonically.
    """
    x = np.minimum(log_a, (log_a - log_lam) / (q - 1.0))
    for _ in range(iters):
        e2 = log_lam + (q - 1.0) * x
        lse = np.logaddexp(x, e2)
        G = lse - log_a
        w2 = np.exp(e2 - lse)
        step = G / (1.0 + (q - 2.0) * w2)
        x = x - step
        if np.max(np.abs(step), initial=0.0) < 1e-14:
            break
    return x


def _norm_from_log(x: np.ndarray, q: float) -> float:
    if x.size == 0:
        return 0.0
    top = x.max()
    return float(np.exp(top + np.log(np.sum(np.exp(q * (x - top)))) / q))


def project_lq_ball_with_multiplier(z, q: float, radius: float, tol: float = 1e-10,
                                    max_iter: int = 200, log_lam_hint: float | None = None):
    """Like :func:`project_lq_ball` but also returns ``log`` of the scaled multiplier.

    The multiplier lets repeated projections of slowly varying inputs start the
    outer search close to the answer.
    """
    z = np.asarray(z, dtype=np.float64)
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if not q > 1.0:
        raise ValueError(f"q must exceed 1, got {q}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if radius == 0.0:
        return np.zeros_like(z), None
    if q >= Q_INF:
        return clip_linf(z, radius), None
    if q == 2.0:
        nrm = float(np.linalg.norm(z))
        return (z if nrm <= radius else z * (radius / nrm)), None
    nrm = lq_norm(z, q)
    if nrm <= radius:
        return z.copy(), None
    if nrm <= radius * (1.0 + tol):
        # the multiplier is ~0 here and cannot be bracketed; radial scaling is within tol
        return z * (radius / nrm), None

    # unit ball in normalised coordinates a = |z| / radius, y = radius * t
    a = np.abs(z.ravel()) / radius
    nz = a > 0.0
    log_a = np.log(a[nz])

    def residual(log_lam):
        x = _inner_solve(log_a, log_lam, q)
        return _norm_from_log(x, q) - 1.0, x

    # large-multiplier asymptote gives a point with residual <= 0
    hi = (q - 1.0) * (np.log(np.sum(np.exp((q / (q - 1.0)) * (log_a - log_a.max())))) / q
                      + log_a.max() / (q - 1.0))
    g_hi, x_hi = residual(hi)
    best = (abs(g_hi), x_hi)
    if g_hi > 0:  # only from rounding; the asymptote is an upper bound for t
        hi += 1.0
        g_hi, x_hi = residual(hi)
    lo = hi - 1.0 if log_lam_hint is None else min(log_lam_hint, hi - 1e-3)
    g_lo, x_lo = residual(lo)
    step = 1.0
    while g_lo <= 0:
        step *= 2.0
        lo -= step
        g_lo, x_lo = residual(lo)
        if step > 1e4:
            raise NumericalError("l_q projection: cannot bracket multiplier", residual=g_lo)

    # Illinois false position on log(lambda), bisection when it stalls
    side = 0
    x = x_hi
    log_lam = hi
    for it in range(max_iter):
        if abs(g_hi) <= tol:
            x, log_lam = x_hi, hi
            break
        if abs(g_lo) <= tol:
            x, log_lam = x_lo, lo
            break
        cand = hi - g_hi * (hi - lo) / (g_hi - g_lo)
        if not (min(lo, hi) < cand < max(lo, hi)) or it % 8 == 7:
            cand = 0.5 * (lo + hi)
        g, xc = residual(cand)
        if abs(g) < best[0]:
            best = (abs(g), xc)
        if g > 0:
            lo, g_lo, x_lo = cand, g, xc
            if side == -1:
                g_hi *= 0.5
            side = -1
        else:
            hi, g_hi, x_hi = cand, g, xc
            if side == 1:
                g_lo *= 0.5
            side = 1
    else:
        raise NumericalError(
            f"l_q projection did not converge in {max_iter} iterations", residual=best[0]
        )

    t = np.zeros_like(a)
    t[nz] = np.exp(x)
    nrm = lq_norm(t, q)
    if nrm > 1.0:
        t /= nrm
    y = radius * np.sign(z.ravel()) * t
    return y.reshape(z.shape), log_lam


def project_lq_ball(z, q: float, radius: float, tol: float = 1e-10, max_iter: int = 200) -> np.ndarray:
    """Euclidean projection of ``z`` onto ``{y : ||y||_q <= radius}``.

    Points already inside are returned unchanged. Otherwise the KKT system
    ``y_i + mu q |y_i|^{q-1} sign(y_i) = z_i`` is solved with a bracketed
    outer search on the multiplier and a per-coordinate inner root solve,
    stopping once ``| ||y||_q - radius | <= tol * radius``. ``q = 2`` and
    ``q >= 1e6`` take closed-form paths.
    """
    return project_lq_ball_with_multiplier(z, q, radius, tol, max_iter)[0]


def prox_fidelity(u_bar, u_eta, step: float, h: float | None = None) -> np.ndarray:
    """Minimiser of ``||u - u_bar||^2 / (2 step) + h sum (u_i - u_eta_i)^2``."""
    step = np.asarray(step, dtype=np.float64)
    if np.any(step <= 0):
        raise ValueError("step must be positive")
    if isinstance(u_eta, Signal):
        h = u_eta.h if h is None else h
        u_eta = u_eta.values
    if h is None:
        raise ValueError("grid spacing h is required when u_eta is a plain array")
    u_bar = np.asarray(u_bar, dtype=np.float64)
    u_eta = np.asarray(u_eta, dtype=np.float64)
    if u_bar.shape != u_eta.shape:
        raise ValueError(f"shape mismatch: {u_bar.shape} vs {u_eta.shape}")
    c = 2.0 * step * h
    return (u_bar + c * u_eta) / (1.0 + c)
