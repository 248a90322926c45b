"""Discrete Gagliardo seminorms on the midpoint grid.

The seminorm ``|u|_{W^{s,p}}^p = int int |u(x)-u(y)|^p / |x-y|^{1+sp}`` is
approximated by a weighted sum over ordered node pairs ``i != j``::

    sum_{i != j} |u_i - u_j|^p * w_ij

Two weight rules are available.

``"cell"`` (default)
    ``w_ij`` is the exact integral of the kernel over cell ``i`` times cell
    ``j``. The sum is then the exact seminorm of the piecewise-constant
    function taking the value ``u_i`` on cell ``i``. The weights depend on
    ``|i - j|`` only, which makes the matrix Toeplitz.

``"midpoint"``
    ``w_ij = h^2 / |x_i - x_j|^{1+sp}``, the one-point rule per cell pair.
    It misses the near-diagonal mass, which is of order ``h^{1-sp}``, and
    degrades as ``sp -> 1``.

Both rules need ``s*p < 1``, which holds for the exponent ``p = 1 + s(1-s)``
on all of ``(0, 1)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .signal import Grid, Signal

RULES = ("cell", "midpoint")


@dataclass(frozen=True)
class GagliardoParams:
    s: float
    p: float

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise ValueError(f"fractional order s must lie in (0, 1), got {self.s}")
        if not (self.p >= 1.0):
            raise ValueError(f"integrability exponent p must be >= 1, got {self.p}")

    @classmethod
    def from_order(cls, s: float) -> "GagliardoParams":
        """Parameters tied to the order: ``p = 1 + s(1 - s)``."""
        return cls(s, 1.0 + s * (1.0 - s))

    @property
    def q(self) -> float:
        """Hoelder conjugate ``p / (p - 1)``; infinite for ``p = 1``."""
        return np.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    @property
    def kernel_exponent(self) -> float:
        return self.s * self.p


def toeplitz_weights(m: int, h: float, beta: float, rule: str = "cell") -> np.ndarray:
    """Weights ``w_k`` for index gaps ``k = 0..m-1`` and kernel ``|x-y|^{-1-beta}``.

    ``w_0 = 0`` under both rules.
    """
    if rule not in RULES:
        raise ValueError(f"unknown quadrature rule {rule!r}; choose from {RULES}")
    if not (0.0 < beta < 1.0):
        raise ValueError(f"kernel exponent s*p must lie in (0, 1), got {beta}")
    k = np.arange(m, dtype=np.float64)
    w = np.zeros(m)
    if m < 2:
        return w
    scale = h ** (1.0 - beta)
    kk = k[1:]
    if rule == "midpoint":
        w[1:] = scale * kk ** (-1.0 - beta)
        return w

    # exact cell integral: -(second difference of k^g) / (beta (1 - beta)), g = 1 - beta
    g = 1.0 - beta
    near = kk < 24
    kn = kk[near]
    direct = (2.0 * kn**g - (kn + 1.0) ** g - (kn - 1.0) ** g) / (beta * g)
    # far field: asymptotic series of the second difference, avoids cancellation
    kf = kk[~near]
    c2 = (g - 2.0) * (g - 3.0) / 12.0
    c4 = (g - 2.0) * (g - 3.0) * (g - 4.0) * (g - 5.0) / 360.0
    c6 = c4 * (g - 6.0) * (g - 7.0) / 56.0
    series = kf ** (-1.0 - beta) * (1.0 + c2 / kf**2 + c4 / kf**4 + c6 / kf**6)
    w[1:] = scale * np.concatenate([direct, series])
    return w


@dataclass(frozen=True, eq=False)
class FracDiffWeights:
    """Dense symmetric pair-weight matrix for one grid and parameter set."""

    grid: Grid
    params: GagliardoParams
    rule: str
    w: np.ndarray = field(repr=False)

    @property
    def root(self) -> np.ndarray:
        """``w_ij^{1/p}``, the coefficients of :func:`frac_diff_apply`."""
        return self.w ** (1.0 / self.params.p)


def build_weights(grid: Grid, params: GagliardoParams, rule: str = "cell") -> FracDiffWeights:
    wk = toeplitz_weights(grid.n, grid.h, params.kernel_exponent, rule)
    idx = np.arange(grid.n)
    w = wk[np.abs(idx[:, None] - idx[None, :])]
    w.flags.writeable = False
    return FracDiffWeights(grid, params, rule, w)


def _pair_sum(values: np.ndarray, w: np.ndarray, p: float) -> float:
    diff = np.abs(values[:, None] - values[None, :])
    if p != 1.0:
        diff = diff**p
    return float(np.sum(diff * w))


def gagliardo_seminorm(u: Signal, params: GagliardoParams, rule: str = "cell",
                       weights: FracDiffWeights | None = None) -> float:
    if weights is None:
        weights = build_weights(u.grid, params, rule)
    elif weights.grid != u.grid:
        raise ValueError("weights were built for a different grid")
    total = _pair_sum(np.asarray(u.values), weights.w, weights.params.p)
    return total ** (1.0 / weights.params.p)


def gagliardo_seminorm_line(u: Signal, params: GagliardoParams, L: float, m: int,
                            rule: str = "cell") -> float:
    """Seminorm over the line of the zero extension of ``u``, truncated to ``(-L, 1+L)``.

    The line is cut into cells of width ``1/m``; ``round(L*m)`` cells are added on
    each side of the unit interval. Inside ``(0, 1)`` the values of ``u`` are read
    off piecewise-constantly, so ``m`` may differ from ``u.n``. Only pairs with at
    least one node inside the support contribute, so the cost is
    ``O(m * (m + L*m))`` rather than quadratic in the line length.
    """
    if L <= 0:
        raise ValueError(f"truncation half-width must be positive, got {L}")
    if m < 2:
        raise ValueError(f"need at least 2 samples per unit length, got {m}")
    pad = int(round(L * m))
    h = 1.0 / m
    x = (np.arange(m) + 0.5) * h
    inside = np.asarray(u.values)[np.minimum((x * u.n).astype(int), u.n - 1)]
    total_n = m + 2 * pad
    wk = toeplitz_weights(total_n, h, params.kernel_exponent, rule)
    p = params.p

    # inside-inside block
    idx = np.arange(m)
    acc = _pair_sum(inside, wk[np.abs(idx[:, None] - idx[None, :])], p)

    # inside-outside pairs, both orderings; outside values are zero
    cum = np.concatenate([[0.0], np.cumsum(wk)])  # cum[k] = sum_{l < k} w_l

    def gap_sum(lo, hi):
        # sum of w_k for k in [lo, hi]
        return cum[hi + 1] - cum[lo]

    i = idx + pad
    left = gap_sum(i - pad + 1, i)  # j in [0, pad): gaps from i-pad+1 .. i
    last = total_n - 1
    right = gap_sum(np.full(m, m) - idx, last - i)  # j in [pad+m, total_n)
    acc += 2.0 * float(np.sum(np.abs(inside) ** p * (left + right)))
    return acc ** (1.0 / p)


def frac_diff_apply(v: Signal | np.ndarray, W: FracDiffWeights) -> np.ndarray:
    """Stacked weighted differences ``z_ij = (v_i - v_j) w_ij^{1/p}`` over ``i != j``.

    Pairs are ordered row-major with the diagonal skipped, so the result has
    length ``n(n-1)`` and ``||z||_p`` equals the Gagliardo seminorm of ``v``.
    """
    values = np.asarray(v.values if isinstance(v, Signal) else v, dtype=np.float64)
    z = (values[:, None] - values[None, :]) * W.root
    return z[_offdiag_mask(W.grid.n)]


def frac_diff_adjoint(y: np.ndarray, W: FracDiffWeights) -> np.ndarray:
    n = W.grid.n
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n * (n - 1),):
        raise ValueError(f"expected {n * (n - 1)} pair values, got shape {y.shape}")
    Y = np.zeros((n, n))
    Y[_offdiag_mask(n)] = y
    CY = Y * W.root
    return CY.sum(axis=1) - CY.sum(axis=0)


def _offdiag_mask(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


# --- limit sweeps ---------------------------------------------------------------------


def bbm_sweep(u: Signal, s_list: Iterable[float], rule: str = "cell") -> list[tuple[float, float]]:
    """Rows ``(s, (1-s) |u|_{W^{s,1}})`` for the large-order limit."""
    rows = []
    for s in s_list:
        value = gagliardo_seminorm(u, GagliardoParams(s, 1.0), rule)
        rows.append((float(s), (1.0 - s) * value))
    return rows


def ms_sweep(u: Signal, s_list: Iterable[float], L: float, m: int,
             rule: str = "cell") -> list[tuple[float, float]]:
    """Rows ``(s, s |u|_{W^{s,1}(line)})`` for the small-order limit."""
    rows = []
    for s in s_list:
        value = gagliardo_seminorm_line(u, GagliardoParams(s, 1.0), L, m, rule)
        rows.append((float(s), s * value))
    return rows


def write_sweep_csv(rows: Sequence[tuple[float, float]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "value"])
        for s, value in rows:
            writer.writerow([repr(float(s)), repr(float(value))])


# --- closed-form references -----------------------------------------------------------


def affine_seminorm_exact(s: float) -> float:
    """``|x|_{W^{s,1}(0,1)} = 2 / ((1-s)(2-s))``."""
    return 2.0 / ((1.0 - s) * (2.0 - s))


def indicator_line_seminorm_exact(s: float, L: float | None = None) -> float:
    """``|1_{(0,1)}|_{W^{s,1}}`` over the line, or over ``(-L, 1+L)`` when ``L`` is given.

    Full line: ``4 / (s(1-s))``. Truncation removes the far tails; each of the
    four inside/outside quadrants integrates to
    ``(1 - (1+L)^{1-s} + L^{1-s}) / (s(1-s))``.
    """
    if L is None:
        return 4.0 / (s * (1.0 - s))
    g = 1.0 - s
    return 4.0 * (1.0 - (1.0 + L) ** g + L**g) / (s * g)
