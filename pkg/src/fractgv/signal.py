"""Uniform midpoint grids on (0, 1), sampled signals, noise and signal files."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import FormatError


@dataclass(frozen=True)
class Grid:
    """Midpoint grid with ``n`` cells of width ``h = 1/n`` on the unit interval.

    Node ``i`` sits at the centre of cell ``i``, i.e. ``x_i = (i + 1/2) h``.
    """

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 nodes, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n, dtype=np.float64) + 0.5) * self.h


def make_grid(n: int) -> Grid:
    return Grid(n)


@dataclass(frozen=True, eq=False)
class Signal:
    """Real samples attached to a :class:`Grid`. The value array is read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if values.shape[0] != self.grid.n:
            raise ValueError(
                f"signal has {values.shape[0]} samples but grid has n={self.grid.n}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Signal":
        values = np.asarray(values, dtype=np.float64)
        return cls(Grid(values.shape[0]), values)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def h(self) -> float:
        return self.grid.h

    def with_values(self, values) -> "Signal":
        return Signal(self.grid, values)

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __len__(self):
        return self.grid.n


# --- piecewise signal synthesis -------------------------------------------------


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, x):
        return np.full_like(x, self.value, dtype=np.float64)


@dataclass(frozen=True)
class Affine:
    """``slope * x + intercept`` in the global coordinate ``x``."""

    slope: float
    intercept: float = 0.0

    def __call__(self, x):
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class Sine:
    amplitude: float
    frequency: float
    phase: float = 0.0
    offset: float = 0.0

    def __call__(self, x):
        return self.amplitude * np.sin(2.0 * np.pi * self.frequency * x + self.phase) + self.offset


Piece = Union[Constant, Affine, Sine]


def gen_signal(grid: Grid, pieces: Sequence[Piece], breakpoints: Sequence[float] = ()) -> Signal:
    """Sample a piecewise signal at the grid nodes.

    ``breakpoints`` holds the ``len(pieces) - 1`` interior breakpoints. Piece ``j``
    covers ``[b_{j-1}, b_j)``; the last piece is closed on the right.
    """
    pieces = list(pieces)
    breakpoints = [float(b) for b in breakpoints]
    if not pieces:
        raise ValueError("need at least one piece")
    if len(breakpoints) != len(pieces) - 1:
        raise ValueError(
            f"{len(pieces)} pieces need {len(pieces) - 1} breakpoints, got {len(breakpoints)}"
        )
    if any(not (0.0 <= b <= 1.0) for b in breakpoints):
        raise ValueError(f"breakpoints must lie in [0, 1]: {breakpoints}")
    if any(b1 < b0 for b0, b1 in zip(breakpoints, breakpoints[1:])):
        raise ValueError(f"breakpoints must be sorted: {breakpoints}")

    x = grid.nodes
    which = np.searchsorted(np.asarray(breakpoints), x, side="right")
    values = np.empty(grid.n)
    for j, piece in enumerate(pieces):
        mask = which == j
        if np.any(mask):
            values[mask] = piece(x[mask])
    return Signal(grid, values)


# Test signals used by the CLI and the experiment scripts. "corner" is continuous
# piecewise affine with kinks, "step" is piecewise constant with flat plateaus.
STANDARD_SIGNALS = {
    "flat": ([Constant(1.0)], []),
    "affine": ([Affine(1.0, 0.0)], []),
    "step": (
        [Constant(0.2), Constant(1.0), Constant(0.4), Constant(0.8)],
        [0.2, 0.45, 0.7],
    ),
    "corner": (
        [Affine(2.0, 0.0), Affine(-1.0, 0.9), Affine(0.0, 0.3), Affine(1.5, -0.825)],
        [0.3, 0.6, 0.75],
    ),
    "sine": ([Sine(0.5, 1.0, 0.0, 0.5)], []),
}


def standard_signal(kind: str, grid: Grid) -> Signal:
    try:
        pieces, breakpoints = STANDARD_SIGNALS[kind]
    except KeyError:
        raise ValueError(
            f"unknown signal kind {kind!r}; choose from {sorted(STANDARD_SIGNALS)}"
        ) from None
    return gen_signal(grid, pieces, breakpoints)


# --- noise ------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0
    zero_mean: bool = False

    def __post_init__(self):
        if not (self.sigma >= 0.0) or not math.isfinite(self.sigma):
            raise ValueError(f"noise sigma must be finite and >= 0, got {self.sigma}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")


def gaussian_samples(n: int, seed: int) -> np.ndarray:
    """``n`` standard normal draws by the basic Box-Muller transform.

    Uniform doubles come from numpy's PCG64 bit generator seeded with ``seed``
    (``Generator.random``, 53-bit mantissa). Pairs ``(u1, u2)`` map to
    ``sqrt(-2 log(1 - u1)) * cos(2 pi u2)`` and the matching ``sin`` branch.
    """
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    m = (n + 1) // 2
    u1 = rng.random(m)
    u2 = rng.random(m)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * m)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]


def add_noise(u: Signal, spec: NoiseSpec) -> Signal:
    if spec.sigma == 0.0:
        return u
    eta = spec.sigma * gaussian_samples(u.n, spec.seed)
    if spec.zero_mean:
        eta = eta - eta.mean()
    return u.with_values(u.values + eta)


# --- norms ------------------------------------------------------------------------


def _check_same_grid(u: Signal, v: Signal):
    if u.grid != v.grid:
        raise ValueError(f"grid mismatch: n={u.grid.n} vs n={v.grid.n}")


def l2_dist_sq(u: Signal, v: Signal) -> float:
    """Squared L2 distance ``h * sum (u_i - v_i)^2``."""
    _check_same_grid(u, v)
    diff = u.values - v.values
    return float(u.h * np.dot(diff, diff))


def tv(u) -> float:
    """Total variation: sum of the jump magnitudes ``|u_{i+1} - u_i|``."""
    values = u.values if isinstance(u, Signal) else np.asarray(u, dtype=np.float64)
    return float(np.sum(np.abs(np.diff(values))))


def mean(u: Signal) -> float:
    """Discrete integral ``h * sum u_i`` over the unit interval."""
    return float(u.h * np.sum(u.values))


# --- files ------------------------------------------------------------------------


def load_signal(path) -> Signal:
    """Read a one-value-per-line CSV. Blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read signal file: {exc}", path=path) from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            value = float(line)
        except ValueError:
            raise FormatError(f"not a number: {line!r}", path=path, lineno=lineno) from None
        if not math.isfinite(value):
            raise FormatError(f"non-finite value: {line!r}", path=path, lineno=lineno)
        values.append(value)
    if len(values) < 2:
        raise FormatError(f"need at least 2 samples, found {len(values)}", path=path)
    return Signal.from_values(values)


def format_float(x: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(x))


def save_signal(u: Signal, path) -> None:
    text = "".join(format_float(v) + "\n" for v in u.values)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
