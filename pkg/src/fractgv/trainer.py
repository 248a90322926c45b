"""Exhaustive grid search over the regularisation weight and the order.

The cost of a cell ``(alpha, r)`` is the squared L2 distance between the
denoised signal and the clean one. Cells are independent, so a process pool
may evaluate them in any order; the landscape is always assembled in the
canonical order (``r`` outer, ``alpha`` inner), which makes the result
independent of the schedule.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NumericalError, TrainingError
from .signal import Signal, format_float, l2_dist_sq
from .solver import DenoiseProblem, FracOrder, SolverOptions, Weights, solve

MAX_CELLS = 10**6
_ROUND = 12  # decimals kept when generating grid values, removes float drift


def parse_range(text: str) -> tuple:
    """Values of ``"min:step:max"`` (or a single number) as a sorted tuple.

    ``max`` is included when it lies on the lattice up to rounding.
    """
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"grid must be 'min:step:max' or a number, got {text!r}") from None
    if len(nums) == 1:
        return (nums[0],)
    if len(nums) != 3:
        raise ValueError(f"grid must be 'min:step:max' or a number, got {text!r}")
    lo, step, hi = nums
    if not all(math.isfinite(v) for v in nums):
        raise ValueError(f"grid bounds must be finite: {text!r}")
    if step <= 0 or hi < lo:
        raise ValueError(f"need step > 0 and max >= min in {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + i * step, _ROUND) for i in range(count))


@dataclass(frozen=True)
class BoxGrid:
    """Discrete admissible set for ``(alpha, r)``.

    In scalar mode every component of the weight vector takes the same grid
    value. In vector mode the components range independently over
    ``alpha_values``, so an order with ``floor(r) = k`` contributes
    ``len(alpha_values)**(k+1)`` cells.

    ``alpha = 0`` is accepted as an explicit degenerate point below the box
    ``[P, 1/P]``; the solve is skipped there and the noisy signal returned.
    """

    alpha_values: tuple
    r_values: tuple
    P: float
    vector: bool = False

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alpha_values)
        rs = tuple(float(r) for r in self.r_values)
        object.__setattr__(self, "alpha_values", alphas)
        object.__setattr__(self, "r_values", rs)
        P = float(self.P)
        if not 0.0 < P < 1.0:
            raise ValueError(f"P must lie in (0, 1), got {P}")
        if not alphas or not rs:
            raise ValueError("alpha and r grids must be nonempty")
        for name, seq in (("alpha", alphas), ("r", rs)):
            if any(b <= a for a, b in zip(seq, seq[1:])):
                raise ValueError(f"{name} grid must be strictly increasing")
        lo, hi = P, 1.0 / P
        bad = [a for a in alphas if a != 0.0 and not lo <= a <= hi]
        if bad:
            raise ValueError(f"alpha values outside {{0}} u [{lo}, {hi}]: {bad[:5]}")
        bad = [r for r in rs if not 1.0 <= r <= hi]
        if bad:
            raise ValueError(f"r values outside [1, {hi}]: {bad[:5]}")
        if self.size > MAX_CELLS:
            raise ValueError(f"grid has {self.size} cells, more than the limit {MAX_CELLS}")

    @classmethod
    def from_ranges(cls, alpha_grid: str, r_grid: str, P: float, vector: bool = False) -> "BoxGrid":
        return cls(parse_range(alpha_grid), parse_range(r_grid), P, vector)

    def alphas_for(self, r: float) -> list:
        """Weight settings enumerated at order ``r``, in canonical order."""
        if not self.vector:
            return [a for a in self.alpha_values]
        k = FracOrder(r).k
        return [tuple(c) for c in itertools.product(self.alpha_values, repeat=k + 1)]

    def cells(self) -> list:
        """``(alpha, r)`` pairs, ``r`` outer and ``alpha`` inner."""
        return [(a, r) for r in self.r_values for a in self.alphas_for(r)]

    @property
    def size(self) -> int:
        if not self.vector:
            return len(self.alpha_values) * len(self.r_values)
        m = len(self.alpha_values)
        return sum(m ** (FracOrder(r).k + 1) for r in self.r_values)


@dataclass(frozen=True)
class LandscapeCell:
    alpha: object  # a float in scalar mode, a tuple in vector mode
    r: float
    cost: float
    iterations: int
    converged: bool

    @property
    def failed(self) -> bool:
        return not math.isfinite(self.cost)


@dataclass
class Landscape:
    box: BoxGrid
    cells: list
    argmin: LandscapeCell
    digest: str = ""
    failures: int = field(default=0)


def _alpha_key(alpha):
    return tuple(alpha) if isinstance(alpha, tuple) else (alpha,)


def cost(alpha, r: float, u_eta: Signal, u_c: Signal, opts: SolverOptions | None = None) -> LandscapeCell:
    """``I(alpha, r) = ||u_{alpha,r} - u_c||^2``. Solver failures give an infinite cost."""
    if u_eta.grid != u_c.grid:
        raise ValueError(f"grid mismatch: n={u_eta.n} vs n={u_c.n}")
    opts = opts or SolverOptions()
    order = FracOrder(r)
    weights = Weights.broadcast(alpha, order)
    try:
        result = solve(DenoiseProblem(u_eta, order, weights, opts))
    except NumericalError:
        return LandscapeCell(alpha, r, math.inf, 0, False)
    value = l2_dist_sq(result.u_opt, u_c)
    if not math.isfinite(value):
        return LandscapeCell(alpha, r, math.inf, result.iterations, False)
    return LandscapeCell(alpha, r, value, result.iterations, result.converged)


def select_argmin(cells: Sequence[LandscapeCell]) -> LandscapeCell:
    """Lowest cost; ties go to the smaller ``r``, then the smaller ``alpha``."""
    finite = [c for c in cells if not c.failed]
    if not finite:
        raise TrainingError(f"all {len(cells)} cells failed")
    return min(finite, key=lambda c: (c.cost, c.r, _alpha_key(c.alpha)))


def input_digest(u_eta: Signal, u_c: Signal, box: BoxGrid, opts: SolverOptions) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(u_eta.values).tobytes())
    h.update(np.ascontiguousarray(u_c.values).tobytes())
    h.update(repr((box, opts)).encode())
    return h.hexdigest()


def _evaluate(task):
    alpha, r, u_eta, u_c, opts = task
    return cost(alpha, r, u_eta, u_c, opts)


def grid_search(box: BoxGrid, u_eta: Signal, u_c: Signal, opts: SolverOptions | None = None,
                jobs: int = 1) -> Landscape:
    """Evaluate every cell of ``box``; ``jobs > 1`` uses a process pool."""
    opts = opts or SolverOptions()
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    tasks = [(a, r, u_eta, u_c, opts) for a, r in box.cells()]
    if jobs == 1 or len(tasks) == 1:
        cells = [_evaluate(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map preserves the submission order whatever the completion order
            cells = list(pool.map(_evaluate, tasks, chunksize=chunk))
    best = select_argmin(cells)
    failures = sum(c.failed for c in cells)
    return Landscape(box, cells, best, input_digest(u_eta, u_c, box, opts), failures)


def _format_alpha(alpha) -> str:
    if isinstance(alpha, tuple):
        return ";".join(format_float(a) for a in alpha)
    return format_float(alpha)


def _format_cost(value: float) -> str:
    return "inf" if not math.isfinite(value) else format_float(value)


def export_landscape(landscape: Landscape, path) -> None:
    """Write the landscape CSV, ``r`` outer and ``alpha`` inner.

    Vector-mode weights are written as ``;``-separated components.
    """
    path = Path(path)
    best = landscape.argmin
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["alpha", "r", "cost", "iterations", "converged"])
            for c in landscape.cells:
                writer.writerow([_format_alpha(c.alpha), format_float(c.r), _format_cost(c.cost),
                                 c.iterations, "true" if c.converged else "false"])
            fh.write(f"# argmin,{_format_alpha(best.alpha)},{format_float(best.r)},"
                     f"{_format_cost(best.cost)}\n")
    except OSError as exc:
        raise OSError(f"{path}: cannot write landscape: {exc}") from exc


def _refine_axis(values: Sequence[float], centre: float, factor: int) -> tuple:
    values = list(values)
    if len(values) == 1:
        return (centre,)
    i = values.index(centre)
    gaps = [b - a for a, b in zip(values, values[1:])]
    near = [gaps[j] for j in (i - 1, i) if 0 <= j < len(gaps)]
    step = min(near) / factor
    lo = values[i - 1] if i > 0 else centre
    hi = values[i + 1] if i + 1 < len(values) else centre
    below = int(round((centre - lo) / step))
    above = int(round((hi - centre) / step))
    # built outwards from the centre so the incumbent stays exactly on the grid
    out = [centre + j * step for j in range(-below, above + 1)]
    out = [round(v, _ROUND) if j != 0 else centre for j, v in zip(range(-below, above + 1), out)]
    return tuple(v for v in out if values[0] <= v <= values[-1])


def refine_argmin(landscape: Landscape, factor: int = 2) -> BoxGrid:
    """Box over the 3x3 neighbourhood of the argmin at ``1/factor`` of the spacing.

    The neighbourhood is clipped to the original grid range, and weights that
    fall strictly between 0 and ``P`` are dropped. The incumbent itself is
    always a node of the refined box. In vector mode the weight axis is
    refined around every component of the incumbent weight vector.
    """
    if isinstance(factor, bool) or int(factor) != factor or factor < 2:
        raise ValueError(f"refinement factor must be an integer >= 2, got {factor}")
    factor = int(factor)
    box = landscape.box
    best = landscape.argmin
    r_values = _refine_axis(box.r_values, best.r, factor)
    alpha_values = set()
    for a in _alpha_key(best.alpha):
        alpha_values.update(_refine_axis(box.alpha_values, a, factor))
    alpha_values = sorted(a for a in alpha_values if a == 0.0 or a >= box.P)
    return BoxGrid(tuple(alpha_values), r_values, box.P, box.vector)
