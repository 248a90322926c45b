"""Fractional-order total generalized variation for 1D signal denoising.

The package discretises ``TGV^r`` for real orders ``r >= 1`` on a uniform
midpoint grid of the unit interval, solves the denoising problem with a
primal-dual method and learns ``(alpha, r)`` by exhaustive grid search.
"""

from .errors import FormatError, NumericalError, TrainingError
from .fracnorm import (
    FracDiffWeights,
    GagliardoParams,
    bbm_sweep,
    build_weights,
    frac_diff_adjoint,
    frac_diff_apply,
    gagliardo_seminorm,
    gagliardo_seminorm_line,
    ms_sweep,
)
from .prox import clip_interval, clip_linf, project_lq_ball, prox_fidelity
from .signal import (
    Grid,
    NoiseSpec,
    Signal,
    add_noise,
    gen_signal,
    l2_dist_sq,
    load_signal,
    make_grid,
    save_signal,
    standard_signal,
    tv,
)
from .solver import (
    DenoiseProblem,
    DenoiseResult,
    FracOrder,
    SolverOptions,
    Weights,
    limit_sweep_tgv,
    solve,
    tgv_seminorm,
)
from .trainer import BoxGrid, Landscape, LandscapeCell, cost, export_landscape, grid_search, refine_argmin

__version__ = "0.1.0"

__all__ = [
    "BoxGrid",
    "DenoiseProblem",
    "DenoiseResult",
    "FormatError",
    "FracDiffWeights",
    "FracOrder",
    "GagliardoParams",
    "Grid",
    "Landscape",
    "LandscapeCell",
    "NoiseSpec",
    "NumericalError",
    "Signal",
    "SolverOptions",
    "TrainingError",
    "Weights",
    "add_noise",
    "bbm_sweep",
    "build_weights",
    "clip_interval",
    "clip_linf",
    "cost",
    "export_landscape",
    "frac_diff_adjoint",
    "frac_diff_apply",
    "gagliardo_seminorm",
    "gagliardo_seminorm_line",
    "gen_signal",
    "grid_search",
    "l2_dist_sq",
    "limit_sweep_tgv",
    "load_signal",
    "make_grid",
    "ms_sweep",
    "project_lq_ball",
    "prox_fidelity",
    "refine_argmin",
    "save_signal",
    "solve",
    "standard_signal",
    "tgv_seminorm",
    "tv",
]
