"""Command-line front end: ``fractgv <command> [flags]``.

Commands: ``generate``, ``denoise``, ``train``, ``limits`` and ``seminorm``.
Every command accepts ``--config FILE`` with ``key=value`` lines; flags given
on the command line take precedence over the file. Numeric results go to
standard output as ``key=value`` lines.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numerical failure,
4 training failure (every cell failed), 5 a ``limits`` check failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import load_config, normalise_key
from .errors import FormatError, NumericalError, TrainingError
from .fracnorm import (
    RULES,
    GagliardoParams,
    affine_seminorm_exact,
    bbm_sweep,
    gagliardo_seminorm,
    indicator_line_seminorm_exact,
    ms_sweep,
    write_sweep_csv,
)
from .signal import (
    STANDARD_SIGNALS,
    NoiseSpec,
    Signal,
    add_noise,
    format_float,
    l2_dist_sq,
    load_signal,
    make_grid,
    save_signal,
    standard_signal,
    tv,
)
from .solver import METHODS, DenoiseProblem, FracOrder, SolverOptions, Weights, solve, tgv_seminorm
from .trainer import BoxGrid, export_landscape, grid_search, parse_range

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_TRAINING = 4
EXIT_CHECK = 5

# tolerances of the limit checks
BBM_TOL = 0.03
MS_TOL = 0.02
TGV_BOUND_TOL = 1e-4
TGV_ENDPOINT_TOL = 0.05


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Config-file values overlaid with the flags that were actually given."""

    values: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = {}
        if getattr(args, "config", None):
            values.update(load_config(args.config))
        for key, value in vars(args).items():
            if key in ("config", "command", "handler") or value is None:
                continue
            values[normalise_key(key)] = value
        return cls(values)

    def get(self, key, kind=str, default=None, required=False):
        if key not in self.values:
            if required:
                raise UsageError(f"missing required setting --{key.replace('_', '-')}")
            return default
        raw = self.values[key]
        try:
            return _convert(raw, kind)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {raw!r} ({exc})") from None

    def solver_options(self) -> SolverOptions:
        keys = ("max_iter", "tol_rel", "tol_field", "window", "safety", "rule", "proj_tol", "method")
        picked = {k: self.values[k] for k in keys if k in self.values}
        try:
            return SolverOptions.from_mapping(picked)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _convert(raw, kind):
    if kind is bool:
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ValueError("expected a boolean")
    if kind is list:
        if isinstance(raw, (list, tuple)):
            return [float(v) for v in raw]
        return [float(v) for v in str(raw).replace(",", " ").split()]
    if kind is int:
        value = float(raw)
        if value != int(value):
            raise ValueError("expected an integer")
        return int(value)
    return kind(raw)


def _emit(key, value):
    if isinstance(value, bool):
        text = "true" if value else "false"
    elif isinstance(value, float):
        text = format_float(value)
    else:
        text = str(value)
    print(f"{key}={text}")


# --- path validation ------------------------------------------------------------------


def _check_input(path):
    path = Path(path)
    if not path.is_file() or not os.access(path, os.R_OK):
        raise OSError(f"{path}: input file is missing or unreadable")
    return path


def _check_output(path):
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise OSError(f"{path}: output directory {parent} does not exist")
    if not os.access(parent, os.W_OK):
        raise OSError(f"{path}: output directory {parent} is not writable")
    return path


# --- commands -------------------------------------------------------------------------


def cmd_generate(cfg: RunConfig) -> int:
    kind = cfg.get("kind", str, "corner")
    if kind not in STANDARD_SIGNALS:
        raise UsageError(f"unknown --kind {kind!r}; choose from {sorted(STANDARD_SIGNALS)}")
    n = cfg.get("n", int, 256)
    sigma = cfg.get("sigma", float, 0.05)
    seed = cfg.get("seed", int, 0)
    zero_mean = cfg.get("zero_mean", bool, False)
    out_clean = _check_output(cfg.get("out_clean", str, required=True))
    out_noisy = _check_output(cfg.get("out_noisy", str, required=True))
    try:
        grid = make_grid(n)
        spec = NoiseSpec(sigma, seed, zero_mean)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    clean = standard_signal(kind, grid)
    noisy = add_noise(clean, spec)
    save_signal(clean, out_clean)
    save_signal(noisy, out_noisy)
    _emit("n", n)
    _emit("noise_l2_sq", l2_dist_sq(noisy, clean))
    return EXIT_OK


def _weights_for(cfg: RunConfig, r: float):
    alpha = cfg.get("alpha", list, required=True)
    order = FracOrder(r)
    if len(alpha) not in (1, order.k + 1):
        raise UsageError(f"order r={r} takes 1 or {order.k + 1} weights, got {len(alpha)}")
    return order, Weights.broadcast(alpha, order)


def cmd_denoise(cfg: RunConfig) -> int:
    src = _check_input(cfg.get("in", str, required=True))
    clean_path = cfg.get("clean", str)
    if clean_path is not None:
        _check_input(clean_path)
    out = _check_output(cfg.get("out", str, required=True))
    r = cfg.get("r", float, 1.0)
    try:
        order, weights = _weights_for(cfg, r)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    opts = cfg.solver_options()
    u_eta = load_signal(src)
    clean = load_signal(clean_path) if clean_path is not None else None
    if clean is not None and clean.grid != u_eta.grid:
        raise UsageError(f"--clean has {clean.n} samples, --in has {u_eta.n}")

    result = solve(DenoiseProblem(u_eta, order, weights, opts))
    save_signal(result.u_opt, out)
    _emit("energy", result.energy)
    _emit("tgv", result.tgv_value)
    _emit("fidelity", result.fidelity)
    _emit("iterations", result.iterations)
    _emit("converged", result.converged)
    if clean is not None:
        _emit("cost", l2_dist_sq(result.u_opt, clean))
    return EXIT_OK


def cmd_train(cfg: RunConfig) -> int:
    noisy_path = _check_input(cfg.get("noisy", str, required=True))
    clean_path = _check_input(cfg.get("clean", str, required=True))
    out_landscape = _check_output(cfg.get("out_landscape", str, required=True))
    out_signal = cfg.get("out_signal", str)
    if out_signal is not None:
        _check_output(out_signal)
    P = cfg.get("p", float, 0.005)
    jobs = cfg.get("jobs", int, 1)
    if jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {jobs}")
    try:
        box = BoxGrid.from_ranges(cfg.get("alpha_grid", str, "0:0.1:2.5"),
                                  cfg.get("r_grid", str, "1:0.05:2"), P,
                                  cfg.get("vector", bool, False))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    opts = cfg.solver_options()
    u_eta = load_signal(noisy_path)
    u_c = load_signal(clean_path)
    if u_eta.grid != u_c.grid:
        raise UsageError(f"--clean has {u_c.n} samples, --noisy has {u_eta.n}")

    landscape = grid_search(box, u_eta, u_c, opts, jobs)
    export_landscape(landscape, out_landscape)
    best = landscape.argmin
    if out_signal is not None:
        order = FracOrder(best.r)
        result = solve(DenoiseProblem(u_eta, order, Weights.broadcast(best.alpha, order), opts))
        save_signal(result.u_opt, out_signal)
    alpha = best.alpha
    alpha_text = (";".join(format_float(a) for a in alpha) if isinstance(alpha, tuple)
                  else format_float(alpha))
    print(f"argmin alpha={alpha_text} r={format_float(best.r)} cost={format_float(best.cost)}")
    _emit("cells", len(landscape.cells))
    _emit("failed", landscape.failures)
    return EXIT_OK


def _s_values(cfg: RunConfig, default: str):
    text = str(cfg.get("s_grid", str, default))
    try:
        values = parse_range(text) if ":" in text else tuple(_convert(text, list))
    except ValueError as exc:
        raise UsageError(f"bad --s-grid {text!r}: {exc}") from None
    if not values or any(not 0.0 < s < 1.0 for s in values):
        raise UsageError(f"--s-grid values must lie in (0, 1), got {values}")
    return values


def _report_rows(rows, references, rel_tol):
    ok_all = True
    for (s, value), ref in zip(rows, references):
        ok = abs(value - ref) <= rel_tol * abs(ref)
        ok_all &= ok
        _emit("s", s)
        _emit("value", value)
        _emit("reference", ref)
        _emit("ok", ok)
    return ok_all


def cmd_limits(cfg: RunConfig) -> int:
    check = cfg.get("check", str, required=True)
    out = cfg.get("out", str)
    if out is not None:
        _check_output(out)
    rule = cfg.get("rule", str, "cell")
    if rule not in RULES:
        raise UsageError(f"unknown --rule {rule!r}; choose from {RULES}")

    if check == "bbm":
        s_values = _s_values(cfg, "0.5,0.7,0.9,0.95,0.99")
        grid = make_grid(cfg.get("n", int, 1024))
        u = Signal(grid, grid.nodes)
        rows = bbm_sweep(u, s_values, rule)
        # (1-s) times the seminorm of x on (0, 1)
        refs = [(1.0 - s) * affine_seminorm_exact(s) for s in s_values]
        passed = _report_rows(rows, refs, BBM_TOL)
    elif check == "ms":
        s_values = _s_values(cfg, "0.2,0.3,0.5")
        L = cfg.get("L", float, 50.0)
        m = cfg.get("m", int, 256)
        u = Signal(make_grid(m), np.ones(m))
        rows = ms_sweep(u, s_values, L, m, rule)
        refs = [s * indicator_line_seminorm_exact(s, L) for s in s_values]
        passed = _report_rows(rows, refs, MS_TOL)
    elif check == "tgv":
        s_values = _s_values(cfg, "0.01,0.25,0.5,0.75,0.99")
        u = _limits_signal(cfg)
        alpha = cfg.get("alpha", list, [1.0])
        opts = cfg.solver_options()
        rows, passed = _tgv_limit_check(u, alpha, s_values, opts)
    else:
        raise UsageError(f"unknown --check {check!r}; choose from bbm, ms, tgv")

    if out is not None:
        write_sweep_csv(rows, out)
    _emit("check", "pass" if passed else "fail")
    return EXIT_OK if passed else EXIT_CHECK


def _limits_signal(cfg: RunConfig) -> Signal:
    path = cfg.get("in", str)
    if path is not None:
        return load_signal(_check_input(path))
    kind = cfg.get("kind", str, "corner")
    if kind not in STANDARD_SIGNALS:
        raise UsageError(f"unknown --kind {kind!r}; choose from {sorted(STANDARD_SIGNALS)}")
    return standard_signal(kind, make_grid(cfg.get("n", int, 256)))


def _tgv_limit_check(u, alpha, s_values, opts):
    """Bound ``TGV^{1+s} <= alpha_0 TV`` for every ``s``, endpoints against the integer orders."""
    alpha = list(alpha)
    if len(alpha) not in (1, 2):
        raise UsageError(f"orders in (1, 2) take 1 or 2 weights, got {len(alpha)}")
    a0 = alpha[0]
    bound = a0 * tv(u)
    rows = []
    passed = True
    for s in s_values:
        order = FracOrder(1.0 + s)
        value = tgv_seminorm(u, order, Weights.broadcast(alpha, order), opts)
        rows.append((s, value))
        ok = value <= bound * (1.0 + TGV_BOUND_TOL) + 1e-12
        passed &= ok
        _emit("s", s)
        _emit("value", value)
        _emit("bound", bound)
        _emit("ok", ok)
    s_lo, v_lo = rows[0]
    s_hi, v_hi = rows[-1]
    if s_lo <= 0.05:
        ok = abs(v_lo - bound) <= TGV_ENDPOINT_TOL * max(bound, 1e-300)
        passed &= ok
        _emit("tv_reference", bound)
        _emit("tv_endpoint_ok", ok)
    if s_hi >= 0.95:
        # integer order 2 reads alpha_0 and alpha_1 only; the third entry is unused
        a1 = alpha[-1]
        ref = tgv_seminorm(u, FracOrder(2.0), Weights((a0, a1, a1)), opts)
        ok = abs(v_hi - ref) <= TGV_ENDPOINT_TOL * max(abs(ref), 1e-300)
        passed &= ok
        _emit("tgv2_reference", ref)
        _emit("tgv2_endpoint_ok", ok)
    return rows, passed


def cmd_seminorm(cfg: RunConfig) -> int:
    u = load_signal(_check_input(cfg.get("in", str, required=True)))
    if cfg.get("tgv", bool, False):
        r = cfg.get("r", float, required=True)
        try:
            order, weights = _weights_for(cfg, r)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        value = tgv_seminorm(u, order, weights, cfg.solver_options())
    else:
        s = cfg.get("s", float, required=True)
        p = cfg.get("p", float)
        rule = cfg.get("rule", str, "cell")
        if rule not in RULES:
            raise UsageError(f"unknown --rule {rule!r}; choose from {RULES}")
        try:
            params = GagliardoParams.from_order(s) if p is None else GagliardoParams(s, p)
            if params.kernel_exponent >= 1.0:
                raise ValueError(f"need s*p < 1, got {params.kernel_exponent}")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        value = gagliardo_seminorm(u, params, rule)
    _emit("value", value)
    return EXIT_OK


# --- parser ---------------------------------------------------------------------------


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--max-iter", type=int)
    g.add_argument("--tol-rel", type=float)
    g.add_argument("--tol-field", type=float)
    g.add_argument("--window", type=int)
    g.add_argument("--safety", type=float)
    g.add_argument("--proj-tol", type=float)
    g.add_argument("--rule", choices=RULES)
    g.add_argument("--method", choices=METHODS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractgv", description="Fractional-order TGV denoising and parameter learning in 1D."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value file; flags override its entries")
        p.set_defaults(handler=handler)
        return p

    p = command("generate", cmd_generate, "write a clean and a noisy test signal")
    p.add_argument("--kind", choices=sorted(STANDARD_SIGNALS))
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--zero-mean", action="store_true", default=None)
    p.add_argument("--out-clean")
    p.add_argument("--out-noisy")

    p = command("denoise", cmd_denoise, "solve the denoising problem for one (alpha, r)")
    p.add_argument("--in", dest="in_")
    p.add_argument("--clean")
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--r", type=float)
    p.add_argument("--out")
    _add_solver_flags(p)

    p = command("train", cmd_train, "grid search over (alpha, r)")
    p.add_argument("--noisy")
    p.add_argument("--clean")
    p.add_argument("--p", type=float, help="box parameter P in (0, 1)")
    p.add_argument("--alpha-grid", help="min:step:max")
    p.add_argument("--r-grid", help="min:step:max")
    p.add_argument("--vector", action="store_true", default=None,
                   help="let the weight components vary independently")
    p.add_argument("--out-landscape")
    p.add_argument("--out-signal")
    p.add_argument("--jobs", type=int)
    _add_solver_flags(p)

    p = command("limits", cmd_limits, "check the small- and large-order limits")
    p.add_argument("--check", choices=("bbm", "ms", "tgv"))
    p.add_argument("--s-grid", help="comma list or min:step:max")
    p.add_argument("--n", type=int)
    p.add_argument("--L", type=float, dest="L")
    p.add_argument("--m", type=int)
    p.add_argument("--in", dest="in_")
    p.add_argument("--kind", choices=sorted(STANDARD_SIGNALS))
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--out")
    _add_solver_flags(p)

    p = command("seminorm", cmd_seminorm, "Gagliardo or fractional TGV seminorm of a signal")
    p.add_argument("--in", dest="in_")
    p.add_argument("--s", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--tgv", action="store_true", default=None)
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--r", type=float)
    _add_solver_flags(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if hasattr(args, "in_"):
        args.__dict__["in"] = args.__dict__.pop("in_")
    try:
        cfg = RunConfig.from_args(args)
        return args.handler(cfg)
    except UsageError as exc:
        print(f"fractgv {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"fractgv {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"fractgv {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TrainingError as exc:
        print(f"fractgv {args.command}: training failed: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except ValueError as exc:
        print(f"fractgv {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
