"""Sweeps of the fractional seminorms towards their limits in the order.

Three tables are written to ``--out``:

* ``bbm.csv``: ``(1-s)|x|_{W^{s,1}(0,1)}`` against ``2/(2-s)``;
* ``ms.csv``: ``s|1_{(0,1)}|_{W^{s,1}}`` on a truncated line against the
  truncated closed form;
* ``tgv.csv``: ``TGV^{1+s}`` of the corner signal, next to ``alpha tv(u)``
  and the second-order value.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from fractgv import FracOrder, Signal, Weights, make_grid, standard_signal, tgv_seminorm, tv
from fractgv.fracnorm import affine_seminorm_exact, bbm_sweep, indicator_line_seminorm_exact, ms_sweep
from fractgv.solver import limit_sweep_tgv


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    parser = argparse.ArgumentParser(description="limit sweeps of the fractional seminorms")
    parser.add_argument("--n", type=int, default=1024, help="grid size of the BBM sweep")
    parser.add_argument("--tgv-n", type=int, default=256)
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--out", type=Path, default=Path("runs/limits"))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    g = make_grid(args.n)
    s_bbm = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99]
    rows = [(s, v, (1 - s) * affine_seminorm_exact(s)) for s, v in bbm_sweep(Signal(g, g.nodes), s_bbm)]
    write(args.out / "bbm.csv", ["s", "value", "reference"], rows)
    for s, v, ref in rows:
        print(f"bbm s={s:<5} value={v:.6f} reference={ref:.6f}")

    L, m = 50.0, 256
    ind = Signal(make_grid(m), np.ones(m))
    s_ms = [0.05, 0.1, 0.2, 0.3, 0.5]
    rows = [(s, v, s * indicator_line_seminorm_exact(s, L), 4 / (1 - s)) for s, v in ms_sweep(ind, s_ms, L, m)]
    write(args.out / "ms.csv", ["s", "value", "truncated_reference", "full_line"], rows)
    for s, v, ref, full in rows:
        print(f"ms  s={s:<5} value={v:.6f} truncated={ref:.6f} full_line={full:.6f}")

    u = standard_signal("corner", make_grid(args.tgv_n))
    a = args.alpha
    second = tgv_seminorm(u, FracOrder(2.0), Weights((a, a, a)))
    rows = limit_sweep_tgv(u, a, [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99])
    write(args.out / "tgv.csv", ["s", "value", "alpha_tv", "tgv2"],
          [(s, v, a * tv(u), second) for s, v in rows])
    for s, v in rows:
        print(f"tgv s={s:<5} value={v:.6f} alpha_tv={a * tv(u):.6f} tgv2={second:.6f}")


if __name__ == "__main__":
    main()
