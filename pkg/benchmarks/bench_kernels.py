#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-NumPy fallback.

Times the six-mode integration kernel on the standard gain operating
point (flux 0.35, pump 9.2 GHz at -78 dBm, fitted couplings) and a short
gain spectrum.  Usage::

    python benchmarks/bench_kernels.py [--points N] [--repeats R]
"""

import argparse
import math
import time

import numpy as np

from twpasim import (MediumParams, ModeSet4WM, SnailSpec, ToneConfig,
                     amplitude_from_dbm, cell_coefficients,
                     equilibrium_phase)
from twpasim import _kernels
from twpasim.cme import _pack_4wm

BETA, GAMMA, AMP_SCALE = 0.104388, 0.122339, 1.55


def standard_problem():
    spec = SnailSpec(I0=2.2e-6, r=0.07, Cg=250e-15, CJ=35e-15, N=700,
                     tan_delta=2.9e-3)
    c = cell_coefficients(spec, equilibrium_phase(spec, 0.35))
    m = MediumParams.from_cell(spec, c)
    ws = 2 * math.pi * 7.6e9
    wap = 2 * math.pi * 9.2e9
    a_s = amplitude_from_dbm(m, ws, -130.0, AMP_SCALE)
    a_p = amplitude_from_dbm(m, wap, -78.0, AMP_SCALE)
    modes = ModeSet4WM.initial(ws, wap, a_s, a_p)
    p = _pack_4wm(m, modes, BETA, GAMMA, pump_depletion=True)
    return m, modes.amplitudes, p


def time_backend(fn, y0, p, x_eval, repeats):
    # one untimed call first (JIT compilation / cache load)
    fn(_kernels.KIND_4WM, y0, p, x_eval, 1e-10, 1e-20, 2_000_000)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        y, status = fn(_kernels.KIND_4WM, y0, p, x_eval, 1e-10, 1e-20,
                       2_000_000)
        best = min(best, time.perf_counter() - t0)
    assert status == _kernels.STATUS_OK
    return best, y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=65,
                    help="trajectory sample points")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    m, y0, p = standard_problem()
    x_eval = np.linspace(0.0, m.N, args.points)

    rows = []
    t_np, y_np = time_backend(_kernels.integrate_numpy, y0, p, x_eval,
                              args.repeats)
    rows.append(("numpy", t_np))
    if _kernels.integrate_numba is not None:
        t_nb, y_nb = time_backend(_kernels.integrate_numba, y0, p, x_eval,
                                  args.repeats)
        rows.append(("numba", t_nb))
        drift = float(np.max(np.abs(y_nb - y_np)))
        print(f"max |numba - numpy| over the trajectory: {drift:.3e}")
    else:
        print("numba backend unavailable (TWPASIM_NO_NUMBA set or numba "
              "missing); timing numpy only")

    print(f"\nsix-mode integration, 700 cells, rtol 1e-10, "
          f"{args.points} samples (best of {args.repeats}):")
    for name, t in rows:
        print(f"  {name:6s} {t * 1e3:9.2f} ms")
    if len(rows) == 2:
        print(f"  speedup {rows[0][1] / rows[1][1]:.1f}x")


if __name__ == "__main__":
    main()
