"""Benchmark the numba kernel against the pure-numpy fallback.

Runs the inner quadrature of one representative density-matrix entry
(center of the bundled fig2a configuration) with both backends, checks
they agree, and prints timings.

Usage: python benchmarks/bench_backend.py [repeats]
"""
import sys
import time
from pathlib import Path

import numpy as np

from spdcsim import backend
from spdcsim.config import load_config
from spdcsim.kernel import geometric_matrix
from spdcsim.paraxial import expansion_blocks
from spdcsim.quadrature import gauss_legendre


def build_workload(config, n_extra_ws=96):
    """One entry's kernel inputs, widened in omega_s for a meatier batch."""
    alpha = config.resolve_alpha()
    geometry = config.geometry(alpha)
    grid = config.grid_omega()
    w_row = w_col = grid[len(grid) // 2]
    window = config.pump.signal_window(w_row, w_col, config.quadrature.window_width)
    ws, wsw = gauss_legendre(window[0], window[1], n_extra_ws)
    pa = np.conj(config.pump.amplitude(ws + w_row)) * config.pump.amplitude(ws + w_col) * wsw
    ks0, ki0, f0, g1, h = expansion_blocks(ws, w_row, config.crystal, geometry)
    d0 = ks0 + ki0
    half_l = config.crystal.half_length
    zn, zw = gauss_legendre(-half_l, half_l, config.quadrature.nz)
    zpn, zpw = gauss_legendre(-half_l, half_l, config.quadrature.nzp)
    gmat = geometric_matrix(config.beams)
    return (pa, f0, f0, g1, g1, h, h, d0, d0, zn, zw, zpn, zpw, gmat,
            config.beams.pump_waist_um ** 2)


def time_fn(fn, args, repeats):
    fn(*args)  # warmup / JIT compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    config, _ = load_config(Path(__file__).parent.parent / "configs" / "fig2a.json")
    args = build_workload(config)
    nodes = len(args[0]) * len(args[9]) * len(args[11])
    print(f"one-entry workload: {nodes} (omega_s, z, z') kernel nodes")

    t_np = time_fn(backend.entry_quadrature_numpy, args, repeats)
    v_np = backend.entry_quadrature_numpy(*args)[0]
    print(f"numpy : {t_np * 1e3:8.2f} ms  ({nodes / t_np / 1e6:.2f} Mnodes/s)")

    if backend.HAVE_NUMBA:
        t_nb = time_fn(backend.entry_quadrature_numba, args, repeats)
        v_nb = backend.entry_quadrature_numba(*args)[0]
        rel = abs(v_nb - v_np) / abs(v_np)
        print(f"numba : {t_nb * 1e3:8.2f} ms  ({nodes / t_nb / 1e6:.2f} Mnodes/s)")
        print(f"speedup numba/numpy: {t_np / t_nb:.1f}x, agreement: {rel:.2e}")
    else:
        print("numba : not installed, skipped")


if __name__ == "__main__":
    main()
