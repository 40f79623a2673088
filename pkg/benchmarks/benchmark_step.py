"""Compare the numba and numpy step kernels on the parabolic solver.

Usage: python3 benchmarks/benchmark_step.py [--sizes 32,64] [--steps 20]
"""

import argparse
import time

import numpy as np

from carnot._kernels import available_backends, step_grid
from carnot.parabolic import EvolutionConfig, GridSpec, init_state, stable_dt


def bench(backend: str, n: int, steps: int) -> float:
    grid = GridSpec(n_xy=n, n_ell=n)
    config = EvolutionConfig(p=1.7, potential=None, D_max=2.0)
    state = init_state(grid, config)
    V = np.zeros_like(state.u)
    dt = stable_dt(grid, config)
    u = state.u
    # warm-up (jit compilation for the numba backend)
    u, _, _, _ = step_grid(u, V, grid.xs, grid.xs, grid.h_xy, grid.h_ell,
                           config.p, config.eta, config.diffusivity_cap, dt,
                           backend=backend)
    t0 = time.perf_counter()
    for _ in range(steps):
        u, _, _, _ = step_grid(u, V, grid.xs, grid.xs, grid.h_xy, grid.h_ell,
                               config.p, config.eta, config.diffusivity_cap, dt,
                               backend=backend)
    return (time.perf_counter() - t0) / steps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="32,64")
    ap.add_argument("--steps", type=int, default=20)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    for n in sizes:
        times = {}
        for backend in backends:
            times[backend] = bench(backend, n, args.steps)
            rate = n ** 3 / times[backend] / 1e6
            print(f"n={n:4d} {backend:6s}: {times[backend] * 1e3:8.2f} ms/step "
                  f"({rate:6.1f} Mnode/s)")
        if len(times) == 2:
            print(f"n={n:4d} speedup numba/numpy: "
                  f"{times['numpy'] / times['numba']:.2f}x")


if __name__ == "__main__":
    main()
