#!/usr/bin/env python3
"""Benchmark the compiled ADI kernel against the NumPy fallback.

Times the raw kinetic step on a battery of grid sizes and then a full
default simulation through each backend.
"""

import argparse
import time

import numpy as np

from qtnn import kernels
from qtnn import schrodinger as sch


def time_kinetic(fn, psi, prop, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(psi, prop.rx, prop.ry, prop.cpx, prop.invdx, prop.cpy, prop.invdy)
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="128,256,384", help="comma-separated square grid sizes")
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--full-run-steps", type=int, default=400)
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"selected backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print()
    print(f"{'grid':>10s} " + " ".join(f"{name + ' ms/step':>16s}" for name in backends) + f" {'speedup':>9s}")
    for size in (int(s) for s in args.sizes.split(",")):
        grid = sch.GridSpec(nx=size, ny=size, n_steps=1, snapshot_stride=1)
        barrier = sch.BarrierGeometry(
            height=2.0, x_start=size * 0.05 - 0.05, x_end=size * 0.05 + 0.45
        )
        potential = sch.build_potential(grid, barrier)
        field = sch.init_gaussian_packet(
            grid, ((size - 1) * 0.05, (size - 1) * 0.05), 1.0, (1.0, 0.0), potential
        )
        prop = sch.Propagator(grid, potential)
        psi = field.psi * prop.half_phase
        times = {name: time_kinetic(fn, psi, prop, args.repeats) for name, fn in backends.items()}
        row = f"{size}x{size:>5d} " + " ".join(f"{times[name] * 1e3:16.3f}" for name in backends)
        if "cython" in times and "python" in times:
            row += f" {times['python'] / times['cython']:8.2f}x"
        print(row)

    results = {}
    for name in backends:
        kernels.kinetic_step = backends[name]
        grid = sch.GridSpec(n_steps=args.full_run_steps, snapshot_stride=args.full_run_steps)
        barrier = sch.BarrierGeometry(height=2.0, x_start=12.25, x_end=13.25)
        t0 = time.perf_counter()
        sch.run_simulation(grid, barrier, center=(8.0, 12.75), sigma=1.0, momentum=(1.0, 0.0))
        results[name] = time.perf_counter() - t0
    kernels.kinetic_step = backends[kernels.BACKEND]
    print()
    for name, elapsed in results.items():
        print(f"full run ({args.full_run_steps} steps, default grid) via {name:>7s}: {elapsed:6.2f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
