"""Timing comparison of the jitted kernels against their pure-Python twins.

Run:  python benchmarks/compare_backends.py

When numba is active (default) each kernel's compiled dispatcher is timed
against its uncompiled ``py_func``; with PNP_BB84_NUMBA=0 both columns time
the same plain-Python function, which is the fallback the package runs on.
"""

from __future__ import annotations

import math
import time

import numpy as np

from pnp_bb84 import OptimizationProblem, Scenario, maximize
from pnp_bb84._accel import NUMBA_ACTIVE, py_func
from pnp_bb84 import _kernels
from pnp_bb84.params import BoundConventions, PhysicalParams

PHYS = PhysicalParams().to_array()
FLAGS = BoundConventions().to_flags()

CASES = [
    ("no_decoy_infinite", _kernels.rate_no_decoy_infinite,
     (20.0, 4.2e-5, 0.009, PHYS, FLAGS)),
    ("no_decoy_finite", _kernels.rate_no_decoy_finite,
     (20.0, 5e10, 4.2e-5, 0.009, 7.6e5,
      2.25e-10, 2.25e-10, 2.25e-10, 2.25e-10, PHYS, FLAGS)),
    ("decoy_infinite", _kernels.rate_decoy_infinite,
     (60.0, 6.6e-4, 1.5e-5, 0.023, PHYS, FLAGS)),
    ("decoy_finite", _kernels.rate_decoy_finite,
     (60.0, 5e10, 6.6e-4, 1.0e-4, 0.023, 1.4e6, 0.41, 0.58,
      1.5e-10, 1.5e-10, 1.5e-10, 1.5e-10, 1.5e-10, 1.5e-10, PHYS, FLAGS)),
]


def time_call(fn, args, repeats: int, inner: int = 1000) -> float:
    fn(*args)  # warm-up / compile
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def main() -> None:
    backend = "numba" if NUMBA_ACTIVE else "pure python (PNP_BB84_NUMBA=0)"
    print(f"active backend: {backend}\n")
    print(f"{'kernel':<20} {'compiled':>12} {'python':>12} {'speed-up':>9}")
    for name, kernel, args in CASES:
        t_fast = time_call(kernel, args, repeats=5)
        t_py = time_call(py_func(kernel), args, repeats=3, inner=200)
        ratio = t_py / t_fast if t_fast > 0 else float("nan")
        print(f"{name:<20} {t_fast * 1e6:>10.2f}us {t_py * 1e6:>10.2f}us "
              f"{ratio:>8.1f}x")

    print("\nend-to-end: one 13-parameter optimization (decoy_finite, 60 km)")
    problem = OptimizationProblem(scenario=Scenario.DECOY_FINITE,
                                  distance_km=60.0, n_pulses=5e10)
    maximize(problem)  # warm
    t0 = time.perf_counter()
    result = maximize(problem)
    dt = time.perf_counter() - t0
    print(f"maximize: {dt:.2f}s, {result.evaluations} evaluations, "
          f"rate {result.best_rate:.3e}")


if __name__ == "__main__":
    main()
