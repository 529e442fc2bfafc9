"""Timing comparison of the two kernel backends.

Runs the integration and pointwise entry points on representative
workloads and prints one row per operation with both timings.  The jit
backend is warmed before measurement so the table reflects steady-state
cost, not compilation.

Usage: python3 benchmarks/bench_kernels.py [--repeat 7]
"""

import argparse
import math
import statistics
import time

import numpy as np


def _workloads():
    rng = np.random.default_rng(42)
    knots = np.linspace(0.0, 45.0, 400)
    steps = rng.uniform(0.1, 1.0, 399)
    values = np.concatenate([[0.0], np.cumsum(steps)])
    values *= 1.05 / values[-1]
    # family shape: kink, inverse denominator, peak base, log shift,
    # bubble coefficient, log scale, exponent ratio
    shape = np.array(
        [3.1016218687445782, 0.0922132713348629, 0.8628820407064558,
         -0.9992927708781537, math.pi, math.log(0.01), 2.0]
    )
    heights = rng.uniform(0.0, 1.0, 6400)
    weights = np.exp(-np.linspace(0.0, 45.0, 6400))
    return knots, values, shape, heights, weights


def _bench(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args()

    from mtlab import _kernels_np

    backends = [("numpy", _kernels_np)]
    try:
        from mtlab import _kernels_nb

        _kernels_nb.backend_ready()
        backends.append(("numba", _kernels_nb))
    except ImportError as exc:
        print(f"jit backend unavailable ({exc}); timing numpy only")

    knots, values, shape, heights, weights = _workloads()
    operations = {
        "integrate_piecewise(400 knots)": lambda mod: mod.integrate_piecewise(
            knots, values, 2, 1, 1.0, 4.0 * math.pi, 1e-10
        ),
        "integrate_bubble(two pieces)": lambda mod: (
            mod.integrate_bubble(0.0, 3.1016218687445782, shape, 2, 1, 1.0, 4.0 * math.pi, 1e-10),
            mod.integrate_bubble(3.1016218687445782, 49.2, shape, 2, 1, 1.0, 4.0 * math.pi, 1e-10),
        ),
        "weighted_values_and_slopes(6400)": lambda mod: mod.weighted_values_and_slopes(
            heights, weights, 2, 1, 1.0, 4.0 * math.pi
        ),
    }

    # warm every (backend, operation) pair once before timing
    for _, module in backends:
        for op in operations.values():
            op(module)

    width = max(len(name) for name in operations)
    header = f"{'operation':<{width}}"
    for name, _ in backends:
        header += f"  {name + ' (ms)':>12}"
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for op_name, op in operations.items():
        row = f"{op_name:<{width}}"
        timings = []
        for _, module in backends:
            elapsed = _bench(lambda: op(module), args.repeat)
            timings.append(elapsed)
            row += f"  {elapsed * 1e3:>12.3f}"
        if len(timings) == 2 and timings[1] > 0:
            row += f"  {timings[0] / timings[1]:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
