"""Compare the compiled and pure-Python discrete-event kernels.

Runs the same simulation workload through both implementations of the event
loop and reports wall-clock times, the speedup, and a bitwise comparison of
the results (both kernels execute identical code, so with the same seed they
must produce identical event streams).

Usage:
    python3 benchmarks/bench_des.py [--run-length T] [--repeat N]
"""

import argparse
import time

import numpy as np

from qnas.model import make_snapshot
from qnas.simkit import des_validate
from qnas.simkit import des, des_kernel


def run_case(label, run_length, repeat):
    rng = np.random.default_rng(7)
    if label == "demo":
        base = make_snapshot(
            [1, 1, 1], [2.0, 1.0],
            [[0.5, 1.0 / 3.0, 0.5], [0.5, 0.0, 0.5]])
        config = [2, 1, 2]
    else:  # a larger network: 5 classes, 10 stations
        C, K = 5, 10
        demands = rng.uniform(0.0, 0.2, size=(C, K))
        rates = rng.uniform(0.5, 1.0, size=C)
        ref = np.ceil(rates @ demands).astype(int) + 1
        base = make_snapshot(ref, rates, demands / ref)
        config = ref + 1

    results = {}
    times = {}
    for name, loop in (("numba", des_kernel.des_loop_numba),
                       ("python", des_kernel.des_loop_python)):
        if loop is None:
            print("  %-6s unavailable (numba not installed)" % name)
            continue
        des.des_loop = loop
        # Warm call first so numba's compile time is excluded.
        des_validate(base, config, run_length=min(run_length, 100.0), seed=1)
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            r = des_validate(base, config, run_length=run_length, seed=1)
            best = min(best, time.perf_counter() - t0)
        results[name] = r
        times[name] = best
        print("  %-6s %8.3f s   (%d completions)"
              % (name, best, r.completions.sum()))

    if len(results) == 2:
        same = np.array_equal(results["numba"].response,
                              results["python"].response)
        print("  speedup %.1fx, results identical: %s"
              % (times["python"] / times["numba"], same))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--run-length", type=float, default=2e4,
                    help="simulated time per run (default 2e4)")
    ap.add_argument("--repeat", type=int, default=3,
                    help="timing repetitions, best-of (default 3)")
    args = ap.parse_args()

    for label in ("demo", "large"):
        print("case %s (run length %g):" % (label, args.run_length))
        run_case(label, args.run_length, args.repeat)


if __name__ == "__main__":
    main()
