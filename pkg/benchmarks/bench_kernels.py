"""Time the invariant-subspace enumeration with the compiled and the pure-Python kernel.

    python3 benchmarks/bench_kernels.py [--sizes 5 6 7 8] [--repeat 3]
"""

import argparse
import statistics
import time

import numpy as np

from polybif import kernels
from polybif.network import laplacian


def cycle_with_chord(n):
    edges = [(i, i % n + 1) for i in range(1, n + 1)] + [(2, n)]
    return [[int(v) for v in row] for row in laplacian(n, edges)]


def random_graph(n, seed):
    rng = np.random.default_rng(seed)
    edges = [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
    return [[int(v) for v in row] for row in laplacian(n, edges)]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.mean(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 6, 7, 8])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--synchrony-only", action="store_true")
    args = ap.parse_args(argv)
    if kernels.BACKEND != "cython":
        print("compiled kernels are not built; only the Python kernel can be timed")
    anti = not args.synchrony_only
    print(f"{'matrix':<18}{'n':>3}{'found':>7}{'python s':>11}{'cython s':>11}{'speedup':>9}")
    for n in args.sizes:
        for name, K in (("cycle+chord", cycle_with_chord(n)), ("random", random_graph(n, n))):
            tp, _, found = best_of(lambda: kernels.enumerate_labels(K, anti, "python"), args.repeat)
            if kernels.BACKEND == "cython":
                tc, _, found_c = best_of(lambda: kernels.enumerate_labels(K, anti, "cython"), args.repeat)
                assert found_c == found
                print(f"{name:<18}{n:>3}{len(found):>7}{tp:>11.4f}{tc:>11.4f}{tp / tc:>8.1f}x")
            else:
                print(f"{name:<18}{n:>3}{len(found):>7}{tp:>11.4f}{'-':>11}{'-':>9}")


if __name__ == "__main__":
    main()
