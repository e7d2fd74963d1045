"""Time the numba and numpy backends on the same workload and check they agree.

    python benchmarks/bench_kernels.py --runs 10 --iterations 50000
"""
import argparse
import time

import numpy as np

from alphasvrg import kernels, problems


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--iterations", type=int, default=50_000)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--mu", type=float, default=0.05)
    ap.add_argument("--m", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    p = problems.generate(50, 2, 1.0, 0)
    seeds = np.arange(1, args.runs + 1, dtype=np.uint64)
    w0 = np.zeros(p.dim)
    steps = args.runs * args.iterations
    results = {}
    for backend in kernels.available_backends():
        def work():
            return kernels.trajectories(p.features, p.labels, p.minimizer, w0, args.alpha, args.mu,
                                        args.m, args.iterations, seeds, backend=backend)
        work()  # warm-up / JIT compile
        t, out = best_of(work, args.repeat)
        results[backend] = out
        print(f"{backend:>6}: {t * 1e3:9.1f} ms  {steps / t / 1e6:7.2f} M steps/s")

    names = list(results)
    for other in names[1:]:
        same = all(np.array_equal(a, b) for a, b in zip(results[names[0]], results[other]))
        print(f"{names[0]} vs {other}: {'bit-identical' if same else 'MISMATCH'}")


if __name__ == "__main__":
    main()
