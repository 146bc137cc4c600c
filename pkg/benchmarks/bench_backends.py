"""Benchmark the compiled flow kernels against the pure-NumPy fallback.

Times the three hot kernels on a mid-size assignment matrix and a full
labeling run on a noisy mosaic instance, for each available backend:

    python benchmarks/bench_backends.py [--side 128] [--labels 31] [--repeat 5]
"""

import argparse
import time

import numpy as np

from assignflow import backend, core, presets
from assignflow.core import FlowConfig
from assignflow.grid import GridGraph


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(impl, side, n, radius, repeat):
    rng = np.random.default_rng(0)
    m = side * side
    W = np.ascontiguousarray(rng.dirichlet(np.ones(n), size=m))
    U = np.ascontiguousarray(rng.normal(size=(m, n)))
    logl = np.ascontiguousarray(np.log(W))
    out = np.empty_like(W)
    return {
        "lift_rows": best_of(repeat, impl.lift_rows, W, U, out, 0, m),
        "window_log_mean": best_of(
            repeat, impl.window_log_mean, logl, side, side, radius, out, 0, side
        ),
        "replicator_rows": best_of(repeat, impl.replicator_rows, W, W, 1e-10, out, 0, m),
    }


def bench_flow(name, side, n, repeat):
    truth = presets.block_label_field(side, side, n)
    noisy = presets.randomize_labels(truth, 0.2, n, seed=1)
    D = presets.vertex_distance_matrix(noisy, n, rho=0.1)
    g = GridGraph(side, side, 2)

    saved = backend.kernels
    backend.kernels = backend.get_kernels(name)
    try:
        res = core.run_flow(D, g, FlowConfig(rho=0.1))
        elapsed = best_of(repeat, core.run_flow, D, g, FlowConfig(rho=0.1))
    finally:
        backend.kernels = saved
    return elapsed, res.iterations


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--side", type=int, default=128)
    ap.add_argument("--labels", type=int, default=31)
    ap.add_argument("--radius", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    names = ["python"] + (["compiled"] if backend.HAVE_COMPILED else [])
    if not backend.HAVE_COMPILED:
        print("note: compiled kernels unavailable, benchmarking the fallback only")

    kernel_results = {
        name: bench_kernels(
            backend.get_kernels(name), args.side, args.labels, args.radius, args.repeat
        )
        for name in names
    }
    print(f"\nkernels on {args.side}x{args.side} grid, {args.labels} labels, "
          f"window radius {args.radius} (best of {args.repeat}):")
    header = f"{'kernel':<18}" + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel in next(iter(kernel_results.values())):
        row = f"{kernel:<18}"
        for name in names:
            row += f"{kernel_results[name][kernel] * 1e3:>10.2f}ms"
        if len(names) == 2:
            ratio = kernel_results["python"][kernel] / kernel_results["compiled"][kernel]
            row += f"{ratio:>9.1f}x"
        print(row)

    print(f"\nfull labeling run ({args.side}x{args.side}, {args.labels} labels, "
          f"rho 0.1, 5x5 window):")
    flow = {name: bench_flow(name, args.side, args.labels, args.repeat) for name in names}
    for name, (elapsed, iters) in flow.items():
        print(f"  {name:<10} {elapsed:8.3f}s   ({iters} iterations, "
              f"{elapsed / iters * 1e3:.1f} ms/iteration)")
    if len(names) == 2:
        print(f"  speedup    {flow['python'][0] / flow['compiled'][0]:8.1f}x")


if __name__ == "__main__":
    main()
