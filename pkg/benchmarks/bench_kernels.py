"""Time the compiled stencil core against the NumPy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 128 256 512] [--repeat 5]

Each row is one explicit step (median over ``--repeat`` timings of a batch of
steps) on a smooth periodic field, for both backends, plus the speedup.
"""

import argparse
import statistics
import time

import numpy as np

from mcflab import kernels


def _field(n, dim):
    x = np.linspace(0.0, 1.0, n, endpoint=False)
    if dim == 1:
        return np.sin(2 * np.pi * x) + 0.3 * np.cos(6 * np.pi * x)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return np.sin(2 * np.pi * X) * np.cos(4 * np.pi * Y) + 0.5 * np.sin(2 * np.pi * (X + Y))


def _cases(n):
    h = 1.0 / n
    u2, u1 = _field(n, 2), _field(n * n, 1)
    h1 = 1.0 / (n * n)
    return [
        ("mcf2d-skew", lambda k, out: k.advance_2d(0, u2, out, 0.2 * h * h, h, h, True), u2),
        ("mcf2d-cross", lambda k, out: k.advance_2d(0, u2, out, 0.2 * h * h, h, h, False), u2),
        ("heat2d", lambda k, out: k.advance_2d(1, u2, out, 0.2 * h * h, h, h, False), u2),
        ("csf1d", lambda k, out: k.advance_1d(0, u1, out, 0.4 * h1 * h1, h1), u1),
    ]


def bench(sizes, repeat, batch):
    rows = []
    names = kernels.available()
    for n in sizes:
        for label, fn, u in _cases(n):
            out = np.empty_like(u)
            timing = {}
            for name in names:
                kernels.use_backend(name)
                k = kernels.active()
                fn(k, out)  # warm-up
                samples = []
                for _ in range(repeat):
                    t0 = time.perf_counter()
                    for _ in range(batch):
                        fn(k, out)
                    samples.append((time.perf_counter() - t0) / batch)
                timing[name] = statistics.median(samples)
            rows.append((label, n, timing))
    return names, rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=10)
    args = ap.parse_args(argv)

    original = kernels.backend_name()
    try:
        names, rows = bench(args.sizes, args.repeat, args.batch)
    finally:
        kernels.use_backend(original)
    head = f"{'kernel':<12} {'n':>5} " + " ".join(f"{nm + ' [ms]':>15}" for nm in names)
    if "compiled" in names:
        head += f" {'speedup':>8}"
    print(head)
    for label, n, timing in rows:
        line = f"{label:<12} {n:>5} " + " ".join(f"{1e3 * timing[nm]:>15.3f}" for nm in names)
        if "compiled" in names:
            line += f" {timing['python'] / timing['compiled']:>7.1f}x"
        print(line)
    if "compiled" not in names:
        print("compiled backend not built; only the NumPy fallback was timed")


if __name__ == "__main__":
    main()
