"""Compare the compiled convolution kernels against the pure-NumPy twins.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N] [--sizes small,medium,large]

Each case runs both backends on identical inputs, reports the best wall
time over the repeats, and checks that the outputs agree to roundoff.
"""

import argparse
import sys
import time

import numpy as np

from tensorring import _pykernels

try:
    from tensorring import _kernels
except ImportError:
    _kernels = None

SIZES = {
    # (in_h, in_w, channels, filters, kernel, stride, padding, rank)
    "small": (16, 16, 8, 8, 3, 1, 1, 4),
    "medium": (32, 32, 16, 16, 3, 1, 1, 8),
    "large": (64, 64, 32, 32, 3, 2, 1, 12),
}


def best_time(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_case(name, repeats):
    in_h, in_w, c, t, k, stride, padding, rank = SIZES[name]
    rng = np.random.default_rng(0)
    out_h = (in_h + 2 * padding - k) // stride + 1
    out_w = (in_w + 2 * padding - k) // stride + 1

    x = rng.standard_normal((in_h + 2 * padding, in_w + 2 * padding, c))
    w = rng.standard_normal((t, c, k, k))
    z = rng.standard_normal((in_h + 2 * padding, in_w, rank, rank))
    core = rng.standard_normal((rank, k, rank))
    cases = [
        ("conv2d", (np.ascontiguousarray(x), np.ascontiguousarray(w),
                    stride, out_h, out_w)),
        ("conv1d_axis0", (np.ascontiguousarray(z), np.ascontiguousarray(core),
                          stride, out_h)),
    ]

    rows = []
    for fn_name, args in cases:
        py_t, py_out = best_time(getattr(_pykernels, fn_name), args, repeats)
        if _kernels is None:
            rows.append((fn_name, py_t, None, None))
            continue
        cy_t, cy_out = best_time(getattr(_kernels, fn_name), args, repeats)
        np.testing.assert_allclose(cy_out, py_out, rtol=0, atol=1e-10)
        rows.append((fn_name, py_t, cy_t, py_t / cy_t))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--sizes", default="small,medium,large")
    args = parser.parse_args(argv)

    if _kernels is None:
        print("compiled backend not available; timing pure NumPy only",
              file=sys.stderr)
    print(f"{'case':<10} {'kernel':<14} {'python':>10} {'cython':>10} {'speedup':>8}")
    for size in args.sizes.split(","):
        size = size.strip()
        if size not in SIZES:
            parser.error(f"unknown size {size!r}; choose from {sorted(SIZES)}")
        for fn_name, py_t, cy_t, speedup in bench_case(size, args.repeats):
            cy_s = f"{cy_t * 1e3:9.2f}ms" if cy_t is not None else "       n/a"
            sp_s = f"{speedup:7.1f}x" if speedup is not None else "     n/a"
            print(f"{size:<10} {fn_name:<14} {py_t * 1e3:9.2f}ms {cy_s} {sp_s}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
