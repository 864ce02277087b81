"""Time the compiled detector kernels against the numpy fallback.

Runs deletion_pcc_scan and cusum_scan over a range of series lengths with
both backends and prints a small table with the speedup.  Parity is checked
on every size so a broken extension fails loudly rather than quietly
reporting great numbers.

Usage:
    python benchmarks/bench_kernels.py [--sizes 360,1440,5760] [--repeats 5]
"""
import argparse
import time

import numpy as np

from sigdrift._kernels import _pykernels

try:
    from sigdrift._kernels import _cykernels
except ImportError:
    _cykernels = None


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_scan(n, window, repeats, rng):
    x = rng.normal(size=n)
    y = x + 0.1 * rng.normal(size=n)
    args = (x, y, window)
    t_py = _time(_pykernels.deletion_pcc_scan, args, repeats)
    if _cykernels is None:
        return t_py, None
    t_cy = _time(_cykernels.deletion_pcc_scan, args, repeats)
    np.testing.assert_allclose(_pykernels.deletion_pcc_scan(*args),
                               _cykernels.deletion_pcc_scan(*args),
                               atol=1e-9, equal_nan=True)
    return t_py, t_cy


def bench_cusum(n, repeats, rng):
    z = rng.normal(size=n) + 0.3
    args = (z, 0.5, 5.0)
    t_py = _time(_pykernels.cusum_scan, args, repeats)
    if _cykernels is None:
        return t_py, None
    t_cy = _time(_cykernels.cusum_scan, args, repeats)
    a, b = _pykernels.cusum_scan(*args), _cykernels.cusum_scan(*args)
    np.testing.assert_allclose(a[:2], b[:2], atol=1e-9)
    assert a[2] == b[2], f"alarm index mismatch: {a[2]} != {b[2]}"
    return t_py, t_cy


def _row(label, n, t_py, t_cy):
    py_ms = t_py * 1e3
    if t_cy is None:
        return f"{label:<18} {n:>7} {py_ms:>10.3f} {'-':>10} {'-':>8}"
    cy_ms = t_cy * 1e3
    return (f"{label:<18} {n:>7} {py_ms:>10.3f} {cy_ms:>10.3f} "
            f"{t_py / t_cy:>7.1f}x")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="360,1440,5760,23040",
                    help="comma-separated series lengths")
    ap.add_argument("--window", type=int, default=6)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    opts = ap.parse_args(argv)

    sizes = [int(s) for s in opts.sizes.split(",")]
    rng = np.random.default_rng(opts.seed)
    if _cykernels is None:
        print("compiled extension not available; timing fallback only")
    print(f"{'kernel':<18} {'n':>7} {'python ms':>10} {'cython ms':>10} "
          f"{'speedup':>8}")
    for n in sizes:
        print(_row("deletion_pcc_scan", n,
                   *bench_scan(n, opts.window, opts.repeats, rng)))
    for n in sizes:
        print(_row("cusum_scan", n, *bench_cusum(n, opts.repeats, rng)))


if __name__ == "__main__":
    main()
