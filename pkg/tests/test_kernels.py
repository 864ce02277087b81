"""The compiled scan kernels must agree with naive reference loops, and
the pure-python fallback must agree with the compiled path bit for bit."""
import os
import subprocess
import sys

import numpy as np
import pytest

from sigdrift._kernels import backend, cusum_scan, deletion_pcc_scan
from sigdrift.similarity import pcc


def _naive_deletion_scan(x, y, window):
    n = x.size
    out = np.empty(n - window + 1)
    for start in range(n - window + 1):
        keep = np.r_[0:start, start + window:n]
        xr, yr = x[keep], y[keep]
        if np.all(xr == xr[0]) or np.all(yr == yr[0]):
            out[start] = np.nan
        else:
            out[start] = pcc(xr, yr)
    return out


def _naive_cusum(z, slack, threshold):
    pos = neg = 0.0
    max_pos = max_neg = 0.0
    alarm = -1
    for i, v in enumerate(z):
        pos = max(0.0, pos + v - slack)
        neg = max(0.0, neg - v - slack)
        max_pos = max(max_pos, pos)
        max_neg = max(max_neg, neg)
        if alarm < 0 and (pos > threshold or neg > threshold):
            alarm = i
    return max_pos, max_neg, alarm


def test_backend_is_reported():
    assert backend in ("cython", "python")


def test_deletion_scan_matches_naive():
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(10, 120))
        w = int(rng.integers(1, min(8, n - 2)))
        x = rng.normal(size=n)
        y = x + rng.normal(scale=rng.uniform(0.1, 2.0), size=n)
        got = deletion_pcc_scan(x, y, w)
        want = _naive_deletion_scan(x, y, w)
        np.testing.assert_allclose(got, want, atol=1e-9, equal_nan=True)


def test_deletion_scan_marks_constant_remainders():
    x = np.zeros(9)
    x[4:6] = [1.0, -1.0]
    y = np.arange(9.0)
    got = deletion_pcc_scan(x, y, 6)
    # any deletion window covering indices 4..5 leaves x constant
    assert np.isnan(got[0]) and np.isnan(got[3])
    assert not np.isnan(deletion_pcc_scan(y, y, 6)).any()


def test_deletion_scan_window_bounds():
    x = np.arange(10.0)
    with pytest.raises(ValueError):
        deletion_pcc_scan(x, x, 0)
    with pytest.raises(ValueError):
        deletion_pcc_scan(x, x, 9)
    assert deletion_pcc_scan(x, x, 8).shape == (3,)


def test_cusum_scan_matches_naive():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(2, 400))
        z = rng.normal(scale=2.0, size=n)
        got = cusum_scan(z, 0.5, 5.0)
        want = _naive_cusum(z, 0.5, 5.0)
        assert got[0] == pytest.approx(want[0], abs=1e-12)
        assert got[1] == pytest.approx(want[1], abs=1e-12)
        assert got[2] == want[2]


def test_cusum_scan_threshold_is_strict():
    z = np.full(5, 1.5)  # accumulates to exactly 5.0 with slack 0.5
    max_pos, max_neg, alarm = cusum_scan(z, 0.5, 5.0)
    assert max_pos == 5.0
    assert alarm == -1
    max_pos, _, alarm = cusum_scan(np.full(6, 1.5), 0.5, 5.0)
    assert max_pos == 6.0
    assert alarm == 5


def test_fallback_matches_compiled_exactly():
    if backend != "cython":
        pytest.skip("compiled backend not active; nothing to compare")
    rng = np.random.default_rng(99)
    x = rng.normal(size=300)
    y = x + rng.normal(scale=0.7, size=300)
    z = rng.normal(scale=2.0, size=300)
    scan = deletion_pcc_scan(x, y, 6)
    cu = cusum_scan(z, 0.5, 5.0)

    script = (
        "import numpy as np\n"
        "from sigdrift._kernels import backend, deletion_pcc_scan, cusum_scan\n"
        "assert backend == 'python', backend\n"
        "rng = np.random.default_rng(99)\n"
        "x = rng.normal(size=300)\n"
        "y = x + rng.normal(scale=0.7, size=300)\n"
        "z = rng.normal(scale=2.0, size=300)\n"
        "scan = deletion_pcc_scan(x, y, 6)\n"
        "cu = cusum_scan(z, 0.5, 5.0)\n"
        "print(scan.tobytes().hex())\n"
        "print(repr(cu))\n"
    )
    env = dict(os.environ, SIGDRIFT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", script], env=env,
                         capture_output=True, text=True, check=True)
    hex_line, cu_line = out.stdout.strip().splitlines()
    pure_scan = np.frombuffer(bytes.fromhex(hex_line), dtype=np.float64)
    np.testing.assert_allclose(scan, pure_scan, atol=1e-12, equal_nan=True)
    pure_cu = eval(cu_line)
    assert cu[2] == pure_cu[2]
    assert cu[0] == pytest.approx(pure_cu[0], abs=1e-12)
    assert cu[1] == pytest.approx(pure_cu[1], abs=1e-12)
