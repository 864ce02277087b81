"""Numeric kernels for the detector inner loops.

The compiled extension is preferred when it imported cleanly; otherwise
the numpy fallback is used.  Set SIGDRIFT_PURE_PYTHON=1 to force the
fallback (useful for the backend parity tests and the benchmark).
"""
import os

if os.environ.get("SIGDRIFT_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _cykernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

deletion_pcc_scan = _impl.deletion_pcc_scan
cusum_scan = _impl.cusum_scan
backend = "cython" if _impl.__name__.endswith("_cykernels") else "python"

__all__ = ["deletion_pcc_scan", "cusum_scan", "backend"]
