# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the two hot inner loops.

Must stay behaviourally identical to ``_pykernels``; the parity tests
compare the two backends point for point.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, isnan

cnp.import_array()


def deletion_pcc_scan(object x_in, object y_in, int window):
    """Pearson correlation after deleting each length-`window` block.

    See ``_pykernels.deletion_pcc_scan`` for the contract.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("series must have equal length")
    if window < 1 or window >= n - 1:
        raise ValueError("window must leave at least two points behind")

    cdef Py_ssize_t n_pos = n - window + 1
    cdef Py_ssize_t m = n - window
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_pos, dtype=np.float64)

    cdef double mx = 0.0, my = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        mx += x[i]
        my += y[i]
    mx /= n
    my /= n

    # Totals over the centered series.
    cdef double tx = 0.0, ty = 0.0, txx = 0.0, tyy = 0.0, txy = 0.0
    cdef double xi, yi
    for i in range(n):
        xi = x[i] - mx
        yi = y[i] - my
        tx += xi
        ty += yi
        txx += xi * xi
        tyy += yi * yi
        txy += xi * yi

    # Sums over the current deletion block, updated incrementally.
    cdef double wx = 0.0, wy = 0.0, wxx = 0.0, wyy = 0.0, wxy = 0.0
    for i in range(window):
        xi = x[i] - mx
        yi = y[i] - my
        wx += xi
        wy += yi
        wxx += xi * xi
        wyy += yi * yi
        wxy += xi * yi

    cdef double sx, sy, sxx, syy, sxy, num, varx, vary, denom, r
    cdef double xo, yo
    cdef Py_ssize_t w
    for w in range(n_pos):
        sx = tx - wx
        sy = ty - wy
        sxx = txx - wxx
        syy = tyy - wyy
        sxy = txy - wxy
        num = m * sxy - sx * sy
        varx = m * sxx - sx * sx
        vary = m * syy - sy * sy
        if varx < 0.0:
            varx = 0.0
        if vary < 0.0:
            vary = 0.0
        denom = sqrt(varx * vary)
        if denom > 0.0:
            r = num / denom
            if r > 1.0:
                r = 1.0
            elif r < -1.0:
                r = -1.0
            out[w] = r
        else:
            out[w] = np.nan
        if w + 1 < n_pos:
            # Slide the block one step to the right.
            xo = x[w] - mx
            yo = y[w] - my
            wx -= xo
            wy -= yo
            wxx -= xo * xo
            wyy -= yo * yo
            wxy -= xo * yo
            xi = x[w + window] - mx
            yi = y[w + window] - my
            wx += xi
            wy += yi
            wxx += xi * xi
            wyy += yi * yi
            wxy += xi * yi
    return out


def cusum_scan(object z_in, double slack, double threshold):
    """Two-sided CUSUM maxima and first strict crossing index.

    See ``_pykernels.cusum_scan`` for the contract.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0]
    if n == 0:
        return 0.0, 0.0, -1

    cdef double cpos = 0.0, cneg = 0.0
    cdef double max_pos = 0.0, max_neg = 0.0
    cdef Py_ssize_t alarm = -1
    cdef Py_ssize_t t
    cdef double zt
    for t in range(n):
        zt = z[t]
        cpos = cpos + zt - slack
        if cpos < 0.0:
            cpos = 0.0
        cneg = cneg - zt - slack
        if cneg < 0.0:
            cneg = 0.0
        if cpos > max_pos:
            max_pos = cpos
        if cneg > max_neg:
            max_neg = cneg
        if alarm < 0 and (cpos > threshold or cneg > threshold):
            alarm = t
    return max_pos, max_neg, int(alarm)
