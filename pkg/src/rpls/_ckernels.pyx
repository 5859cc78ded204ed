# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled random-orbit kernel; must stay operation-for-operation identical to _pykernels."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def run_orbit(double x0, const double[::1] u, const double[::1] z, const unsigned char[::1] right,
              const double[:, ::1] k, const double[:, ::1] d, const double[::1] cum,
              double A, double B, double dither, Py_ssize_t burn_in):
    """Iterate one random orbit, returning the points visited after ``burn_in`` steps."""
    cdef Py_ssize_t total = u.shape[0]
    cdef Py_ssize_t n_out = total - burn_in
    cdef Py_ssize_t nz = z.shape[0]
    cdef Py_ssize_t m = cum.shape[0]
    cdef Py_ssize_t t, lo, hi, mid, i, j
    cdef double x = x0, uu, lower, v
    out_arr = np.empty(n_out, dtype=np.float64)
    cdef double[::1] out = out_arr
    for t in range(total):
        if t >= burn_in:
            out[t - burn_in] = x
        # interval: count of interior points strictly below x, then flag on ties
        lo = 0
        hi = nz
        while lo < hi:
            mid = (lo + hi) >> 1
            if z[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        i = lo
        if lo < nz and z[lo] == x and right[lo]:
            i = lo + 1
        # map: count of cumulative probabilities (excluding the last) <= u
        uu = u[t]
        j = 0
        while j < m - 1 and cum[j] <= uu:
            j += 1
        lower = 0.0 if j == 0 else cum[j - 1]
        v = (uu - lower) / (cum[j] - lower)
        x = k[i, j] * x + d[i, j]
        x = x + (v - 0.5) * dither
        if x < A:
            x = A
        elif x > B:
            x = B
    return out_arr
