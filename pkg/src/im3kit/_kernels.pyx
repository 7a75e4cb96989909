# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ACI power kernels; same loop order as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs


cdef double _channel_power(const double[::1] amps, Py_ssize_t n, double g) noexcept nogil:
    cdef Py_ssize_t N = amps.shape[0]
    cdef Py_ssize_t k, i, a, b, c_idx, lo, hi
    cdef double p = 0.0, c, ak, ai, aa
    for k in range(1, N + 1):
        if k == n or (k + n) % 2:
            continue
        ak = amps[k - 1]
        if ak == 0.0:
            continue
        ai = amps[(k + n) // 2 - 1]
        c = g * 0.75 * ak * ai * ai
        p += c * c * 0.5
    for a in range(1, N + 1):
        aa = amps[a - 1]
        if aa == 0.0:
            continue
        lo = a + 1 if a + 1 > n + 1 - a else n + 1 - a
        hi = N if N < N + n - a else N + n - a
        for b in range(lo, hi + 1):
            c_idx = a + b - n
            if c_idx == a or c_idx == b:
                continue
            c = g * 1.5 * aa * amps[b - 1] * amps[c_idx - 1]
            p += c * c * 0.5
    return p


def channel_power(amps, Py_ssize_t n, double rho3=1.0):
    cdef const double[::1] view = np.ascontiguousarray(amps, dtype=np.float64)
    return _channel_power(view, n, fabs(rho3))


def profile_powers(amps, double rho3=1.0):
    cdef const double[::1] view = np.ascontiguousarray(amps, dtype=np.float64)
    cdef Py_ssize_t N = view.shape[0], n
    cdef double g = fabs(rho3)
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for n in range(1, N + 1):
            o[n - 1] = _channel_power(view, n, g)
    return [float(v) for v in out]
