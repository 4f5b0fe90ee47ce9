# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _pyhash: same frozen bit-level contract, C-speed loops.

The integer layer (SplitMix64 mixing, uniform extraction) is bit-exact with
the numpy fallback.  The normal transform uses the same Acklam coefficients
and Halley refinement; libm exp/log/erfc may differ from numpy's SIMD
routines in the last ulp, which is covered by a cross-implementation test.
"""

from libc.math cimport exp, log, sqrt, erfc
from libc.stdint cimport uint64_t

import numpy as np

BACKEND = "compiled"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15UL
cdef uint64_t TIME_MULT = 0xD1B54A32D192ED03UL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9UL
cdef uint64_t M2 = 0x94D049BB133111EBUL

cdef double U52 = 2.0 ** -52
cdef double SQRT2 = sqrt(2.0)
cdef double SQRT_2PI = sqrt(2.0 * 3.14159265358979323846)
cdef double P_LOW = 0.02425

cdef double A0 = -3.969683028665376e+01
cdef double A1 = 2.209460984245205e+02
cdef double A2 = -2.759285104469687e+02
cdef double A3 = 1.383577518672690e+02
cdef double A4 = -3.066479806614716e+01
cdef double A5 = 2.506628277459239e+00
cdef double B0 = -5.447609879822406e+01
cdef double B1 = 1.615858368580409e+02
cdef double B2 = -1.556989798598866e+02
cdef double B3 = 6.680131188771972e+01
cdef double B4 = -1.328068155288572e+01
cdef double C0 = -7.784894002430293e-03
cdef double C1 = -3.223964580411365e-01
cdef double C2 = -2.400758277161838e+00
cdef double C3 = -2.549732539343734e+00
cdef double C4 = 4.374664141464968e+00
cdef double C5 = 2.938163982698783e+00
cdef double D0 = 7.784695709041462e-03
cdef double D1 = 3.224671290700398e-01
cdef double D2 = 2.445134137142996e+00
cdef double D3 = 3.754408661907416e+00


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z ^= z >> 30
    z *= M1
    z ^= z >> 27
    z *= M2
    z ^= z >> 31
    return z


cdef inline double _acklam(double p) nogil:
    cdef double q, r, num, den, x, e, u
    if p < P_LOW:
        q = sqrt(-2.0 * log(p))
        num = ((((C0 * q + C1) * q + C2) * q + C3) * q + C4) * q + C5
        den = (((D0 * q + D1) * q + D2) * q + D3) * q + 1.0
        x = num / den
    elif p > 1.0 - P_LOW:
        q = sqrt(-2.0 * log(1.0 - p))
        num = ((((C0 * q + C1) * q + C2) * q + C3) * q + C4) * q + C5
        den = (((D0 * q + D1) * q + D2) * q + D3) * q + 1.0
        x = -num / den
    else:
        q = p - 0.5
        r = q * q
        num = ((((A0 * r + A1) * r + A2) * r + A3) * r + A4) * r + A5
        den = ((((B0 * r + B1) * r + B2) * r + B3) * r + B4) * r + 1.0
        x = q * num / den
    e = 0.5 * erfc(-x / SQRT2) - p
    u = e * SQRT_2PI * exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def time_word(seed, i):
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t t = <uint64_t> (i & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t base = _mix64(s + GOLDEN)
    return int(_mix64(base ^ (t * TIME_MULT)))


def omega_words(seed, i, digests):
    cdef uint64_t tw = <uint64_t> time_word(seed, i)
    arr = np.ascontiguousarray(digests, dtype=np.uint64)
    out = np.empty(arr.shape[0], dtype=np.uint64)
    cdef uint64_t[::1] src = arr
    cdef uint64_t[::1] dst = out
    cdef Py_ssize_t k, n = src.shape[0]
    with nogil:
        for k in range(n):
            dst[k] = _mix64(src[k] ^ tw)
    return out


def uniform_from_words(words):
    arr = np.ascontiguousarray(words, dtype=np.uint64)
    out = np.empty(arr.shape[0], dtype=np.float64)
    cdef uint64_t[::1] src = arr
    cdef double[::1] dst = out
    cdef Py_ssize_t k, n = src.shape[0]
    with nogil:
        for k in range(n):
            dst[k] = ((src[k] >> 12) + 0.5) * U52
    return out


def normal_quantile(p):
    arr = np.ascontiguousarray(p, dtype=np.float64)
    out = np.empty(arr.shape[0], dtype=np.float64)
    cdef double[::1] src = arr
    cdef double[::1] dst = out
    cdef Py_ssize_t k, n = src.shape[0]
    with nogil:
        for k in range(n):
            dst[k] = _acklam(src[k])
    return out


def normal_from_words(words):
    arr = np.ascontiguousarray(words, dtype=np.uint64)
    out = np.empty(arr.shape[0], dtype=np.float64)
    cdef uint64_t[::1] src = arr
    cdef double[::1] dst = out
    cdef Py_ssize_t k, n = src.shape[0]
    with nogil:
        for k in range(n):
            dst[k] = _acklam(((src[k] >> 12) + 0.5) * U52)
    return out
