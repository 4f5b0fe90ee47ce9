"""Pure numpy implementation of the counter-based field kernels.

Frozen bit-level contract (shared with the compiled twin):

    base  = mix64(seed + 0x9E3779B97F4A7C15)
    tword = mix64(base ^ (i * 0xD1B54A32D192ED03))
    word  = mix64(tword ^ digest)            # digest = FNV-1a64 of key bytes
    u     = ((word >> 12) + 0.5) * 2^-52     # uniform in (0, 1)

where ``mix64`` is the SplitMix64 finalizer.  Standard normals come from the
Acklam rational approximation to the normal quantile followed by one Halley
refinement step (absolute error far below 1e-9; coefficients frozen below).
"""

from __future__ import annotations

import numpy as np

BACKEND = "fallback"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_TIME_MULT = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U52 = 2.0 ** -52

# Acklam inverse-normal-CDF coefficients (frozen).
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425

_SQRT2 = float(np.sqrt(2.0))
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


def mix64(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def _mix64_scalar(z: int) -> int:
    mask = 0xFFFFFFFFFFFFFFFF
    z &= mask
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & mask
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & mask
    z ^= z >> 31
    return z


def time_word(seed: int, i: int) -> int:
    mask = 0xFFFFFFFFFFFFFFFF
    base = _mix64_scalar((seed + 0x9E3779B97F4A7C15) & mask)
    return _mix64_scalar(base ^ ((i * 0xD1B54A32D192ED03) & mask))


def omega_words(seed: int, i: int, digests: np.ndarray) -> np.ndarray:
    """Final 64-bit words for time i over an array of vertex digests."""
    tw = np.uint64(time_word(seed, i))
    return mix64(digests.astype(np.uint64, copy=False) ^ tw)


def uniform_from_words(words: np.ndarray) -> np.ndarray:
    return ((words >> np.uint64(12)).astype(np.float64) + 0.5) * _U52


def normal_quantile(p: np.ndarray) -> np.ndarray:
    """Inverse standard normal CDF, vectorized (Acklam + one Halley step)."""
    p = np.asarray(p, dtype=np.float64)
    x = np.empty_like(p)

    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)

    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = q * num / den

    for sel, tail_p, sign in ((lo, p[lo], 1.0), (hi, 1.0 - p[hi], -1.0)):
        if np.any(sel):
            q = np.sqrt(-2.0 * np.log(tail_p))
            num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
            den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
            x[sel] = sign * num / den

    # One Halley refinement using erfc; pushes |error| to ~1e-15.
    from scipy.special import erfc

    e = 0.5 * erfc(-x / _SQRT2) - p
    u = e * _SQRT_2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    return x


def normal_from_words(words: np.ndarray) -> np.ndarray:
    return normal_quantile(uniform_from_words(words))
