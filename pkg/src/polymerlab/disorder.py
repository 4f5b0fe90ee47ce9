"""The i.i.d. environment: seeded counter-based random field with exact log-MGFs.

Field values are pure functions of ``(seed, time, vertex-key bytes)``; nothing
is ever stored.  Two replicas, a pair DP and a restarted run therefore all see
the same quenched environment, including on lazily generated infinite graphs.

Normalization: every law has mean 0 and variance 1.  ``lambda_of`` is the
cumulant generating function ``log E[exp(b * omega)]``; it is finite for all
``b`` since all offered laws are Gaussian or of bounded support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .errors import NumericalError
from .keys import VertexKey

_SQRT3 = math.sqrt(3.0)

# Derivation constant for per-replica environment seeds (frozen).
_SPAWN_SALT = 0xA24BAED4963EE407


def spawn_seed(seed: int, replica: int) -> int:
    """Deterministic, well-separated environment seed for a replica index."""
    from ._kernels import fallback_impl

    z = fallback_impl._mix64_scalar((seed + _SPAWN_SALT) & 0xFFFFFFFFFFFFFFFF)
    return fallback_impl._mix64_scalar(z ^ (replica & 0xFFFFFFFFFFFFFFFF))


class DisorderLaw:
    """Base class: subclasses provide the quantile transform and Lambda."""

    kind: str = "abstract"

    def lambda_of(self, beta: float) -> float:
        raise NotImplementedError

    def transform_words(self, words: np.ndarray) -> np.ndarray:
        """Map raw 64-bit hash words to samples of the law."""
        raise NotImplementedError

    def lambda2_of(self, beta: float) -> float:
        return self.lambda_of(2.0 * beta) - 2.0 * self.lambda_of(beta)

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params()}

    # -- build-time validation -------------------------------------------
    _validated: bool = False

    def validate_moments(self, n: int = 1_000_000, seed: int = 20260809) -> None:
        """Sample-moment check (mean ~ 0, var ~ 1) through the real transform."""
        if self._validated:
            return
        digests = np.arange(n, dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)
        words = _kernels.omega_words(seed, 1, digests)
        x = self.transform_words(words)
        mean = float(x.mean())
        var = float(x.var())
        if abs(mean) > 0.005 or abs(var - 1.0) > 0.012:
            raise NumericalError(
                f"law {self.kind} failed moment validation: mean={mean}, var={var}"
            )
        self._validated = True


class StandardGaussian(DisorderLaw):
    kind = "gaussian"

    def lambda_of(self, beta: float) -> float:
        return 0.5 * beta * beta

    def transform_words(self, words: np.ndarray) -> np.ndarray:
        return _kernels.normal_from_words(words)


class Rademacher(DisorderLaw):
    kind = "rademacher"

    def lambda_of(self, beta: float) -> float:
        # log cosh, stable for large |beta|
        a = abs(beta)
        return a + math.log1p(math.exp(-2.0 * a)) - math.log(2.0)

    def transform_words(self, words: np.ndarray) -> np.ndarray:
        u = _kernels.uniform_from_words(words)
        return np.where(u < 0.5, -1.0, 1.0)


class CenteredUniform(DisorderLaw):
    """Uniform on [-sqrt(3), sqrt(3)] (unit variance)."""

    kind = "centered_uniform"

    def lambda_of(self, beta: float) -> float:
        z = _SQRT3 * beta
        az = abs(z)
        if az < 1e-3:
            z2 = z * z
            return z2 / 6.0 - z2 * z2 / 180.0 + z2 * z2 * z2 / 2835.0
        # log(sinh z / z), even in z
        return az + math.log1p(-math.exp(-2.0 * az)) - math.log(2.0 * az)

    def transform_words(self, words: np.ndarray) -> np.ndarray:
        u = _kernels.uniform_from_words(words)
        return _SQRT3 * (2.0 * u - 1.0)


class BoundedCustom(DisorderLaw):
    """Law given by a density on a bounded interval; Lambda by quadrature.

    The density is renormalized and recentred/rescaled to mean 0, variance 1
    at construction.  Sampling inverts a dense tabulated CDF.
    """

    kind = "bounded_custom"

    def __init__(self, density: Callable[[np.ndarray], np.ndarray],
                 lo: float, hi: float, grid: int = 1 << 16, name: str = "custom"):
        if not hi > lo:
            raise ValueError("need hi > lo")
        self.name = name
        xs = np.linspace(lo, hi, grid + 1)
        ys = np.clip(np.asarray(density(xs), dtype=np.float64), 0.0, None)
        mass = np.trapezoid(ys, xs)
        if not mass > 0:
            raise NumericalError("density has zero mass")
        ys /= mass
        mean = np.trapezoid(xs * ys, xs)
        var = np.trapezoid((xs - mean) ** 2 * ys, xs)
        if not var > 0:
            raise NumericalError("density has zero variance")
        s = math.sqrt(var)
        # standardized support and density
        self.lo = (lo - mean) / s
        self.hi = (hi - mean) / s
        self._xs = (xs - mean) / s
        self._ys = ys * s
        cdf = np.concatenate(
            [[0.0], np.cumsum(0.5 * (self._ys[1:] + self._ys[:-1]) * np.diff(self._xs))]
        )
        self._cdf = cdf / cdf[-1]

    def params(self) -> dict:
        return {"name": self.name, "lo": self.lo, "hi": self.hi}

    def lambda_of(self, beta: float) -> float:
        from scipy.integrate import quad

        shift = beta * (self.hi if beta > 0 else self.lo)
        f = lambda x: math.exp(beta * x - shift) * float(
            np.interp(x, self._xs, self._ys)
        )
        val, err = quad(f, self.lo, self.hi, epsabs=1e-13, epsrel=1e-12, limit=400)
        if not val > 0 or err > 1e-8 * max(val, 1.0):
            raise NumericalError(f"Lambda quadrature failed: val={val}, err={err}")
        return math.log(val) + shift

    def transform_words(self, words: np.ndarray) -> np.ndarray:
        u = _kernels.uniform_from_words(words)
        return np.interp(u, self._cdf, self._xs)


_LAW_FACTORIES = {
    "gaussian": StandardGaussian,
    "rademacher": Rademacher,
    "centered_uniform": CenteredUniform,
}


def make_law(kind: str, validate: bool = True, **params) -> DisorderLaw:
    if kind not in _LAW_FACTORIES:
        raise ValueError(f"unknown law kind {kind!r}; have {sorted(_LAW_FACTORIES)}")
    law = _LAW_FACTORIES[kind](**params)
    if validate:
        law.validate_moments()
    return law


def lambda2(law: DisorderLaw, beta: float) -> float:
    """Lambda(2b) - 2 Lambda(b): the two-replica collision exponent."""
    return law.lambda2_of(beta)


def beta_for_lambda2(law: DisorderLaw, target: float, hi: float = 10.0) -> float:
    """Inverse of lambda2 on [0, hi] by bisection (lambda2 is increasing)."""
    from scipy.optimize import brentq

    if target < 0:
        raise ValueError("lambda2 target must be >= 0")
    if target == 0:
        return 0.0
    return float(brentq(lambda b: law.lambda2_of(b) - target, 0.0, hi, xtol=1e-14))


@dataclass(frozen=True)
class FieldSampler:
    """Immutable handle on one quenched environment (law + 64-bit seed)."""

    law: DisorderLaw
    seed: int

    def omega(self, i: int, x: VertexKey) -> float:
        if i < 1:
            raise ValueError("time index starts at 1")
        words = _kernels.omega_words(self.seed, i, np.array([x.digest], dtype=np.uint64))
        return float(self.law.transform_words(words)[0])

    def omega_array(self, i: int, digests: np.ndarray) -> np.ndarray:
        if i < 1:
            raise ValueError("time index starts at 1")
        return self.law.transform_words(_kernels.omega_words(self.seed, i, digests))

    def spawn(self, replica: int) -> "FieldSampler":
        return FieldSampler(self.law, spawn_seed(self.seed, replica))


def omega_matrix(
    law: DisorderLaw, seeds: np.ndarray, i: int, digests: np.ndarray
) -> np.ndarray:
    """(len(seeds), len(digests)) field samples at time i, one row per seed.

    Bit-identical to stacking ``FieldSampler(law, s).omega_array(i, digests)``
    row by row; the grid form exists for the batched environment-MC engine.
    """
    from ._kernels import fallback_impl

    tws = np.array([_kernels.time_word(int(s), i) for s in seeds], dtype=np.uint64)
    grid = np.bitwise_xor(digests[None, :].astype(np.uint64), tws[:, None])
    words = fallback_impl.mix64(grid.reshape(-1))
    return law.transform_words(words).reshape(grid.shape)
