"""Fits and convergence diagnoses for partial-sum series.

The truncated criteria (collision sums, Khas'minskii sums, second-moment
series) are all statements about infinite sums; this module holds the frozen
desk-scale surrogates.

A series is diagnosed *convergent* (Cauchy) when its effective decay
exponent, measured by comparing increment windows one octave apart, is below
-1.1; *divergent* when the exponent is above -1.05 (log-divergent sums like
1/k land there); the sliver in between, or a modeled remaining tail above
half the accumulated total, is *inconclusive*.  Local window fits cannot
tell a slowly drifting power tail from a geometric one, which is why the
octave comparison, not a windowed ratio, decides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float
    stderr: float   # standard error of the slope


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two points")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0:
        raise ValueError("degenerate abscissa")
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float((resid ** 2).sum())
    ss_tot = float(((y - ym) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    stderr = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else float("nan")
    return LinearFit(slope, intercept, r2, stderr)


def _clean_and_pair(increments: Sequence[float]) -> np.ndarray:
    """Drop zero entries (bipartite parity) and sum adjacent increments
    (removes period-2 oscillation while preserving the tail sum)."""
    inc = np.asarray([v for v in increments if v > 0.0], dtype=float)
    if len(inc) % 2:
        inc = inc[1:]
    return inc.reshape(-1, 2).sum(axis=1)


def dyadic_exponent(inc: np.ndarray, window: int) -> Optional[float]:
    """Effective decay exponent from window means one octave apart."""
    J = len(inc)
    if J < 8:
        return None
    w = max(2, min(window, J // 4))
    hi = inc[J - w :]
    lo = inc[J // 2 - w // 2 : J // 2 - w // 2 + w]
    m_hi, m_lo = float(np.mean(hi)), float(np.mean(lo))
    if m_hi <= 0 or m_lo <= 0:
        return None
    c_hi = J - w / 2.0
    c_lo = J // 2 - w // 2 + w / 2.0
    return math.log(m_hi / m_lo) / math.log(c_hi / c_lo)


@dataclass(frozen=True)
class ConvergenceDiagnosis:
    converged: bool
    mode: str                 # geometric | power | floor | divergent | inconclusive
    detail: dict
    est_tail_rel: Optional[float] = None

    def __bool__(self) -> bool:  # pragma: no cover
        return self.converged


def diagnose_convergence(
    increments: Sequence[float],
    total: Optional[float] = None,
    window: int = 50,
    max_tail_rel: float = 0.5,
) -> ConvergenceDiagnosis:
    """Classify a non-negative increment series as summable or not."""
    raw = np.asarray(increments, dtype=float)
    if len(raw) > 0 and np.all(raw <= 0.0):
        return ConvergenceDiagnosis(True, "constant", {}, 0.0)
    inc = _clean_and_pair(increments)
    if len(inc) < 8:
        return ConvergenceDiagnosis(False, "inconclusive", {"reason": "too short"})
    if total is None:
        total = float(inc.sum())
    w = min(window, len(inc) // 2)
    tail = inc[-w:]

    if tail[-1] < 1e-250 or tail[-1] < 1e-14 * total:
        return ConvergenceDiagnosis(True, "floor", {"last": float(tail[-1])}, 0.0)

    alpha = dyadic_exponent(inc, w)
    if alpha is None:
        return ConvergenceDiagnosis(False, "inconclusive", {"reason": "no exponent"})
    if alpha >= -1.05:
        return ConvergenceDiagnosis(False, "divergent", {"dyadic_exponent": alpha})
    if alpha > -1.1:
        return ConvergenceDiagnosis(
            False, "inconclusive", {"dyadic_exponent": alpha}
        )

    J = len(inc)
    if alpha <= -4.0:
        ratios = tail[1:] / tail[:-1]
        r = float(np.exp(np.mean(np.log(ratios)))) if np.all(ratios > 0) else 0.0
        est = float(tail[-1] * r / (1.0 - r)) if 0.0 < r < 1.0 else 0.0
        mode, detail = "geometric", {"ratio": r, "dyadic_exponent": alpha}
    else:
        ks = np.arange(J - w + 1, J + 1, dtype=float)
        fit = linear_fit(np.log(ks), np.log(tail))
        slope = fit.slope if (fit.r2 >= 0.99 and fit.slope <= -1.1) else alpha
        est = float(tail[-1] * J / (-slope - 1.0))
        mode, detail = "power", {
            "slope": fit.slope,
            "r2": fit.r2,
            "dyadic_exponent": alpha,
        }
    rel = est / max(total, 1e-300)
    return ConvergenceDiagnosis(rel <= max_tail_rel, mode, detail, rel)


@dataclass(frozen=True)
class TailExtrapolation:
    partial: float
    estimate: Optional[float]   # None when divergent/inconclusive
    error: Optional[float]
    mode: str
    detail: dict


def extrapolate_tail(increments: Sequence[float], window: int = 50) -> TailExtrapolation:
    """Partial sum plus a modeled tail (geometric or power), or a divergent flag.

    The reported error combines the spread between two window choices with a
    10% model margin on the tail itself.
    """
    partial = float(np.asarray(increments, dtype=float).sum())
    inc = _clean_and_pair(increments)
    if len(inc) < 12:
        return TailExtrapolation(partial, None, None, "inconclusive", {"reason": "short"})
    alpha = dyadic_exponent(inc, min(window, len(inc) // 2))
    if alpha is None or alpha >= -1.05:
        return TailExtrapolation(
            partial, None, None, "divergent", {"dyadic_exponent": alpha}
        )

    J = len(inc)

    def tail_model(w: int):
        t = inc[-w:]
        if alpha <= -4.0:
            ratios = t[1:] / t[:-1]
            if np.any(ratios <= 0) or np.any(ratios >= 1):
                return None, {"reason": "unstable ratio"}
            r = float(np.exp(np.mean(np.log(ratios))))
            return float(t[-1] * r / (1.0 - r)), {"ratio": r}
        ks = np.arange(J - w + 1, J + 1, dtype=float)
        fit = linear_fit(np.log(ks), np.log(t))
        slope = fit.slope if (fit.r2 >= 0.99 and fit.slope <= -1.1) else alpha
        return float(t[-1] * J / (-slope - 1.0)), {"slope": slope, "r2": fit.r2}

    w1 = min(window, J // 2)
    w2 = max(6, w1 // 2)
    tail1, d1 = tail_model(w1)
    tail2, _ = tail_model(w2)
    mode = "geometric" if alpha <= -4.0 else "power"
    if tail1 is None or tail2 is None:
        return TailExtrapolation(partial, None, None, "inconclusive", d1)
    err = abs(tail1 - tail2) + 0.1 * abs(tail1)
    d1["dyadic_exponent"] = alpha
    return TailExtrapolation(partial, partial + tail1, err, mode, d1)
