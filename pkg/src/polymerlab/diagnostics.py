"""Beta-free random-walk analytics: heat kernels, Green functions, hitting
times, volume growth, spectral-dimension fits, and the canopy level chain.

Return-probability series get closed-form or reduced fast paths where the
structure allows (lattices by axis-splitting binomials, the canopy by its
symmetry quotient, the gasket by an indexed sparse DP); everything else runs
the generic exact front DP under its budget cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .canopy_reduction import CanopyQuotient, subtree_level_masses
from .errors import BudgetExceeded, InsufficientData, WrongFamily
from .graph_core import DEFAULT_FRONT_CAP, RootedGraph, bfs_ball
from .keys import VertexKey
from .seriesfit import LinearFit, TailExtrapolation, extrapolate_tail, linear_fit
from .zoo.canopy import Canopy
from .zoo.gasket import SierpinskiGasket
from .zoo.lattice import Lattice


# -- closed-form lattice kernels ------------------------------------------------

def _log_binom(n: np.ndarray, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def z1_return_log(K: int) -> np.ndarray:
    """log p_k(0,0) for SRW on Z, k = 0..K (odd entries -inf)."""
    out = np.full(K + 1, -np.inf)
    k = np.arange(0, K + 1, 2)
    out[k] = _log_binom(k.astype(float), (k // 2).astype(float)) - k * math.log(2.0)
    return out

def z1_point_prob(k: int, y: int) -> float:
    if (k + y) % 2 or abs(y) > k:
        return 0.0
    return float(np.exp(_log_binom(np.float64(k), np.float64((k + y) // 2)) - k * math.log(2.0)))


def z2_point_prob(k: int, x: Tuple[int, int]) -> float:
    """SRW on Z^2 via the diagonal product decomposition."""
    return z1_point_prob(k, x[0] + x[1]) * z1_point_prob(k, x[0] - x[1])


def zd_return_log(d: int, K: int) -> np.ndarray:
    """log p_k(0,0) for SRW on Z^d by recursive axis splitting.

    p_k^(d) = sum_m C(k,m) (1/d)^m ((d-1)/d)^(k-m) p_m^(1) p_{k-m}^(d-1).
    """
    if d == 1:
        return z1_return_log(K)
    lower = zd_return_log(d - 1, K)
    one = z1_return_log(K)
    out = np.full(K + 1, -np.inf)
    log_d = math.log(d)
    log_dm1 = math.log(d - 1)
    for k in range(0, K + 1):
        m = np.arange(0, k + 1)
        terms = (
            _log_binom(np.float64(k), m.astype(float))
            + m * (0.0 - log_d)
            + (k - m) * (log_dm1 - log_d)
            + one[m]
            + lower[k - m]
        )
        finite = terms[np.isfinite(terms)]
        if len(finite):
            mx = finite.max()
            out[k] = mx + math.log(np.exp(finite - mx).sum())
    return out


def _canopy_cap(g: Canopy, K: int) -> int:
    """Levels to retain above the start in the canopy quotient.

    For lam < d the level process drifts downward and mass above height h
    decays like (lam/d)^h, so a few hundred levels are exact to double
    precision; upward-drifting walks get no truncation.
    """
    if g.lam < g.d:
        return min(K + 1, 320)
    return K + 1


# -- generic DP utilities --------------------------------------------------------

def indexed_ball_dp(
    g: RootedGraph, x: VertexKey, horizon: int, cap: int = DEFAULT_FRONT_CAP
):
    """CSR kernel over the horizon-ball; returns (order, index, kernel_t)."""
    from scipy.sparse import csr_matrix

    order: List[VertexKey] = [x]
    index = {x: 0}
    frontier = [x]
    for _ in range(horizon):
        nxt = []
        for v in frontier:
            for w in g.transition_row(v).vertices:
                if w not in index:
                    index[w] = len(order)
                    order.append(w)
                    nxt.append(w)
                    if len(order) > cap:
                        raise BudgetExceeded(f"ball exceeds cap {cap}")
        frontier = nxt
        if not frontier:
            break
    rows, cols, data = [], [], []
    for i, v in enumerate(order):
        row = g.transition_row(v)
        for w, p in zip(row.vertices, row.probs.tolist()):
            j = index.get(w)
            if j is not None:   # boundary edges never fire within the horizon
                rows.append(i)
                cols.append(j)
                data.append(p)
    n = len(order)
    return order, index, csr_matrix((data, (cols, rows)), shape=(n, n))


def return_probabilities(
    g: RootedGraph, x: VertexKey, K: int, cap: int = DEFAULT_FRONT_CAP
) -> np.ndarray:
    """p_k(x, x) for k = 0..K, exact."""
    if isinstance(g, Lattice):
        return np.exp(zd_return_log(g.d, K))
    if isinstance(g, Canopy):
        l0 = g.level(x)
        quot = CanopyQuotient(g, l0, level_cap=min(900, l0 + _canopy_cap(g, K)))
        return quot.run(K, collect_return=True)["return_prob"]
    horizon = g.safe_horizon
    if horizon is not None and K > horizon:
        from .errors import HorizonExceedsGraph

        raise HorizonExceedsGraph(f"K={K} beyond safe horizon {horizon}")
    order, index, kt = indexed_ball_dp(g, x, K, cap=cap)
    mass = np.zeros(len(order))
    mass[0] = 1.0
    out = np.zeros(K + 1)
    out[0] = 1.0
    for k in range(1, K + 1):
        mass = kt @ mass
        out[k] = mass[0]
    return out


def self_overlap_series(
    g: RootedGraph, x: VertexKey, K: int, cap: int = DEFAULT_FRONT_CAP
) -> np.ndarray:
    """sum_y p_k(x,y)^2 for k = 0..K (two-replica meeting probability)."""
    if isinstance(g, Lattice):
        # translation invariance + symmetry: sum_y p_k(x,y)^2 = p_2k(x,x)
        return np.exp(zd_return_log(g.d, 2 * K))[::2][: K + 1]
    if isinstance(g, Canopy):
        l0 = g.level(x)
        quot = CanopyQuotient(g, l0, level_cap=min(900, l0 + _canopy_cap(g, K)))
        return quot.run(K, collect_self_overlap=True)["self_overlap"]
    from .zoo.t2z2 import T2TimesZ2

    if isinstance(g, T2TimesZ2):
        return t2z2_self_overlap(g, x, K)
    order, index, kt = indexed_ball_dp(g, x, K, cap=cap)
    mass = np.zeros(len(order))
    mass[0] = 1.0
    out = np.zeros(K + 1)
    out[0] = 1.0
    for k in range(1, K + 1):
        mass = kt @ mass
        out[k] = float((mass * mass).sum())
    return out


# -- tree-times-lattice reset decomposition --------------------------------------

def _z2_taboo_sq_sums(start: Tuple[int, int], jmax: int) -> np.ndarray:
    """A_j = sum_x P_start(X_j = x, X_i != 0 for i in [1, j])^2, j = 0..jmax."""
    half = jmax + max(abs(start[0]), abs(start[1])) + 1
    size = 2 * half + 1
    grid = np.zeros((size, size))
    ox, oy = half + start[0], half + start[1]
    grid[ox, oy] = 1.0
    out = np.zeros(jmax + 1)
    out[0] = 1.0
    for j in range(1, jmax + 1):
        new = np.zeros_like(grid)
        new[1:, :] += 0.25 * grid[:-1, :]
        new[:-1, :] += 0.25 * grid[1:, :]
        new[:, 1:] += 0.25 * grid[:, :-1]
        new[:, :-1] += 0.25 * grid[:, 1:]
        new[half, half] = 0.0
        grid = new
        out[j] = float((grid * grid).sum())
    return out


def t2z2_self_overlap(g, x: VertexKey, K: int, jmax: int = 64) -> np.ndarray:
    """Meeting probabilities for the tree-times-lattice walk, exactly.

    Two copies share the vertex at time k iff their lattice parts coincide,
    their times since the last reset coincide, and the independent uniform
    descent choices agree (probability 2^-age).  Conditioning on the age
    splits the lattice path at its last visit to 0, giving

      P(S_k = S'_k) = sum_{j<k} 2^-j r_{k-j}^2 A_j + 2^-k A~_k,

    with r_t the kernel to 0, A_j the squared-sum of the 0-avoiding kernel
    from 0, and A~_k the same from the start point (never-reset term).
    Ages beyond ``jmax`` are suppressed by 2^-j below double precision.
    """
    path, x0 = g.split(x)
    r = np.array([z2_point_prob(t, (-x0[0], -x0[1])) for t in range(K + 1)])
    a_sq = _z2_taboo_sq_sums((0, 0), jmax)
    never = _z2_taboo_sq_sums(x0, min(K, jmax))
    out = np.zeros(K + 1)
    out[0] = 1.0
    pow2 = 0.5 ** np.arange(jmax + 1)
    for k in range(1, K + 1):
        jtop = min(k - 1, jmax)
        js = np.arange(0, jtop + 1)
        inc = float((pow2[js] * a_sq[js] * r[k - js] ** 2).sum())
        if k <= jmax:
            inc += 0.5 ** k * never[k]
        out[k] = inc
    return out


# -- profiles ----------------------------------------------------------------

@dataclass
class KernelProfile:
    origin: VertexKey
    horizon: int
    return_probs: np.ndarray
    green_partial: np.ndarray
    spectral_fit: Optional[LinearFit] = None
    spectral_dimension: Optional[float] = None
    volume_fit: Optional[dict] = None

    def to_json(self) -> dict:
        return {
            "origin": self.origin.to_bytes().hex(),
            "horizon": self.horizon,
            "return_probs": self.return_probs.tolist(),
            "green_partial": self.green_partial.tolist(),
            "spectral_dimension": self.spectral_dimension,
            "spectral_fit": None
            if self.spectral_fit is None
            else {
                "slope": self.spectral_fit.slope,
                "r2": self.spectral_fit.r2,
                "stderr": self.spectral_fit.stderr,
            },
            "volume_fit": self.volume_fit,
        }


def heat_kernel(
    g: RootedGraph, x: VertexKey, n: int, cap: int = DEFAULT_FRONT_CAP
) -> Dict[VertexKey, float]:
    """Exact p_n(x, .) by front DP."""
    order, index, kt = indexed_ball_dp(g, x, n, cap=cap)
    mass = np.zeros(len(order))
    mass[0] = 1.0
    for _ in range(n):
        mass = kt @ mass
    return {v: float(m) for v, m in zip(order, mass) if m > 0.0}


@dataclass(frozen=True)
class GreenEstimate:
    partial: float
    estimate: Optional[float]
    error: Optional[float]
    divergent: bool
    mode: str
    detail: dict


def green_truncated(g: RootedGraph, x: VertexKey, K: int, cap: int = DEFAULT_FRONT_CAP) -> GreenEstimate:
    """Truncated Green function with tail extrapolation when the increments
    admit a geometric or summable power model; flagged divergent otherwise."""
    probs = return_probabilities(g, x, K, cap=cap)
    ext: TailExtrapolation = extrapolate_tail(probs[1:])
    partial = float(probs.sum())
    if ext.estimate is None:
        return GreenEstimate(partial, None, None, True, ext.mode, ext.detail)
    return GreenEstimate(partial, 1.0 + ext.estimate, ext.error, False, ext.mode, ext.detail)


def hitting_time_distribution(
    g: RootedGraph,
    start: VertexKey,
    targets: Sequence[VertexKey],
    horizon: int,
    cap: int = DEFAULT_FRONT_CAP,
    with_survival: bool = False,
):
    """P(tau = t) for t = 0..horizon, tau = inf{k > 0 : S_k in targets}.

    Exact absorbing-chain DP; the entry at t = 0 is always 0 (first-return
    convention when the start lies in the target set).  With
    ``with_survival`` the pair (distribution, P(tau > horizon)) is returned
    and sums to 1 up to float rounding.
    """
    target_set = set(targets)
    out = np.zeros(horizon + 1)
    masses: Dict[VertexKey, float] = {start: 1.0}
    for t in range(1, horizon + 1):
        push: Dict[VertexKey, float] = {}
        absorbed = 0.0
        for z, m in masses.items():
            row = g.transition_row(z)
            for y, p in zip(row.vertices, row.probs.tolist()):
                if y in target_set:
                    absorbed += m * p
                else:
                    push[y] = push.get(y, 0.0) + m * p
        if len(push) > cap:
            raise BudgetExceeded(f"front size {len(push)} exceeds cap {cap}")
        out[t] = absorbed
        masses = push
        if not masses:
            break
    if with_survival:
        return out, math.fsum(masses.values())
    return out


@dataclass(frozen=True)
class VolumeGrowth:
    radii: np.ndarray
    sphere_measure: np.ndarray
    fractal_dimension: Optional[float]
    power_fit: Optional[LinearFit]
    exponential_growth: bool
    detail: dict


def volume_growth(
    g: RootedGraph,
    x: VertexKey,
    r_max: int,
    measure: str = "counting",
    cap: int = DEFAULT_FRONT_CAP,
) -> VolumeGrowth:
    """Sphere measures mu(S(x, r)) with a power-law fit for d_f.

    ``exponential_growth`` is set when log mu against r is a strictly better
    linear model than log mu against log r.
    """
    ball = bfs_ball(g, x, r_max, cap=cap)
    mu = np.zeros(r_max + 1)
    for v, dist in ball.items():
        if measure == "counting":
            mu[dist] += 1.0
        elif measure == "reversing":
            pi = g.reversing_measure(v)
            if pi is None:
                raise WrongFamily("no reversing measure declared")
            mu[dist] += pi
        else:
            raise ValueError("measure must be counting or reversing")
    rs = np.arange(1, r_max + 1)
    ys = mu[1:]
    if np.any(ys <= 0):
        return VolumeGrowth(rs, ys, None, None, False, {"reason": "graph exhausted"})
    pow_fit = linear_fit(np.log(rs), np.log(ys))
    exp_fit = linear_fit(rs, np.log(ys))
    exponential = exp_fit.r2 > pow_fit.r2 and exp_fit.slope > 0.05
    return VolumeGrowth(
        rs,
        ys,
        None if exponential else pow_fit.slope + 1.0,
        pow_fit,
        exponential,
        {"exp_r2": exp_fit.r2, "pow_r2": pow_fit.r2, "measure": measure},
    )


def spectral_dimension_fit(
    return_probs: np.ndarray, n_min: int = 4
) -> Tuple[float, LinearFit]:
    """d_hat = -2 * slope of log p_{2n}(x,x) against log n on dyadic n."""
    K = len(return_probs) - 1
    ns = []
    n = n_min
    while 2 * n <= K:
        ns.append(n)
        n *= 2
    ns = [n for n in ns if return_probs[2 * n] > 0]
    if len(ns) < 8:
        raise InsufficientData(f"only {len(ns)} dyadic points with positive mass")
    fit = linear_fit(np.log(ns), np.log([return_probs[2 * n] for n in ns]))
    return -2.0 * fit.slope, fit


def kernel_profile(
    g: RootedGraph,
    x: VertexKey,
    K: int,
    r_max: Optional[int] = None,
    cap: int = DEFAULT_FRONT_CAP,
) -> KernelProfile:
    probs = return_probabilities(g, x, K, cap=cap)
    prof = KernelProfile(x, K, probs, np.cumsum(probs))
    try:
        d_hat, fit = spectral_dimension_fit(probs)
        prof.spectral_dimension = d_hat
        prof.spectral_fit = fit
    except InsufficientData:
        pass
    if r_max:
        vg = volume_growth(g, x, r_max, cap=cap)
        prof.volume_fit = {
            "fractal_dimension": vg.fractal_dimension,
            "exponential_growth": vg.exponential_growth,
            **vg.detail,
        }
    return prof


# -- canopy level chain ------------------------------------------------------

@dataclass(frozen=True)
class CanopyLevelChain:
    chain_top: int
    pbar: np.ndarray   # [start_depth w, t, end_depth w']
    d: int
    lam: float

    def reversibility_deviation(self, w_max: Optional[int] = None) -> float:
        """max over t, w of |pbar_t(0,w) - (d/lam)^w pbar_t(w,0)|.

        The conductance identity is exact for w < chain_top; the bottom layer
        w = chain_top carries a boundary factor and is excluded.
        """
        wmax = self.chain_top - 1 if w_max is None else w_max
        if wmax >= self.chain_top:
            raise ValueError("identity only holds below the bottom layer")
        dev = 0.0
        for w in range(0, wmax + 1):
            lhs = self.pbar[0, :, w]
            rhs = (self.d / self.lam) ** w * self.pbar[w, :, 0]
            dev = max(dev, float(np.max(np.abs(lhs - rhs))))
        return dev


def canopy_level_chain(g: Canopy, chain_top: int, horizon: int) -> CanopyLevelChain:
    """Glued-chain kernels pbar^(l)_t(w, w') of the subtree below ray level l."""
    if not isinstance(g, Canopy):
        raise WrongFamily("canopy_level_chain needs a Canopy graph")
    pbar = np.zeros((chain_top + 1, horizon + 1, chain_top + 1))
    for w in range(chain_top + 1):
        pbar[w] = subtree_level_masses(g, chain_top, w, horizon)
    return CanopyLevelChain(chain_top, pbar, g.d, g.lam)


# -- Carne-Varopoulos monitor ------------------------------------------------

def carne_varopoulos_check(
    g: RootedGraph, x: VertexKey, n: int, cap: int = DEFAULT_FRONT_CAP
) -> float:
    """Max of p_n(x,y) / (2 sqrt(d_max) exp(-d(x,y)^2 / 2n)) over the front.

    A value <= 1 means the bound held on every computed entry.
    """
    kern = heat_kernel(g, x, n, cap=cap)
    dist = bfs_ball(g, x, n, cap=cap)
    d_max = max(g.degree(v) for v in kern)
    worst = 0.0
    for y, p in kern.items():
        bound = 2.0 * math.sqrt(d_max) * math.exp(-dist[y] ** 2 / (2.0 * n))
        worst = max(worst, p / bound)
    return worst
