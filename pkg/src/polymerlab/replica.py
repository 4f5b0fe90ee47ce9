"""Annealed layer: two-replica computations with the environment integrated out.

The second moment of the normalized partition function is an expectation over
two independent copies of the walk,

    E[W_n^2] = E2[ exp(Lambda2(beta) * #{i <= n : S_i = S'_i}) ],

so everything here is beta-free walk geometry plus the scalar Lambda2.  Three
exact engines compute it:

* a generic pair-front DP over canonical vertex pairs (any graph, small n),
* a difference-walk DP on Z^d (the pair reduces to one walk with a lazy
  step law, collecting the collision factor at the origin),
* a first-meeting renewal for the canopy, whose level transitivity turns the
  meeting structure into a Volterra system over (time, level).

They are cross-checked against each other and against path-pair enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .canopy_reduction import CanopyQuotient
from .diagnostics import return_probabilities, self_overlap_series
from .disorder import DisorderLaw
from .errors import BudgetExceeded
from .graph_core import DEFAULT_FRONT_CAP, RootedGraph, sample_walk
from .keys import VertexKey
from .seriesfit import ConvergenceDiagnosis, diagnose_convergence, linear_fit
from .zoo.canopy import Canopy
from .zoo.gw import GWTree
from .zoo.lattice import Lattice


# -- generic pair-front DP -----------------------------------------------------

def second_moment_pair(
    g: RootedGraph,
    law: DisorderLaw,
    x: VertexKey,
    beta: float,
    n: int,
    cap: int = DEFAULT_FRONT_CAP,
) -> np.ndarray:
    """E[W_k^2] for k = 0..n by exact DP over canonical (unordered) pairs.

    Stored masses are summed over both orderings, halving memory; the update
    iterates one ordered representative per canonical pair, which reproduces
    the ordered sums exactly by symmetry of the product kernel.
    """
    mu = math.exp(law.lambda2_of(beta))
    masses: Dict[Tuple[VertexKey, VertexKey], float] = {(x, x): 1.0}
    log_offset = 0.0
    out = np.empty(n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        acc: Dict[Tuple[VertexKey, VertexKey], float] = {}
        for (a, b), m in masses.items():
            row_a = g.transition_row(a)
            row_b = row_a if b == a else g.transition_row(b)
            for u, pu in zip(row_a.vertices, row_a.probs.tolist()):
                base = m * pu
                for v, pv in zip(row_b.vertices, row_b.probs.tolist()):
                    w = base * pv
                    if u == v:
                        w *= mu
                        key = (u, v)
                    else:
                        key = (u, v) if u < v else (v, u)
                    acc[key] = acc.get(key, 0.0) + w
        if len(acc) > cap:
            raise BudgetExceeded(f"pair front size {len(acc)} exceeds cap {cap}")
        mx = max(acc.values())
        log_offset += math.log(mx)
        masses = {key: v / mx for key, v in acc.items()}
        out[k] = math.exp(math.log(math.fsum(masses.values())) + log_offset)
    return out


# -- lattice difference walk ------------------------------------------------

def _difference_increments(d: int) -> List[Tuple[Tuple[int, ...], float]]:
    steps = []
    for axis in range(d):
        for s in (-1, 1):
            e = [0] * d
            e[axis] = s
            steps.append(tuple(e))
    p = 1.0 / len(steps)
    acc: Dict[Tuple[int, ...], float] = {}
    for e1 in steps:
        for e2 in steps:
            diff = tuple(a - b for a, b in zip(e1, e2))
            acc[diff] = acc.get(diff, 0.0) + p * p
    return sorted(acc.items())


def second_moment_difference(
    lattice: Lattice, law: DisorderLaw, beta: float, n: int
) -> np.ndarray:
    """E[W_k^2] on Z^d via the difference walk S - S' (dense grid DP)."""
    d = lattice.d
    mu = math.exp(law.lambda2_of(beta))
    side = 4 * n + 1
    center = (2 * n,) * d
    grid = np.zeros((side,) * d)
    grid[center] = 1.0
    incs = _difference_increments(d)
    out = np.empty(n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        new = np.zeros_like(grid)
        for off, p in incs:
            src = tuple(
                slice(max(0, -o), side - max(0, o)) for o in off
            )
            dst = tuple(
                slice(max(0, o), side - max(0, -o)) for o in off
            )
            new[dst] += p * grid[src]
        new[center] *= mu
        grid = new
        out[k] = float(grid.sum())
    return out


# -- canopy renewal ---------------------------------------------------------

def _canopy_meet_kernels(
    g: Canopy, horizon: int, level_max: int
) -> np.ndarray:
    """Q[t, a, b] = P2 over two copies from a level-a vertex of meeting at a
    level-b vertex at time t (levels above level_max lumped and unused)."""
    Q = np.zeros((horizon + 1, level_max + 1, level_max + 1))
    for a in range(level_max + 1):
        quot = CanopyQuotient(g, a, level_cap=min(900, level_max + horizon + 2))
        res = quot.run(horizon, collect_meet_levels=level_max)
        Q[:, a, :] = res["meet_by_level"]
    return Q


def second_moment_canopy_renewal(
    g: Canopy,
    law: DisorderLaw,
    x: VertexKey,
    beta: float,
    n: int,
    level_slack: int = 60,
) -> np.ndarray:
    """E[W_k^2] on the canopy via first-meeting renewal over (time, level).

    Meetings of the two copies happen at a vertex whose level fully
    determines the future meeting statistics (the canopy is level
    transitive), so the first-meeting kernel D solves the Volterra system
    D_t = Q_t - sum_{s<t} D_s Q_{t-s} over level-indexed matrices, and

        V_n(a) = 1 + sum_{t<=n} sum_b D_t(a,b) [(1+mu2) V_{n-t}(b) - 1].

    ``level_slack`` bounds the meeting levels retained above the start; the
    climb probability decays like (lambda/d)^height, making the truncation
    physically negligible at the default.
    """
    l0 = g.level(x)
    mu = math.exp(law.lambda2_of(beta)) - 1.0
    L = l0 + level_slack
    Q = _canopy_meet_kernels(g, n, L)
    D = np.zeros_like(Q)
    for t in range(1, n + 1):
        conv = np.zeros((L + 1, L + 1))
        for s in range(1, t):
            conv += D[s] @ Q[t - s]
        D[t] = Q[t] - conv
    V = np.ones((n + 1, L + 1))
    for k in range(1, n + 1):
        acc = np.zeros(L + 1)
        for t in range(1, k + 1):
            acc += D[t] @ ((1.0 + mu) * V[k - t] - 1.0)
        V[k] = 1.0 + acc
    return V[:, l0].copy()


def second_moment_exact(
    g: RootedGraph,
    law: DisorderLaw,
    x: VertexKey,
    beta: float,
    n: int,
    method: str = "auto",
    cap: int = DEFAULT_FRONT_CAP,
) -> np.ndarray:
    """Running E[W_k^2], k = 0..n; engine picked per graph structure."""
    if method == "auto":
        if isinstance(g, Lattice):
            method = "difference"
        elif isinstance(g, Canopy):
            method = "renewal"
        else:
            method = "pair"
    if method == "difference":
        if not isinstance(g, Lattice):
            raise ValueError("difference method needs a full lattice")
        return second_moment_difference(g, law, beta, n)
    if method == "renewal":
        if not isinstance(g, Canopy):
            raise ValueError("renewal method needs a canopy")
        return second_moment_canopy_renewal(g, law, x, beta, n)
    if method == "pair":
        return second_moment_pair(g, law, x, beta, n, cap=cap)
    raise ValueError(f"unknown method {method!r}")


# -- chaos expansion ------------------------------------------------------------

def chaos_term(g: RootedGraph, x: VertexKey, k: int, n: int, budget: int = 2_000_000) -> float:
    """sum over 1 <= n_1 < ... < n_k <= n of P2(S and S' meet at those times).

    Brute-force path-pair enumeration; exponential in n, guarded by a budget
    on (#paths)^2 * C(n, k).  Used as the independent side of the chaos
    identity against second_moment_exact.
    """
    if k > n:
        return 0.0
    from itertools import combinations

    paths: List[Tuple[List[VertexKey], float]] = []

    def rec(path, prob):
        if len(path) == n + 1:
            paths.append((list(path), prob))
            return
        row = g.transition_row(path[-1])
        for y, p in zip(row.vertices, row.probs.tolist()):
            path.append(y)
            rec(path, prob * p)
            path.pop()

    rec([x], 1.0)
    n_subsets = math.comb(n, k)
    if len(paths) ** 2 * n_subsets > budget:
        raise BudgetExceeded("chaos enumeration too large")
    total = 0.0
    for times in combinations(range(1, n + 1), k):
        for p1, q1 in paths:
            for p2, q2 in paths:
                if all(p1[i] == p2[i] for i in times):
                    total += q1 * q2
    return total


def chaos_identity_value(
    g: RootedGraph, law: DisorderLaw, x: VertexKey, beta: float, n: int
) -> float:
    """1 + sum_k (e^Lambda2 - 1)^k chaos_term(k, n): must equal E[W_n^2]."""
    mu = math.exp(law.lambda2_of(beta)) - 1.0
    total = 1.0
    for k in range(1, n + 1):
        total += mu ** k * chaos_term(g, x, k, n)
    return total


# -- collision sums -------------------------------------------------------------

@dataclass(frozen=True)
class CollisionSumRecord:
    partial_sums: np.ndarray       # running sum of p_k(x,x)^2, k = 0..K
    increments: np.ndarray
    log_fit: Optional[object]      # LinearFit of partial sums against log k
    cauchy: ConvergenceDiagnosis


def diagonal_collision_sum(
    g: RootedGraph, x: VertexKey, K: int, cap: int = DEFAULT_FRONT_CAP
) -> CollisionSumRecord:
    """Partial sums of sum_k p_k(x,x)^2 with a divergence diagnosis."""
    probs = return_probabilities(g, x, K, cap=cap)
    inc = probs ** 2
    partial = np.cumsum(inc)
    ks = [k for k in range(8, K + 1) if probs[k] > 0]
    fit = None
    if len(ks) >= 8:
        fit = linear_fit(np.log(ks), partial[ks])
    return CollisionSumRecord(
        partial, inc, fit, diagnose_convergence(inc[1:], total=float(partial[-1]))
    )


@dataclass(frozen=True)
class KhasminskiiRecord:
    vertices: List[VertexKey]
    truncated_sums: np.ndarray     # per vertex: sum_{k<=K} sum_y p_k(x,y)^2
    increments: List[np.ndarray]
    diagnoses: List[ConvergenceDiagnosis]

    @property
    def max_sum(self) -> float:
        return float(self.truncated_sums.max())

    @property
    def all_cauchy(self) -> bool:
        return all(d.converged for d in self.diagnoses)


def khasminskii_sup(
    g: RootedGraph,
    vertex_sample: Sequence[VertexKey],
    K: int,
    cap: int = DEFAULT_FRONT_CAP,
) -> KhasminskiiRecord:
    """Truncated expected pairwise collisions E2_x[N_K] per sampled vertex.

    The criterion at infinity takes a supremum over all vertices; this is its
    finite surrogate over a documented sample, with a convergence diagnosis
    per vertex (collisions counted from k = 1).
    """
    sums = []
    incs = []
    diags = []
    for v in vertex_sample:
        series = self_overlap_series(g, v, K, cap=cap)
        inc = series[1:]
        total = float(inc.sum())
        sums.append(total)
        incs.append(inc)
        diags.append(diagnose_convergence(inc, total=total))
    return KhasminskiiRecord(list(vertex_sample), np.array(sums), incs, diags)


# -- Birkner conditional second moment -----------------------------------------

@dataclass(frozen=True)
class BirknerTrajectory:
    log_values: np.ndarray          # log E[e^{Lambda2 N_t} | S], t = 0..n
    stabilized: bool
    final_ratio: float              # max over trailing window of B_t / B_{t-1}
    truncation_loss: float


@dataclass(frozen=True)
class BirknerRecord:
    trajectories: List[BirknerTrajectory]
    lambda2: float

    @property
    def final_logs(self) -> np.ndarray:
        return np.array([t.log_values[-1] for t in self.trajectories])

    def quantiles(self, qs=(0.1, 0.5, 0.9)) -> np.ndarray:
        return np.quantile(self.final_logs, qs)

    @property
    def all_stabilized(self) -> bool:
        return all(t.stabilized for t in self.trajectories)


def _birkner_series_generic(
    g, trajectory, l2: float, cap: int
) -> Tuple[np.ndarray, float]:
    from .diagnostics import indexed_ball_dp

    n = len(trajectory) - 1
    order, index, kt = indexed_ball_dp(g, trajectory[0], n, cap=cap)
    mass = np.zeros(len(order))
    mass[index[trajectory[0]]] = 1.0
    factor = math.exp(l2)
    logs = np.zeros(n + 1)
    log_off = 0.0
    for t in range(1, n + 1):
        mass = kt @ mass
        j = index.get(trajectory[t])
        if j is not None:
            mass[j] *= factor
        mx = float(mass.max())
        log_off += math.log(mx)
        mass /= mx
        logs[t] = math.log(float(mass.sum())) + log_off
    return logs, 0.0


def _birkner_series_regular_tree(
    g: GWTree, trajectory, l2: float, depth_cap: int = 120
) -> Tuple[np.ndarray, float]:
    """Exact conditional series on a deterministic m-ary tree.

    States: vertices of the trajectory's trace plus, per trace vertex, one
    aggregated escape chain for all its unvisited child subtrees (identical
    infinite m-ary trees where no collision can occur).  Mass deeper than
    ``depth_cap`` below an exit is dropped and reported.
    """
    m = next(iter(g.offspring))
    lam = g.lam
    trace = []
    index: Dict[VertexKey, int] = {}
    for v in trajectory:
        if v not in index:
            index[v] = len(trace)
            trace.append(v)
    R = len(trace)
    in_trace = set(trace)
    kids_in = []
    parents = []
    for v in trace:
        kids = [
            VertexKey(v.family_tag, v.payload + (j,)) for j in range(g.n_children(v))
        ]
        kids_in.append([index[k] for k in kids if k in in_trace])
        n_out = len(kids) - len(kids_in[-1])
        parents.append(index.get(VertexKey(v.family_tag, v.payload[:-1])) if v.payload else None)
        kids_in[-1] = (kids_in[-1], n_out)

    chain = np.zeros((R, depth_cap))     # chain[i, j-1]: depth j below trace vertex i
    vec = np.zeros(R)
    vec[index[trajectory[0]]] = 1.0
    escaped = 0.0    # mass beyond depth_cap: frozen as collision-free
    factor = math.exp(l2)
    p_up_chain = lam / (lam + m)
    p_down_chain = m / (lam + m)
    return_bound = (lam / m) ** depth_cap if lam < m else 1.0
    n = len(trajectory) - 1
    logs = np.zeros(n + 1)
    log_off = 0.0
    for t in range(1, n + 1):
        new_vec = np.zeros(R)
        new_chain = np.zeros_like(chain)
        # trace-vertex moves
        for i, v in enumerate(trace):
            mass = vec[i]
            if mass == 0.0:
                continue
            (kin, n_out) = kids_in[i]
            c = len(kin) + n_out
            if v.payload:
                denom = lam + c
                if parents[i] is not None and lam > 0:
                    new_vec[parents[i]] += mass * (lam / denom)
            else:
                denom = float(c)
            for j in kin:
                new_vec[j] += mass / denom
            if n_out:
                new_chain[i, 0] += mass * n_out / denom
        # chain moves (vectorized over all exits)
        new_chain[:, 1:] += p_down_chain * chain[:, :-1]
        escaped += float(p_down_chain * chain[:, -1].sum())
        back = p_up_chain * chain[:, 0]
        new_vec += back
        new_chain[:, :-1] += p_up_chain * chain[:, 1:]
        vec, chain = new_vec, new_chain
        j = index[trajectory[t]]
        vec[j] *= factor
        mx = float(max(vec.max(), chain.max(), escaped))
        log_off += math.log(mx)
        vec /= mx
        chain /= mx
        escaped /= mx
        logs[t] = math.log(float(vec.sum() + chain.sum() + escaped)) + log_off
    # relative error bound: escaped mass re-entering the trace and colliding
    trunc = escaped / max(float(vec.sum() + chain.sum() + escaped), 1e-300)
    return logs, trunc * return_bound * math.expm1(l2) * n


def birkner_conditional(
    g: RootedGraph,
    law: DisorderLaw,
    x: VertexKey,
    beta: float,
    n_traj: int,
    horizon: int,
    seed: int,
    cap: int = DEFAULT_FRONT_CAP,
    window: int = 50,
    ratio_tol: float = 1e-3,
) -> BirknerRecord:
    """Per-trajectory exact conditional expectations E[e^{Lambda2 N_n} | S].

    For each sampled trajectory S the second copy S' is integrated out by a
    time-inhomogeneous one-replica DP (S' collects a factor e^Lambda2 when
    sitting on S_t at time t).  A trajectory "stabilizes" when the trailing
    growth ratio stays below 1 + ratio_tol.
    """
    l2 = law.lambda2_of(beta)
    regular_tree = isinstance(g, GWTree) and len(g.offspring) == 1
    out = []
    for r in range(n_traj):
        traj = sample_walk(g, x, horizon, seed=seed + 7919 * r)
        if regular_tree:
            logs, loss = _birkner_series_regular_tree(g, traj, l2)
        else:
            logs, loss = _birkner_series_generic(g, traj, l2, cap)
        tail = np.exp(np.diff(logs[-(window + 1):]))
        ratio = float(tail.max()) if len(tail) else float("nan")
        out.append(
            BirknerTrajectory(logs, bool(ratio < 1.0 + ratio_tol), ratio, loss)
        )
    return BirknerRecord(out, l2)
