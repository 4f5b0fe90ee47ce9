"""Quenched layer: exact point-to-point partition-function DP under one
realized environment, plus Monte Carlo free-energy estimation.

The state is a ``WeightFront``: relative masses over the reachable front with
a shared ``log_offset``, renormalized to max-mass 1 after every step so that
horizons of thousands of steps at large beta never underflow.  With
``W_n(x, y) = masses[y] * exp(log_offset)``:

    masses'[y] = sum_z masses[z] P(z, y) * exp(beta * omega(i, y) - Lambda(beta))

Because the environment is a pure function of (seed, time, vertex), the same
quenched field is seen by every engine that touches it; the batched
environment-MC engine below reproduces the dict engine bit-for-bit on shared
supports.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .disorder import DisorderLaw, FieldSampler, omega_matrix, spawn_seed
from .errors import BudgetExceeded, MissingHistory, NumericalError
from .graph_core import DEFAULT_FRONT_CAP, RootedGraph, bfs_ball
from .keys import VertexKey

_Z99 = 2.5758293035489004  # normal quantile for two-sided 99%


@dataclass
class WeightFront:
    """Log-scale point-to-point mass W_n(origin, .) at horizon ``steps``."""

    origin: VertexKey
    beta: float
    time0: int                      # environment time offset of the origin
    steps: int                      # n: steps taken so far
    log_offset: float
    masses: Dict[VertexKey, float]  # relative scale, max = 1 after each step
    dist: Optional[Dict[VertexKey, int]] = None
    pruned_fraction: float = 0.0    # cumulative relative mass dropped by pruning

    def total_log(self) -> float:
        s = math.fsum(self.masses.values())
        if s <= 0:
            raise NumericalError("front mass vanished")
        return math.log(s) + self.log_offset

    def point_log(self, y: VertexKey) -> float:
        m = self.masses.get(y, 0.0)
        return math.log(m) + self.log_offset if m > 0 else -math.inf


def make_front(g: RootedGraph, x: VertexKey, beta: float, time0: int = 0) -> WeightFront:
    return WeightFront(x, float(beta), time0, 0, 0.0, {x: 1.0}, dist={x: 0})


def evolve_front(
    g: RootedGraph,
    front: WeightFront,
    sampler: FieldSampler,
    steps: int,
    cap: int = DEFAULT_FRONT_CAP,
    prune_rel: float = 0.0,
) -> WeightFront:
    """Advance the front ``steps`` steps through the sampled environment."""
    if steps < 1:
        raise ValueError("steps >= 1 required")
    horizon = g.safe_horizon
    if horizon is not None and front.steps + steps > horizon:
        from .errors import HorizonExceedsGraph

        raise HorizonExceedsGraph(
            f"horizon {front.steps + steps} exceeds safe horizon {horizon}"
        )
    lam = sampler.law.lambda_of(front.beta)
    masses = front.masses
    dist = dict(front.dist) if front.dist is not None else None
    log_offset = front.log_offset
    pruned = front.pruned_fraction
    for j in range(1, steps + 1):
        t = front.time0 + front.steps + j
        push: Dict[VertexKey, float] = {}
        for z, m in masses.items():
            row = g.transition_row(z)
            for y, p in zip(row.vertices, row.probs.tolist()):
                push[y] = push.get(y, 0.0) + m * p
        if len(push) > cap:
            raise BudgetExceeded(f"front size {len(push)} exceeds cap {cap}")
        keys = list(push.keys())
        vals = np.fromiter(push.values(), dtype=np.float64, count=len(push))
        digs = np.fromiter((k.digest for k in keys), dtype=np.uint64, count=len(keys))
        om = sampler.omega_array(t, digs)
        vals *= np.exp(front.beta * om - lam)
        mx = float(vals.max())
        if not mx > 0 or not math.isfinite(mx):
            raise NumericalError("front renormalization failed")
        log_offset += math.log(mx)
        vals /= mx
        if prune_rel > 0.0:
            keep = vals >= prune_rel
            pruned += float(vals[~keep].sum()) / float(vals.sum())
            keys = [k for k, kp in zip(keys, keep.tolist()) if kp]
            vals = vals[keep]
        masses = dict(zip(keys, vals.tolist()))
        if dist is not None:
            step_index = front.steps + j
            for k in keys:
                if k not in dist:
                    dist[k] = step_index
    return WeightFront(
        front.origin,
        front.beta,
        front.time0,
        front.steps + steps,
        log_offset,
        masses,
        dist=dist,
        pruned_fraction=pruned,
    )


def log_partition(
    g: RootedGraph,
    sampler: FieldSampler,
    x: VertexKey,
    n: int,
    beta: float,
    time0: int = 0,
    cap: int = DEFAULT_FRONT_CAP,
) -> float:
    """log W_n(x) for one environment; exact up to float rounding."""
    if n == 0:
        return 0.0
    return evolve_front(g, make_front(g, x, beta, time0), sampler, n, cap=cap).total_log()


@dataclass(frozen=True)
class EndpointStats:
    overlap: float          # I_n = sum_y q(y)^2 over the endpoint law q
    max_mass: float
    argmax_vertex: VertexKey
    mean_displacement: float


def endpoint_stats(front: WeightFront, g: Optional[RootedGraph] = None) -> EndpointStats:
    keys = list(front.masses.keys())
    vals = np.fromiter(front.masses.values(), dtype=np.float64, count=len(keys))
    q = vals / vals.sum()
    overlap = float((q * q).sum())
    mx = float(q.max())
    arg = min(k for k, v in zip(keys, q.tolist()) if v == mx)
    dist = front.dist
    if dist is None or any(k not in dist for k in keys):
        if g is None:
            raise ValueError("need graph to recover distances")
        dist = bfs_ball(g, front.origin, front.steps)
    disp = float(sum(qq * dist[k] for k, qq in zip(keys, q.tolist())))
    return EndpointStats(overlap, mx, arg, disp)


# -- path-level sampling ----------------------------------------------------

@dataclass
class PolymerHistory:
    """All fronts of one run, for backward path sampling."""

    fronts: List[WeightFront] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.fronts) - 1


def evolve_with_history(
    g: RootedGraph,
    x: VertexKey,
    sampler: FieldSampler,
    n: int,
    beta: float,
    time0: int = 0,
    cap: int = DEFAULT_FRONT_CAP,
) -> PolymerHistory:
    fronts = [make_front(g, x, beta, time0)]
    for _ in range(n):
        fronts.append(evolve_front(g, fronts[-1], sampler, 1, cap=cap))
    return PolymerHistory(fronts)


def sample_polymer_path(
    g: RootedGraph, history: PolymerHistory, seed: int
) -> List[VertexKey]:
    """One path drawn exactly from the polymer measure of the stored run."""
    import random

    if not history.fronts:
        raise MissingHistory("no fronts stored")
    rng = random.Random(seed)

    def draw(pairs: Sequence[Tuple[VertexKey, float]]) -> VertexKey:
        total = math.fsum(p for _, p in pairs)
        u = rng.random() * total
        acc = 0.0
        for k, p in pairs:
            acc += p
            if u < acc:
                return k
        return pairs[-1][0]

    n = history.horizon
    path: List[VertexKey] = [draw(list(history.fronts[n].masses.items()))]
    for k in range(n - 1, -1, -1):
        y = path[-1]
        f = history.fronts[k]
        pairs = []
        for z, m in f.masses.items():
            p = g.transition_row(z).as_dict().get(y, 0.0)
            if p > 0:
                pairs.append((z, m * p))
        if not pairs:
            raise MissingHistory("backward step lost support (pruned run?)")
        path.append(draw(pairs))
    path.reverse()
    return path


# -- batched environment MC ---------------------------------------------------

class BallSystem:
    """Enumerated n-step ball with a CSR kernel, for vectorized env-MC.

    ``ball_filter`` restricts the enumerated state space (e.g. a depth cap on
    trees); transitions leaving the filtered ball are dropped, making rows
    sub-stochastic.  The maximal row deficit is reported so callers can bound
    the truncation.
    """

    def __init__(self, g, x, n, cap=DEFAULT_FRONT_CAP, ball_filter=None):
        from scipy.sparse import csr_matrix

        order: List[VertexKey] = [x]
        index = {x: 0}
        frontier = [x]
        for _ in range(n):
            nxt = []
            for v in frontier:
                for w in g.transition_row(v).vertices:
                    if w not in index and (ball_filter is None or ball_filter(w)):
                        index[w] = len(order)
                        order.append(w)
                        nxt.append(w)
                        if len(order) > cap:
                            raise BudgetExceeded(f"ball exceeds cap {cap}")
            frontier = nxt
            if not frontier:
                break
        rows, cols, data = [], [], []
        deficit = 0.0
        for i, v in enumerate(order):
            row = g.transition_row(v)
            kept = 0.0
            for w, p in zip(row.vertices, row.probs.tolist()):
                j = index.get(w)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    data.append(p)
                    kept += p
            deficit = max(deficit, 1.0 - kept)
        B = len(order)
        self.graph = g
        self.origin = x
        self.order = order
        self.index = index
        self.kernel_t = csr_matrix(
            (data, (cols, rows)), shape=(B, B)
        )  # transposed: new = K_t @ old
        self.digests = np.fromiter((v.digest for v in order), dtype=np.uint64, count=B)
        self.row_deficit = deficit

    @property
    def size(self) -> int:
        return len(self.order)


@dataclass
class EnvMCResult:
    log_w: np.ndarray            # (R,) log W_n per environment
    seeds: np.ndarray            # (R,) environment seeds
    overlap: Optional[np.ndarray] = None   # (R, n) I_k series per environment
    max_mass: Optional[np.ndarray] = None  # (R, n)
    truncation_deficit: float = 0.0


def env_mc(
    system: BallSystem,
    law: DisorderLaw,
    beta: float,
    n: int,
    replicas: int,
    seed: int,
    time0: int = 0,
    collect_endpoint: bool = False,
) -> EnvMCResult:
    """Evolve `replicas` independent environments over a shared ball."""
    lam = law.lambda_of(beta)
    seeds = np.array([spawn_seed(seed, r) for r in range(replicas)], dtype=np.uint64)
    B = system.size
    masses = np.zeros((replicas, B))
    masses[:, system.index[system.origin]] = 1.0
    log_off = np.zeros(replicas)
    overlap = np.zeros((replicas, n)) if collect_endpoint else None
    max_mass = np.zeros((replicas, n)) if collect_endpoint else None
    kt = system.kernel_t
    for j in range(1, n + 1):
        masses = (kt @ masses.T).T
        om = omega_matrix(law, seeds, time0 + j, system.digests)
        masses *= np.exp(beta * om - lam)
        mx = masses.max(axis=1)
        if not np.all(mx > 0):
            raise NumericalError("a replica's front vanished")
        log_off += np.log(mx)
        masses /= mx[:, None]
        if collect_endpoint:
            tot = masses.sum(axis=1)
            q = masses / tot[:, None]
            overlap[:, j - 1] = (q * q).sum(axis=1)
            max_mass[:, j - 1] = q.max(axis=1)
    log_w = np.log(masses.sum(axis=1)) + log_off
    return EnvMCResult(
        log_w=log_w,
        seeds=seeds,
        overlap=overlap,
        max_mass=max_mass,
        truncation_deficit=system.row_deficit,
    )


@dataclass(frozen=True)
class FreeEnergyEstimate:
    p_hat: float
    ci_half_width: float
    se: float
    level: float
    n: int
    replicas: int
    concentration_envelope: float   # qualitative scale sqrt(log(2/alpha)/n)

    @property
    def ci(self) -> Tuple[float, float]:
        return (self.p_hat - self.ci_half_width, self.p_hat + self.ci_half_width)


def free_energy_mc(
    g: RootedGraph,
    law: DisorderLaw,
    x: VertexKey,
    beta: float,
    n: int,
    replicas: int,
    seed: int,
    level: float = 0.99,
    cap: int = DEFAULT_FRONT_CAP,
    ball_filter=None,
) -> FreeEnergyEstimate:
    """Estimate p_n = E[(1/n) log W_n] with an empirical CI.

    The concentration envelope is the scale at which the theory guarantees
    exponential concentration of log W_n / n; its constant is not known
    explicitly, so it is reported qualitatively alongside the empirical SE.
    """
    if replicas < 2:
        raise ValueError("replicas >= 2 required")
    if beta == 0.0:
        return FreeEnergyEstimate(0.0, 0.0, 0.0, level, n, replicas, 0.0)
    from scipy.stats import norm

    system = BallSystem(g, x, n, cap=cap, ball_filter=ball_filter)
    res = env_mc(system, law, beta, n, replicas, seed)
    vals = res.log_w / n
    p_hat = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(replicas))
    z = float(norm.ppf(0.5 + level / 2.0))
    alpha = 1.0 - level
    return FreeEnergyEstimate(
        p_hat, z * se, se, level, n, replicas, math.sqrt(math.log(2.0 / alpha) / n)
    )


# -- checkpointing ------------------------------------------------------------

_MAGIC = b"PLWF"
_VERSION = 1


def save_front(path, front: WeightFront, g: RootedGraph, sampler: FieldSampler) -> None:
    header = {
        "graph_hash": g.graph_hash(),
        "family": g.family,
        "env_seed": sampler.seed,
        "law": sampler.law.describe(),
        "beta": front.beta,
        "time0": front.time0,
        "steps": front.steps,
        "log_offset": front.log_offset,
        "origin": front.origin.to_bytes().hex(),
        "pruned_fraction": front.pruned_fraction,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    entries = sorted(
        ((k.to_bytes(), m) for k, m in front.masses.items()), key=lambda e: e[0]
    )
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack(">HI", _VERSION, len(blob)))
        fh.write(blob)
        fh.write(struct.pack(">Q", len(entries)))
        for kb, m in entries:
            fh.write(struct.pack(">H", len(kb)))
            fh.write(kb)
            fh.write(struct.pack(">d", m))


def load_front(path, g: RootedGraph) -> WeightFront:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a front checkpoint")
        version, blob_len = struct.unpack(">HI", fh.read(6))
        if version != _VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        header = json.loads(fh.read(blob_len).decode())
        if header["graph_hash"] != g.graph_hash():
            raise ValueError("checkpoint belongs to a different graph")
        (count,) = struct.unpack(">Q", fh.read(8))
        masses = {}
        for _ in range(count):
            (klen,) = struct.unpack(">H", fh.read(2))
            key = VertexKey.from_bytes(fh.read(klen))
            (m,) = struct.unpack(">d", fh.read(8))
            masses[key] = m
    return WeightFront(
        VertexKey.from_bytes(bytes.fromhex(header["origin"])),
        header["beta"],
        header["time0"],
        header["steps"],
        header["log_offset"],
        masses,
        dist=None,
        pruned_fraction=header.get("pruned_fraction", 0.0),
    )
