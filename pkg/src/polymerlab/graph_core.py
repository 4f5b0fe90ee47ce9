"""Lazily generated rooted graphs with a nearest-neighbor Markov kernel.

A graph family implements a single method, ``_row(v)``, returning the
positive transition probabilities out of ``v``.  Everything else (row
caching, normalization checks, fronts, walk sampling, detailed balance)
lives here.  Graphs are immutable after construction except for the row
memo table, which is a thread-safe idempotent cache.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import BudgetExceeded, InvalidVertex
from .keys import VertexKey

#: Hard default on the number of states an exact front may hold.
DEFAULT_FRONT_CAP = 5_000_000

#: Tolerance for row normalization (spec invariant).
ROW_NORM_TOL = 1e-12


@dataclass(frozen=True)
class TransitionRow:
    """One row P(x, .) of the kernel: parallel arrays over the support."""

    vertices: Tuple[VertexKey, ...]
    probs: np.ndarray       # float64, strictly positive, sums to 1
    log_probs: np.ndarray   # cached logs for log-domain DP

    def __post_init__(self):
        s = float(self.probs.sum())
        if abs(s - 1.0) > ROW_NORM_TOL:
            raise ValueError(f"row does not normalize: sum={s!r}")

    def __len__(self) -> int:
        return len(self.vertices)

    def items(self) -> Iterable[Tuple[VertexKey, float]]:
        return zip(self.vertices, self.probs.tolist())

    def as_dict(self) -> Dict[VertexKey, float]:
        return dict(self.items())


def make_row(pairs: Sequence[Tuple[VertexKey, float]]) -> TransitionRow:
    """Build a row from (vertex, prob) pairs, dropping zero entries."""
    kept = [(v, p) for v, p in pairs if p > 0.0]
    if not kept:
        raise ValueError("empty transition row")
    verts = tuple(v for v, _ in kept)
    probs = np.array([p for _, p in kept], dtype=np.float64)
    return TransitionRow(verts, probs, np.log(probs))


class RootedGraph:
    """Base class for all graph families.

    Subclasses set ``family`` and ``root``, implement ``_row`` and optionally
    ``_pi`` (reversing measure) and ``safe_horizon``.
    """

    family: str = "abstract"

    def __init__(self, root: VertexKey, meta: Optional[dict] = None):
        self.root = root
        self.meta = dict(meta or {})
        self._memo: Dict[VertexKey, TransitionRow] = {}
        self._memo_lock = threading.Lock()

    # -- interface to implement ------------------------------------------
    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        raise NotImplementedError

    def _pi(self, v: VertexKey) -> Optional[float]:
        """Reversing measure at v, or None when none is declared."""
        return None

    @property
    def safe_horizon(self) -> Optional[int]:
        """Max walk length the construction is valid for (None = unlimited)."""
        return None

    # -- public operations -------------------------------------------------
    def transition_row(self, v: VertexKey) -> TransitionRow:
        row = self._memo.get(v)
        if row is None:
            row = make_row(self._row(v))
            with self._memo_lock:
                self._memo.setdefault(v, row)
        return row

    def reversing_measure(self, v: VertexKey) -> Optional[float]:
        return self._pi(v)

    def degree(self, v: VertexKey) -> int:
        return len(self.transition_row(v))

    def neighbors(self, v: VertexKey) -> Tuple[VertexKey, ...]:
        return self.transition_row(v).vertices

    def graph_hash(self) -> str:
        """Stable short hash of (family, metadata); used as run provenance."""
        import hashlib
        import json

        blob = json.dumps(
            {"family": self.family, "meta": _jsonable(self.meta)},
            sort_keys=True,
            separators=(",", ":"),
        ).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    return repr(obj)


def reachable_front(
    g: RootedGraph, x: VertexKey, n: int, cap: int = DEFAULT_FRONT_CAP
) -> Set[VertexKey]:
    """Vertices reachable from x in exactly n steps with positive probability."""
    if n < 0:
        raise ValueError("n must be >= 0")
    front = {x}
    for _ in range(n):
        nxt: Set[VertexKey] = set()
        for v in front:
            nxt.update(g.transition_row(v).vertices)
            if len(nxt) > cap:
                raise BudgetExceeded(f"front exceeds cap {cap}")
        front = nxt
    return front


def sample_walk(g: RootedGraph, x: VertexKey, n: int, seed: int) -> List[VertexKey]:
    """Length-(n+1) path from x, fully determined by seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    horizon = g.safe_horizon
    if horizon is not None and n > horizon:
        from .errors import HorizonExceedsGraph

        raise HorizonExceedsGraph(f"walk length {n} exceeds safe horizon {horizon}")
    import random

    rng = random.Random(seed)
    path = [x]
    v = x
    for _ in range(n):
        row = g.transition_row(v)
        u = rng.random()
        acc = 0.0
        idx = len(row) - 1
        for j, p in enumerate(row.probs.tolist()):
            acc += p
            if u < acc:
                idx = j
                break
        v = row.vertices[idx]
        path.append(v)
    return path


def bfs_ball(
    g: RootedGraph, x: VertexKey, radius: int, cap: int = DEFAULT_FRONT_CAP
) -> Dict[VertexKey, int]:
    """Map vertex -> graph distance from x, for distance <= radius.

    Distance is with respect to the kernel support treated as a digraph,
    which coincides with graph distance on all undirected families.
    """
    dist = {x: 0}
    frontier = [x]
    for r in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for w in g.transition_row(v).vertices:
                if w not in dist:
                    dist[w] = r
                    nxt.append(w)
                    if len(dist) > cap:
                        raise BudgetExceeded(f"ball exceeds cap {cap}")
        frontier = nxt
        if not frontier:
            break
    return dist


def check_detailed_balance(
    g: RootedGraph, vertices: Iterable[VertexKey], rtol: float = 1e-10
) -> None:
    """Verify pi(x)P(x,y) = pi(y)P(y,x) on all edges out of the given vertices.

    Raises AssertionError on the first violated edge.  No-op when the family
    declares no reversing measure.
    """
    for x in vertices:
        pi_x = g.reversing_measure(x)
        if pi_x is None:
            return
        row = g.transition_row(x)
        for y, pxy in row.items():
            pi_y = g.reversing_measure(y)
            back = g.transition_row(y).as_dict().get(x, 0.0)
            lhs = pi_x * pxy
            rhs = pi_y * back
            if not math.isclose(lhs, rhs, rel_tol=rtol, abs_tol=1e-300):
                raise AssertionError(
                    f"detailed balance violated on ({x}, {y}): {lhs} vs {rhs}"
                )
