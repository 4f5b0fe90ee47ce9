"""Lambda-biased random walk on a quenched Galton-Watson tree.

Children counts are pure functions of (tree seed, vertex key), so the tree is
a fixed object per seed regardless of traversal order.  When the offspring
law allows extinction, construction redraws the seed until the root's subtree
reaches ``survival_depth`` (finite-horizon stand-in for conditioning on
survival; the accepted attempt index is recorded in the metadata).

From a vertex with c children the walk moves to the parent with probability
lambda/(lambda+c) and to each child with probability 1/(lambda+c); the root
moves to a uniform child.  lambda=0 is the branching-walk limit (never moves
to the parent; not irreducible).
"""

from __future__ import annotations

import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .. import _kernels
from ..disorder import spawn_seed
from ..errors import ExtinctTree, InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey

_SURVIVAL_RETRY_CAP = 200


class GWTree(RootedGraph):
    family = "gw_tree"

    def __init__(
        self,
        offspring: Dict[int, float],
        lam: float,
        graph_seed: int,
        survival_depth: Optional[int] = None,
    ):
        if lam < 0:
            raise ValueError("lambda >= 0 required")
        probs = {int(k): float(p) for k, p in offspring.items() if p > 0}
        if abs(sum(probs.values()) - 1.0) > 1e-12:
            raise ValueError("offspring law must sum to 1")
        m = sum(k * p for k, p in probs.items())
        if m <= 1.0:
            raise ValueError("supercritical offspring law required (m > 1)")
        if probs.get(0, 0.0) > 0 and survival_depth is None:
            raise ValueError("survival_depth required when p_0 > 0")

        self.lam = float(lam)
        self.offspring = probs
        ks = sorted(probs)
        self._ks = ks
        self._cum = np.cumsum([probs[k] for k in ks])
        self._tag = FAMILY_TAGS["gw_tree"]
        self.survival_depth = survival_depth
        self._child_memo: Dict[Tuple[int, ...], int] = {}

        attempt = 0
        seed = graph_seed
        if survival_depth is not None:
            while attempt < _SURVIVAL_RETRY_CAP:
                seed = graph_seed if attempt == 0 else spawn_seed(graph_seed, attempt)
                self._tree_seed = seed
                self._child_memo.clear()
                if self._survives(survival_depth):
                    break
                attempt += 1
            else:
                raise ExtinctTree(
                    f"no surviving draw in {_SURVIVAL_RETRY_CAP} attempts"
                )
        else:
            self._tree_seed = seed

        if lam == 0:
            regime = "branching_walk"
        elif m > lam:
            regime = "transient"
        elif m == lam:
            regime = "null_recurrent"
        else:
            regime = "positive_recurrent"
        super().__init__(
            VertexKey(self._tag, ()),
            meta={
                "offspring": {str(k): v for k, v in probs.items()},
                "lambda": lam,
                "mean_offspring": m,
                "graph_seed": graph_seed,
                "accepted_attempt": attempt,
                "survival_depth": survival_depth,
                "regime": regime,
                "positive_recurrent": m < lam,
            },
        )

    @property
    def safe_horizon(self):
        # survival conditioning is only exact up to the conditioning depth
        return self.survival_depth

    # -- quenched tree structure -------------------------------------------
    def n_children(self, v: VertexKey) -> int:
        c = self._child_memo.get(v.payload)
        if c is None:
            words = _kernels.omega_words(
                self._tree_seed, 0, np.array([v.digest], dtype=np.uint64)
            )
            # time index 0 is reserved for tree structure; environments use i >= 1
            u = float(_kernels.uniform_from_words(words)[0])
            idx = int(np.searchsorted(self._cum, u, side="right"))
            c = self._ks[min(idx, len(self._ks) - 1)]
            self._child_memo[v.payload] = c
        return c

    def _survives(self, depth: int) -> bool:
        root = VertexKey(self._tag, ())
        stack = [(root, 0)]
        while stack:
            v, d = stack.pop()
            if d >= depth:
                return True
            c = self.n_children(v)
            for j in range(c):
                stack.append((VertexKey(self._tag, v.payload + (j,)), d + 1))
        return False

    def _validate(self, v: VertexKey) -> None:
        if v.family_tag != self._tag:
            raise InvalidVertex("not a gw_tree key")
        parent = VertexKey(self._tag, v.payload[:-1]) if v.payload else None
        if parent is not None and not (0 <= v.payload[-1] < self.n_children(parent)):
            raise InvalidVertex("child index beyond sampled offspring count")
        # ancestors above the immediate parent were validated when their rows
        # were built; full-path validation would be quadratic in depth

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        self._validate(v)
        c = self.n_children(v)
        kids = [VertexKey(self._tag, v.payload + (j,)) for j in range(c)]
        if not v.payload:
            if c == 0:
                raise ExtinctTree("root has no children and no survival conditioning")
            return [(k, 1.0 / c) for k in kids]
        parent = VertexKey(self._tag, v.payload[:-1])
        denom = self.lam + c
        if denom == 0:
            raise InvalidVertex("absorbing leaf under lambda=0")
        out = []
        if self.lam > 0:
            out.append((parent, self.lam / denom))
        out += [(k, 1.0 / denom) for k in kids]
        return out

    def _pi(self, v: VertexKey) -> Optional[float]:
        if self.lam == 0:
            return None
        depth = len(v.payload)
        c = self.n_children(v)
        if depth == 0:
            return float(c)
        return self.lam ** (-(depth - 1)) + c * self.lam ** (-depth)
