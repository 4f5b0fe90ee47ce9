"""Binary tree with a double-exponential-conductance ray attached at the root.

Every tree edge has conductance 1; the i-th ray edge (between ray sites i-1
and i, counted from the root) has log-conductance e^i.  Conductances up to
e^(e^40) make linear-domain arithmetic impossible, so rows are normalized by
log-sum-exp over log-conductances, and the reversing measure is exposed in
the log domain only.
"""

from __future__ import annotations

import math
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class DoubleExpRayTree(RootedGraph):
    family = "double_exp_ray_tree"

    def __init__(self):
        self._tag = FAMILY_TAGS["double_exp_ray_tree"]
        super().__init__(VertexKey(self._tag, ()), meta={})

    def ray_vertex(self, i: int) -> VertexKey:
        if i < 1:
            raise InvalidVertex("ray sites are i >= 1")
        return VertexKey(self._tag, (0, i))

    def tree_vertex(self, *bits: int) -> VertexKey:
        if not bits:
            return self.root
        if any(b not in (0, 1) for b in bits):
            raise InvalidVertex("tree path must be binary")
        return VertexKey(self._tag, (1,) + tuple(bits))

    def _edges(self, v: VertexKey) -> List[Tuple[VertexKey, float]]:
        """(neighbor, log-conductance) pairs."""
        p = v.payload
        if p == ():
            return [
                (self.tree_vertex(0), 0.0),
                (self.tree_vertex(1), 0.0),
                (self.ray_vertex(1), math.e),
            ]
        if p[0] == 0:
            (_, i) = p
            if i < 1:
                raise InvalidVertex("bad ray site")
            out = [(self.root if i == 1 else self.ray_vertex(i - 1), math.exp(i))]
            out.append((self.ray_vertex(i + 1), math.exp(i + 1)))
            return out
        if p[0] == 1:
            bits = p[1:]
            if any(b not in (0, 1) for b in bits):
                raise InvalidVertex("bad tree path")
            parent = self.root if len(bits) == 1 else self.tree_vertex(*bits[:-1])
            return [
                (parent, 0.0),
                (self.tree_vertex(*bits, 0), 0.0),
                (self.tree_vertex(*bits, 1), 0.0),
            ]
        raise InvalidVertex("unknown discriminant")

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        edges = self._edges(v)
        logc = np.array([lc for _, lc in edges])
        m = logc.max()
        w = np.exp(logc - m)
        w /= w.sum()
        return [(nbr, float(p)) for (nbr, _), p in zip(edges, w) if p > 0.0]

    def log_reversing_measure(self, v: VertexKey) -> float:
        """log pi(v) = log sum of incident conductances (log-sum-exp)."""
        logc = np.array([lc for _, lc in self._edges(v)])
        m = float(logc.max())
        return m + math.log(np.exp(logc - m).sum())
