"""The canopy tree with a lambda-biased walk.

Level-0 vertices form the boundary; every pack of d level-l vertices shares a
parent at level l+1.  A distinguished infinite ray R_0, R_1, ... (R_l at
level l, R_l the 0th child of R_{l+1}) anchors the vertex keys:

    key payload = (a, c_1, ..., c_w)

is the vertex reached from ray vertex R_a by descending child indices
c_1..c_w (so its level is a - w).  Canonical form requires w <= a and, for
w >= 1, c_1 >= 1 (descending via child 0 would re-enter the ray lower down).
Ray vertices are (a,).

Kernel: at level 0 the walk moves to the parent with probability 1; at level
l > 0 it moves to the parent with probability lambda/(lambda+d) and to each of
the d children with probability 1/(lambda+d).  Equivalently a conductance
model with conductance lambda^l on level-(l, l+1) edges, which yields the
reversing measure used for detailed-balance checks.
"""

from __future__ import annotations

from typing import Sequence, Tuple

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class Canopy(RootedGraph):
    family = "canopy"

    def __init__(self, d: int, lam: float):
        if d < 2:
            raise ValueError("d >= 2 required")
        if lam <= 0:
            raise ValueError("lambda > 0 required")
        self.d = d
        self.lam = float(lam)
        self._tag = FAMILY_TAGS["canopy"]
        regime = "transient" if lam > 1 else ("null_recurrent" if lam == 1 else "recurrent")
        super().__init__(
            VertexKey(self._tag, (0,)),
            meta={"d": d, "lambda": lam, "regime": regime},
        )

    # -- key helpers -------------------------------------------------------
    def ray_vertex(self, level: int) -> VertexKey:
        if level < 0:
            raise InvalidVertex("level >= 0 required")
        return VertexKey(self._tag, (level,))

    def _split(self, v: VertexKey) -> Tuple[int, Tuple[int, ...]]:
        if not v.payload:
            raise InvalidVertex("empty canopy payload")
        a, path = v.payload[0], v.payload[1:]
        if a < 0 or len(path) > a:
            raise InvalidVertex("canopy key outside tree")
        if path and not (1 <= path[0] < self.d):
            raise InvalidVertex("non-canonical canopy key")
        if any(not 0 <= c < self.d for c in path[1:]):
            raise InvalidVertex("child index out of range")
        return a, path

    def level(self, v: VertexKey) -> int:
        a, path = self._split(v)
        return a - len(path)

    def parent(self, v: VertexKey) -> VertexKey:
        a, path = self._split(v)
        if path:
            return VertexKey(self._tag, (a,) + path[:-1])
        return VertexKey(self._tag, (a + 1,))

    def children(self, v: VertexKey) -> Tuple[VertexKey, ...]:
        a, path = self._split(v)
        if a == len(path):
            raise InvalidVertex("level-0 vertex has no children")
        if path:
            return tuple(
                VertexKey(self._tag, (a,) + path + (j,)) for j in range(self.d)
            )
        # ray vertex: child 0 is the ray below, others open hanging subtrees
        out = [VertexKey(self._tag, (a - 1,))]
        out += [VertexKey(self._tag, (a, j)) for j in range(1, self.d)]
        return tuple(out)

    # -- kernel -------------------------------------------------------------
    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        lvl = self.level(v)
        if lvl == 0:
            return [(self.parent(v), 1.0)]
        denom = self.lam + self.d
        out = [(self.parent(v), self.lam / denom)]
        out += [(c, 1.0 / denom) for c in self.children(v)]
        return out

    def _pi(self, v: VertexKey) -> float:
        lvl = self.level(v)
        if lvl == 0:
            return 1.0
        return self.lam ** (lvl - 1) * (self.lam + self.d)
