"""Z^d with a pipe of length k glued at (k, 0, ..., 0) for every k >= 1.

Pipe sites are keyed (1, k, j) with j = 1..k counted from the lattice
attachment; lattice sites are keyed (0, x_1..x_d).  Interior pipe sites have
degree 2, the free end degree 1, and the attachment site degree 2d + 1.
"""

from __future__ import annotations

from typing import Sequence, Tuple

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class PipesLattice(RootedGraph):
    family = "pipes_lattice"

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d >= 1 required")
        self.d = d
        self._tag = FAMILY_TAGS["pipes_lattice"]
        super().__init__(
            VertexKey(self._tag, (0,) + (0,) * d),
            # d >= 4: the free walk avoids the marked line forever w.p. > 0
            meta={"d": d, "line_avoidance_regime": d >= 4},
        )

    def lattice_vertex(self, *coords: int) -> VertexKey:
        if len(coords) != self.d:
            raise InvalidVertex(f"expected {self.d} coordinates")
        return VertexKey(self._tag, (0,) + tuple(coords))

    def pipe_vertex(self, k: int, j: int) -> VertexKey:
        if k < 1 or not 1 <= j <= k:
            raise InvalidVertex("pipe site (k, j) needs k >= 1, 1 <= j <= k")
        return VertexKey(self._tag, (1, k, j))

    def pipe_center(self, k: int) -> VertexKey:
        return self.pipe_vertex(k, (k + 1) // 2)

    def _attachment(self, k: int) -> VertexKey:
        return VertexKey(self._tag, (0, k) + (0,) * (self.d - 1))

    def _neighbors(self, v: VertexKey):
        kind = v.payload[0]
        if kind == 0:
            x = v.payload[1:]
            if len(x) != self.d:
                raise InvalidVertex("bad lattice payload")
            for axis in range(self.d):
                for step in (-1, 1):
                    c = list(x)
                    c[axis] += step
                    yield VertexKey(self._tag, (0,) + tuple(c))
            if x[0] >= 1 and all(c == 0 for c in x[1:]):
                yield self.pipe_vertex(x[0], 1)
        elif kind == 1:
            _, k, j = v.payload
            if k < 1 or not 1 <= j <= k:
                raise InvalidVertex("bad pipe payload")
            yield self._attachment(k) if j == 1 else self.pipe_vertex(k, j - 1)
            if j < k:
                yield self.pipe_vertex(k, j + 1)
        else:
            raise InvalidVertex("unknown pipes_lattice discriminant")

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        nbrs = list(self._neighbors(v))
        p = 1.0 / len(nbrs)
        return [(w, p) for w in nbrs]

    def _pi(self, v: VertexKey) -> float:
        return float(len(list(self._neighbors(v))))
