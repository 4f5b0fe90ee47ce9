"""SRW on a finite Sierpinski pre-fractal, rooted at a corner.

Vertices live in skewed integer coordinates (x, y) with x, y >= 0 and
x + y <= 2^levels.  The level-0 cell at (a, b) is present iff a & b == 0
(Pascal-mod-2 rule); its corners are (a, b), (a+1, b), (a, b+1) and its three
edges are graph edges.  Corners of the big triangle have degree 2, all other
vertices degree 4.  Diagonal heat-kernel values from the root are unaffected
by the far boundary for horizons up to 2^(levels-2), the declared safe
horizon.
"""

from __future__ import annotations

from typing import Sequence, Tuple

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class SierpinskiGasket(RootedGraph):
    family = "sierpinski_gasket"

    def __init__(self, levels: int):
        if levels < 1:
            raise ValueError("levels >= 1 required")
        self.levels = levels
        self.side = 1 << levels
        self._tag = FAMILY_TAGS["sierpinski_gasket"]
        super().__init__(VertexKey(self._tag, (0, 0)), meta={"levels": levels})

    @property
    def safe_horizon(self) -> int:
        return max(1, self.side >> 2)

    def vertex(self, x: int, y: int) -> VertexKey:
        if not self._is_vertex(x, y):
            raise InvalidVertex(f"({x}, {y}) not a gasket vertex")
        return VertexKey(self._tag, (x, y))

    def _cell_ok(self, a: int, b: int) -> bool:
        return a >= 0 and b >= 0 and a + b <= self.side - 1 and (a & b) == 0

    def _is_vertex(self, x: int, y: int) -> bool:
        if x < 0 or y < 0 or x + y > self.side:
            return False
        return (
            self._cell_ok(x, y) or self._cell_ok(x - 1, y) or self._cell_ok(x, y - 1)
        )

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        x, y = v.payload
        if not self._is_vertex(x, y):
            raise InvalidVertex(f"({x}, {y}) not a gasket vertex")
        nbrs = set()
        if self._cell_ok(x, y):
            nbrs.update({(x + 1, y), (x, y + 1)})
        if self._cell_ok(x - 1, y):
            nbrs.update({(x - 1, y), (x - 1, y + 1)})
        if self._cell_ok(x, y - 1):
            nbrs.update({(x, y - 1), (x + 1, y - 1)})
        out = sorted(nbrs)
        p = 1.0 / len(out)
        return [(VertexKey(self._tag, w), p) for w in out]

    def _pi(self, v: VertexKey) -> float:
        return float(len(self._row(v)))
