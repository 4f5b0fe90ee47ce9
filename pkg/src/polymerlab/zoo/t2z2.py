"""Tree-times-lattice walk: X is SRW on Z^2, T descends the binary tree.

State (v, x): each step moves X to a uniform lattice neighbor y; if y = 0 the
tree coordinate resets to the tree root, otherwise it descends to a uniform
child of v.  The X-marginal is exactly SRW on Z^2, so the chain is recurrent,
while the tree coordinate makes collisions of two copies rare.  The kernel is
not reversible; no reversing measure is declared.
"""

from __future__ import annotations

from typing import Sequence, Tuple

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class T2TimesZ2(RootedGraph):
    family = "t2_times_z2"

    def __init__(self):
        self._tag = FAMILY_TAGS["t2_times_z2"]
        super().__init__(self.vertex((), (0, 0)), meta={})

    def vertex(self, tree_path: Tuple[int, ...], x: Tuple[int, int]) -> VertexKey:
        if any(b not in (0, 1) for b in tree_path):
            raise InvalidVertex("tree path must be binary")
        if len(x) != 2:
            raise InvalidVertex("lattice part must be 2-dimensional")
        return VertexKey(self._tag, (len(tree_path),) + tuple(tree_path) + tuple(x))

    def split(self, v: VertexKey) -> Tuple[Tuple[int, ...], Tuple[int, int]]:
        p = v.payload
        if len(p) < 3:
            raise InvalidVertex("truncated t2_times_z2 payload")
        k = p[0]
        if k < 0 or len(p) != k + 3:
            raise InvalidVertex("inconsistent tree-path length")
        path = p[1 : 1 + k]
        if any(b not in (0, 1) for b in path):
            raise InvalidVertex("tree path must be binary")
        return path, (p[-2], p[-1])

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        path, (x1, x2) = self.split(v)
        out = []
        for y in ((x1 + 1, x2), (x1 - 1, x2), (x1, x2 + 1), (x1, x2 - 1)):
            if y == (0, 0):
                out.append((self.vertex((), y), 0.25))
            else:
                for child in (0, 1):
                    out.append((self.vertex(path + (child,), y), 0.125))
        return out
