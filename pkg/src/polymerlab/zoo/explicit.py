"""Small explicit finite graphs, for tests and fixtures."""

from __future__ import annotations

from typing import Dict, Optional, Sequence, Tuple

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class ExplicitFinite(RootedGraph):
    family = "explicit_finite"

    def __init__(
        self,
        rows: Dict[int, Sequence[Tuple[int, float]]],
        root: int = 0,
        pi: Optional[Dict[int, float]] = None,
        name: str = "explicit",
    ):
        self._tag = FAMILY_TAGS["explicit_finite"]
        self._rows = {int(i): [(int(j), float(p)) for j, p in row] for i, row in rows.items()}
        self._pi_map = dict(pi) if pi else None
        super().__init__(VertexKey(self._tag, (root,)), meta={"name": name, "n": len(rows)})

    @classmethod
    def srw_from_edges(cls, edges, root: int = 0, name: str = "explicit"):
        adj: Dict[int, list] = {}
        for a, b in edges:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        rows = {
            i: [(j, 1.0 / len(nbrs)) for j in nbrs] for i, nbrs in adj.items()
        }
        pi = {i: float(len(nbrs)) for i, nbrs in adj.items()}
        return cls(rows, root=root, pi=pi, name=name)

    def vertex(self, i: int) -> VertexKey:
        if i not in self._rows:
            raise InvalidVertex(f"unknown vertex {i}")
        return VertexKey(self._tag, (i,))

    def _row(self, v: VertexKey):
        (i,) = v.payload
        if i not in self._rows:
            raise InvalidVertex(f"unknown vertex {i}")
        return [(VertexKey(self._tag, (j,)), p) for j, p in self._rows[i]]

    def _pi(self, v: VertexKey):
        if self._pi_map is None:
            return None
        return self._pi_map[v.payload[0]]
