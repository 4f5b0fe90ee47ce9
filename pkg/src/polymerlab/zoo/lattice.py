"""Simple random walk on Z^d and on the half-space Z_+^d."""

from __future__ import annotations

from typing import Sequence, Tuple

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class Lattice(RootedGraph):
    family = "lattice"

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d >= 1 required")
        self.d = d
        self._tag = FAMILY_TAGS["lattice"]
        super().__init__(VertexKey(self._tag, (0,) * d), meta={"d": d})

    def vertex(self, *coords: int) -> VertexKey:
        if len(coords) != self.d:
            raise InvalidVertex(f"expected {self.d} coordinates")
        return VertexKey(self._tag, tuple(coords))

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        if len(v.payload) != self.d:
            raise InvalidVertex("wrong payload length")
        p = 1.0 / (2 * self.d)
        out = []
        for axis in range(self.d):
            for step in (-1, 1):
                c = list(v.payload)
                c[axis] += step
                out.append((VertexKey(self._tag, tuple(c)), p))
        return out

    def _pi(self, v: VertexKey) -> float:
        return float(2 * self.d)


class HalfLattice(RootedGraph):
    """SRW on the subgraph induced on Z_+^d (uniform over in-range neighbors)."""

    family = "half_lattice"

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d >= 1 required")
        self.d = d
        self._tag = FAMILY_TAGS["half_lattice"]
        super().__init__(VertexKey(self._tag, (0,) * d), meta={"d": d})

    def vertex(self, *coords: int) -> VertexKey:
        if len(coords) != self.d or any(c < 0 for c in coords):
            raise InvalidVertex("coordinates must be non-negative")
        return VertexKey(self._tag, tuple(coords))

    def _neighbors(self, v: VertexKey):
        for axis in range(self.d):
            for step in (-1, 1):
                c = list(v.payload)
                c[axis] += step
                if c[axis] >= 0:
                    yield VertexKey(self._tag, tuple(c))

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        if len(v.payload) != self.d or any(c < 0 for c in v.payload):
            raise InvalidVertex("vertex outside half-space")
        nbrs = list(self._neighbors(v))
        p = 1.0 / len(nbrs)
        return [(w, p) for w in nbrs]

    def _pi(self, v: VertexKey) -> float:
        return float(len(list(self._neighbors(v))))
