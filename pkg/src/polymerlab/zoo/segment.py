"""Birth-death chains from geometric conductances.

``ConductanceSegment(length, gamma)``: walk on {0, ..., length} with
conductance gamma^i on edge (i, i+1) and reflecting endpoints.  With
``length=None`` the chain extends to the full ray Z_+ (same interior rule),
which is the transient biased-ray variant used for Green-function checks.
"""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

from ..errors import InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey


class ConductanceSegment(RootedGraph):
    family = "conductance_segment"

    def __init__(self, length: Optional[int], gamma: float):
        if gamma <= 1.0:
            raise ValueError("gamma > 1 required")
        if length is not None and length < 1:
            raise ValueError("length >= 1 required")
        self.length = length
        self.gamma = float(gamma)
        self._tag = FAMILY_TAGS["conductance_segment"]
        super().__init__(
            VertexKey(self._tag, (0,)),
            meta={"length": length, "gamma": gamma, "transient": length is None},
        )

    def vertex(self, i: int) -> VertexKey:
        self._check(i)
        return VertexKey(self._tag, (i,))

    def _check(self, i: int) -> None:
        if i < 0 or (self.length is not None and i > self.length):
            raise InvalidVertex(f"site {i} outside segment")

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        (i,) = v.payload
        self._check(i)
        g = self.gamma
        if i == 0:
            return [(VertexKey(self._tag, (1,)), 1.0)]
        if self.length is not None and i == self.length:
            return [(VertexKey(self._tag, (i - 1,)), 1.0)]
        right = g / (1.0 + g)   # gamma^i / (gamma^(i-1) + gamma^i)
        return [
            (VertexKey(self._tag, (i - 1,)), 1.0 - right),
            (VertexKey(self._tag, (i + 1,)), right),
        ]

    def _pi(self, v: VertexKey) -> float:
        (i,) = v.payload
        g = self.gamma
        if i == 0:
            return 1.0
        if self.length is not None and i == self.length:
            return g ** (i - 1)
        return g ** (i - 1) + g ** i
