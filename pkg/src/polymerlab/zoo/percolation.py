"""SRW on the largest cluster of Bernoulli bond percolation in a finite box.

Bond states are pure functions of (graph_seed, bond id), so the draw is
frozen and reproducible; the largest connected cluster of the box [-L, L]^d
(free boundary) stands in for the infinite cluster.  Walks should stay within
distance ~L/2 of the root so the boundary is never felt; ``safe_horizon``
encodes that rule.
"""

from __future__ import annotations

import itertools
from typing import Dict, FrozenSet, Sequence, Tuple

import numpy as np

from .. import _kernels
from ..errors import EmptyCluster, InvalidVertex
from ..graph_core import RootedGraph
from ..keys import FAMILY_TAGS, VertexKey, encode_varint, fnv1a64, zigzag

# Percolation thresholds used only to warn on dubious parameter choices.
_PC_ESTIMATE = {2: 0.5, 3: 0.2488}


def bond_id_bytes(x: Tuple[int, ...], axis: int) -> bytes:
    """Frozen byte id of the bond from x to x + e_axis."""
    parts = [encode_varint(zigzag(c)) for c in x] + [encode_varint(axis)]
    return b"\xb0" + b"".join(parts)


def bond_is_open(graph_seed: int, x: Tuple[int, ...], axis: int, p: float) -> bool:
    digest = np.array([fnv1a64(bond_id_bytes(x, axis))], dtype=np.uint64)
    u = float(_kernels.uniform_from_words(_kernels.omega_words(graph_seed, 0, digest))[0])
    return u < p


def _bond_grids(graph_seed: int, d: int, L: int, p: float):
    """All bond states of the box, batched: grids[axis][x + L] for x -> x+e."""
    import itertools

    side = 2 * L + 1
    grids = []
    for axis in range(d):
        shape = tuple(side - 1 if a == axis else side for a in range(d))
        digests = np.empty(int(np.prod(shape)), dtype=np.uint64)
        i = 0
        for x in itertools.product(
            *(range(-L, L) if a == axis else range(-L, L + 1) for a in range(d))
        ):
            digests[i] = fnv1a64(bond_id_bytes(x, axis))
            i += 1
        u = _kernels.uniform_from_words(_kernels.omega_words(graph_seed, 0, digests))
        grids.append((u < p).reshape(shape))
    return grids


class PercolationCluster(RootedGraph):
    family = "percolation"

    def __init__(
        self,
        d: int,
        p: float,
        box_side: int,
        graph_seed: int,
        min_cluster: int = 10,
        pc_margin: float = 0.0,
    ):
        if d < 2:
            raise ValueError("d >= 2 required")
        if not 0.0 < p <= 1.0:
            raise ValueError("p in (0, 1] required")
        L = int(box_side)
        if (2 * L + 1) ** d > 25_000_000:
            raise ValueError("box too large")
        self.d = d
        self.p = float(p)
        self.L = L
        self.graph_seed = graph_seed
        self._tag = FAMILY_TAGS["percolation"]

        warning = None
        pc = _PC_ESTIMATE.get(d)
        if pc is not None and p <= pc + pc_margin:
            warning = f"p={p} at or below p_c estimate {pc} (+margin {pc_margin})"

        self._bonds = _bond_grids(graph_seed, d, L, p)
        cluster = self._largest_cluster()
        if len(cluster) < min_cluster:
            raise EmptyCluster(f"largest cluster has {len(cluster)} < {min_cluster} sites")
        self.cluster: FrozenSet[Tuple[int, ...]] = frozenset(cluster)
        root_site = min(cluster, key=lambda x: (sum(c * c for c in x), x))
        density = len(cluster) / float((2 * L + 1) ** d)
        super().__init__(
            VertexKey(self._tag, root_site),
            meta={
                "d": d,
                "p": p,
                "box_side": L,
                "graph_seed": graph_seed,
                "cluster_size": len(cluster),
                "cluster_density": density,
                "warning": warning,
            },
        )

    # -- frozen draw --------------------------------------------------------
    def _in_box(self, x: Tuple[int, ...]) -> bool:
        return all(-self.L <= c <= self.L for c in x)

    def open_neighbors(self, x: Tuple[int, ...]):
        L = self.L
        for axis in range(self.d):
            grid = self._bonds[axis]
            if x[axis] < L:
                idx = tuple(c + L for c in x)
                if grid[idx]:
                    yield tuple(
                        c + (1 if a == axis else 0) for a, c in enumerate(x)
                    )
            if x[axis] > -L:
                dn = tuple(c - (1 if a == axis else 0) for a, c in enumerate(x))
                if grid[tuple(c + L for c in dn)]:
                    yield dn

    def _largest_cluster(self) -> set:
        seen: Dict[Tuple[int, ...], bool] = {}
        best: set = set()
        rng = [range(-self.L, self.L + 1)] * self.d
        for site in itertools.product(*rng):
            if site in seen:
                continue
            comp = {site}
            seen[site] = True
            stack = [site]
            while stack:
                v = stack.pop()
                for w in self.open_neighbors(v):
                    if w not in seen:
                        seen[w] = True
                        comp.add(w)
                        stack.append(w)
            if len(comp) > len(best) or (
                len(comp) == len(best) and min(comp) < min(best)
            ):
                best = comp
        return best

    # -- graph interface ----------------------------------------------------
    @property
    def safe_horizon(self) -> int:
        return self.L // 2

    def vertex(self, *coords: int) -> VertexKey:
        site = tuple(coords)
        if site not in self.cluster:
            raise InvalidVertex(f"{site} not in retained cluster")
        return VertexKey(self._tag, site)

    def _row(self, v: VertexKey) -> Sequence[Tuple[VertexKey, float]]:
        site = v.payload
        if site not in self.cluster:
            raise InvalidVertex(f"{site} not in retained cluster")
        nbrs = list(self.open_neighbors(site))
        p = 1.0 / len(nbrs)
        return [(VertexKey(self._tag, w), p) for w in nbrs]

    def _pi(self, v: VertexKey) -> float:
        return float(len(list(self.open_neighbors(v.payload))))

    def cluster_degree(self, site: Tuple[int, ...]) -> int:
        return len(list(self.open_neighbors(site)))

    def find_pipes(self, min_run: int) -> list:
        """Ordered maximal runs of degree-2 cluster sites with >= min_run sites.

        A run of r degree-2 sites is the interior of a pipe of length r + 2
        (its attachment endpoints may have any degree).  Cyclic degree-2
        components are skipped.
        """
        deg2 = {s for s in self.cluster if self.cluster_degree(s) == 2}
        adj = {s: [w for w in self.open_neighbors(s) if w in deg2] for s in deg2}
        unvisited = set(deg2)
        runs = []
        while unvisited:
            s = unvisited.pop()
            comp = {s}
            stack = [s]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if w in unvisited:
                        unvisited.remove(w)
                        comp.add(w)
                        stack.append(w)
            ends = [v for v in comp if sum(1 for w in adj[v] if w in comp) <= 1]
            if not ends:
                continue  # cycle
            start = min(ends)
            order = [start]
            prev = None
            cur = start
            while True:
                nxt = [w for w in adj[cur] if w in comp and w != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                order.append(cur)
            if len(order) >= min_run:
                runs.append(order)
        return runs
