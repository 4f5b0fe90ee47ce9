"""Symmetry reduction of the canopy walk around a ray vertex.

The stabilizer of a ray vertex x0 at level l0 acts transitively on three
kinds of vertex classes:

* ``R(j)``: the ancestor ray vertex at level j >= l0 (size 1),
* ``A(w)``: descendants of x0 at depth w, 1 <= w <= l0 (size d^w),
* ``B(j, w)``: depth-w vertices hanging below a non-ray child of the
  ancestor R(j), j > l0, 1 <= w <= j (size (d-1) d^(w-1)).

The quotient chain on these classes reproduces all class-aggregated
functionals of the walk exactly: return probabilities, khas'minskii sums
sum_y p_t(x0,y)^2 = sum_c pbar_t(c)^2 / |c|, and per-level meeting masses
used by the two-replica renewal.  Because the walk's level drift is downward
for lambda < d, mass above ``level_cap`` is physically negligible; dropping
it makes the chain sub-stochastic and the lost mass is tracked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import WrongFamily
from .zoo.canopy import Canopy


@dataclass(frozen=True)
class QuotientState:
    kind: str   # "R" | "A" | "B"
    j: int      # attach level (R: own level; A: l0; B: ancestor level)
    w: int      # depth below attach (R: 0)
    level: int
    size: float


class CanopyQuotient:
    def __init__(self, g: Canopy, start_level: int, level_cap: int):
        if not isinstance(g, Canopy):
            raise WrongFamily("canopy quotient needs a Canopy graph")
        if level_cap <= start_level + 1:
            raise ValueError("level_cap must exceed start_level + 1")
        if level_cap > 900:
            raise ValueError("level_cap too large for linear-domain class sizes")
        d, l0 = g.d, start_level
        self.graph = g
        self.start_level = l0
        self.level_cap = level_cap

        states: List[QuotientState] = []
        index = {}

        def add(kind, j, w, level, size):
            index[(kind, j, w)] = len(states)
            states.append(QuotientState(kind, j, w, level, float(size)))

        for j in range(l0, level_cap + 1):
            add("R", j, 0, j, 1.0)
        for w in range(1, l0 + 1):
            add("A", l0, w, l0 - w, float(d) ** w)
        for j in range(l0 + 1, level_cap + 1):
            for w in range(1, j + 1):
                add("B", j, w, j - w, (d - 1) * float(d) ** (w - 1))

        self.states = states
        self.index = index
        self.sizes = np.array([s.size for s in states])
        self.levels = np.array([s.level for s in states], dtype=np.int64)
        self._build_kernel()

    def _build_kernel(self):
        from scipy.sparse import csr_matrix

        g, l0 = self.graph, self.start_level
        d, lam = float(g.d), g.lam
        up = lam / (lam + d)
        down_each = 1.0 / (lam + d)
        rows, cols, data = [], [], []

        def put(src, dst_key, p):
            j = self.index.get(dst_key)
            if j is not None:
                rows.append(self.index[src])
                cols.append(j)
                data.append(p)

        for st in self.states:
            src = (st.kind, st.j, st.w)
            if st.level == 0:
                # forced move to the parent class
                if st.kind == "R":  # only possible when l0 == 0
                    put(src, ("R", st.j + 1, 0), 1.0)
                elif st.kind == "A":
                    put(src, ("A", st.j, st.w - 1) if st.w > 1 else ("R", l0, 0), 1.0)
                else:
                    put(src, ("B", st.j, st.w - 1) if st.w > 1 else ("R", st.j, 0), 1.0)
                continue
            if st.kind == "R":
                put(src, ("R", st.j + 1, 0), up)
                if st.j > l0:
                    put(src, ("R", st.j - 1, 0), down_each)
                    put(src, ("B", st.j, 1), (d - 1) * down_each)
                else:
                    put(src, ("A", l0, 1), d * down_each)
            elif st.kind == "A":
                put(src, ("A", st.j, st.w - 1) if st.w > 1 else ("R", l0, 0), up)
                put(src, ("A", st.j, st.w + 1), d * down_each)
            else:
                put(src, ("B", st.j, st.w - 1) if st.w > 1 else ("R", st.j, 0), up)
                put(src, ("B", st.j, st.w + 1), d * down_each)

        n = len(self.states)
        self.kernel_t = csr_matrix((data, (cols, rows)), shape=(n, n))

    def start_index(self) -> int:
        return self.index[("R", self.start_level, 0)]

    def run(
        self,
        horizon: int,
        collect_self_overlap: bool = False,
        collect_meet_levels: Optional[int] = None,
        collect_states: Optional[List[Tuple[str, int, int]]] = None,
        collect_return: bool = False,
    ) -> dict:
        """Step the quotient chain, accumulating the requested aggregates."""
        n = len(self.states)
        mass = np.zeros(n)
        mass[self.start_index()] = 1.0
        out: dict = {"lost_mass": 0.0}
        if collect_self_overlap:
            out["self_overlap"] = np.zeros(horizon + 1)
            out["self_overlap"][0] = 1.0
        if collect_meet_levels is not None:
            out["meet_by_level"] = np.zeros((horizon + 1, collect_meet_levels + 1))
            out["meet_by_level"][0, self.start_level] = 1.0
        if collect_states is not None:
            idxs = [self.index[k] for k in collect_states]
            out["state_masses"] = np.zeros((horizon + 1, len(idxs)))
            out["state_masses"][0] = mass[idxs]
        if collect_return:
            out["return_prob"] = np.zeros(horizon + 1)
            out["return_prob"][0] = 1.0
        kt = self.kernel_t
        for t in range(1, horizon + 1):
            mass = kt @ mass
            if collect_self_overlap:
                out["self_overlap"][t] = float(((mass * mass) / self.sizes).sum())
            if collect_meet_levels is not None:
                contrib = (mass * mass) / self.sizes
                q = np.bincount(
                    np.minimum(self.levels, collect_meet_levels),
                    weights=contrib,
                    minlength=collect_meet_levels + 1,
                )
                out["meet_by_level"][t] = q
            if collect_states is not None:
                out["state_masses"][t] = mass[idxs]
            if collect_return:
                out["return_prob"][t] = mass[self.start_index()]
        out["lost_mass"] = max(0.0, 1.0 - float(mass.sum()))
        return out


def subtree_level_masses(
    g: Canopy, chain_top: int, start_depth: int, horizon: int, level_cap: Optional[int] = None
) -> np.ndarray:
    """Glued-chain kernel pbar^(l)_t(w, .) for the subtree below ray level l.

    Entry [t, w'] is the probability that the canopy walk started at a
    depth-``start_depth`` vertex of the glued subtree sits at glued depth w'
    at time t (mass outside the subtree is not recorded).
    """
    l = chain_top
    if not 0 <= start_depth <= l:
        raise ValueError("start_depth outside chain")
    cap = level_cap if level_cap is not None else l + horizon
    quot = CanopyQuotient(g, l - start_depth, cap)
    masses = np.zeros((horizon + 1, l + 1))
    idx_of_level: List[List[int]] = [[] for _ in range(l + 1)]
    for i, st in enumerate(quot.states):
        inside = (
            (st.kind in ("R", "A") and st.level <= l)
            or (st.kind == "B" and st.j <= l)
        )
        if inside and st.level <= l:
            idx_of_level[st.level].append(i)
    mass = np.zeros(len(quot.states))
    mass[quot.start_index()] = 1.0
    for lvl, idxs in enumerate(idx_of_level):
        masses[0, l - lvl] = mass[idxs].sum() if idxs else 0.0
    kt = quot.kernel_t
    for t in range(1, horizon + 1):
        mass = kt @ mass
        for lvl, idxs in enumerate(idx_of_level):
            masses[t, l - lvl] = mass[idxs].sum() if idxs else 0.0
    return masses
