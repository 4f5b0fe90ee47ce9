"""Independent oracles used to pin expected values.

Everything here is deliberately dumb: path enumeration, union-find,
closed-form binomials.  None of it shares code with the engines under test.
"""

from __future__ import annotations

import math
from typing import Dict, List, Tuple

from polymerlab.graph_core import RootedGraph
from polymerlab.keys import VertexKey


def all_paths(g: RootedGraph, x: VertexKey, n: int) -> List[Tuple[List[VertexKey], float]]:
    """Every length-n path from x with its probability, by DFS."""
    out = []

    def rec(path, prob):
        if len(path) == n + 1:
            out.append((list(path), prob))
            return
        row = g.transition_row(path[-1])
        for y, p in zip(row.vertices, row.probs.tolist()):
            path.append(y)
            rec(path, prob * p)
            path.pop()

    rec([x], 1.0)
    return out


def brute_force_log_w(g, sampler, x, n, beta) -> float:
    """log W_n(x) as an explicit sum over all paths."""
    lam = sampler.law.lambda_of(beta)
    total = 0.0
    for path, prob in all_paths(g, x, n):
        h = sum(sampler.omega(i, path[i]) for i in range(1, n + 1))
        total += prob * math.exp(beta * h - n * lam)
    return math.log(total)


def brute_force_point_masses(g, sampler, x, n, beta) -> Dict[VertexKey, float]:
    lam = sampler.law.lambda_of(beta)
    acc: Dict[VertexKey, float] = {}
    for path, prob in all_paths(g, x, n):
        h = sum(sampler.omega(i, path[i]) for i in range(1, n + 1))
        w = prob * math.exp(beta * h - n * lam)
        acc[path[-1]] = acc.get(path[-1], 0.0) + w
    return acc


def brute_force_second_moment(g, law, x, beta, n) -> float:
    """E[W_n^2] = E^(x2)[exp(Lambda2 * #collisions)] by path-pair enumeration."""
    l2 = law.lambda2_of(beta)
    paths = all_paths(g, x, n)
    total = 0.0
    for p1, q1 in paths:
        for p2, q2 in paths:
            hits = sum(1 for i in range(1, n + 1) if p1[i] == p2[i])
            total += q1 * q2 * math.exp(l2 * hits)
    return total


def brute_force_meeting_sum(g, x, k, n) -> float:
    """sum over time subsets of size k of P^(x2)(meet at those times)."""
    from itertools import combinations

    paths = all_paths(g, x, n)
    total = 0.0
    for times in combinations(range(1, n + 1), k):
        for p1, q1 in paths:
            for p2, q2 in paths:
                if all(p1[i] == p2[i] for i in times):
                    total += q1 * q2
    return total


class UnionFind:
    def __init__(self):
        self.parent = {}
        self.rank = {}

    def find(self, a):
        if a not in self.parent:
            self.parent[a] = a
            self.rank[a] = 0
            return a
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def percolation_largest_cluster_uf(graph) -> frozenset:
    """Largest component of the same frozen bond draw, via union-find."""
    import itertools

    from polymerlab.zoo.percolation import bond_is_open

    L, d, p, seed = graph.L, graph.d, graph.p, graph.graph_seed
    uf = UnionFind()
    rng = [range(-L, L + 1)] * d
    for site in itertools.product(*rng):
        uf.find(site)
        for axis in range(d):
            up = tuple(c + (1 if a == axis else 0) for a, c in enumerate(site))
            if all(-L <= c <= L for c in up) and bond_is_open(seed, site, axis, p):
                uf.union(site, up)
    comps: Dict[tuple, set] = {}
    for site in itertools.product(*rng):
        comps.setdefault(uf.find(site), set()).add(site)
    best = None
    for comp in comps.values():
        if (
            best is None
            or len(comp) > len(best)
            or (len(comp) == len(best) and min(comp) < min(best))
        ):
            best = comp
    return frozenset(best)


def z1_return_prob(k: int) -> float:
    """SRW on Z: P_0(S_k = 0), exact binomial."""
    if k % 2:
        return 0.0
    m = k // 2
    return math.comb(k, m) / 2.0 ** k


def z1_kernel(k: int, y: int) -> float:
    if (k + y) % 2 or abs(y) > k:
        return 0.0
    return math.comb(k, (k + y) // 2) / 2.0 ** k


def z2_return_prob(k: int) -> float:
    """SRW on Z^2: product of two independent diagonal SRWs."""
    return z1_return_prob(k) ** 2


def z2_kernel(k: int, x1: int, x2: int) -> float:
    return z1_kernel(k, x1 + x2) * z1_kernel(k, x1 - x2)
