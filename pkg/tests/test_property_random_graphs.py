"""Property tests: the exact engines against brute-force enumeration on
randomly generated finite chains."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_log_w, brute_force_second_moment
from polymerlab.disorder import FieldSampler, make_law
from polymerlab.graph_core import reachable_front, sample_walk
from polymerlab.partition_dp import evolve_front, log_partition, make_front
from polymerlab.replica import second_moment_pair
from polymerlab.zoo import ExplicitFinite

GAUSS = make_law("gaussian")


@st.composite
def random_chain(draw):
    """A small irreducible-ish row-stochastic kernel with sparse support."""
    n = draw(st.integers(min_value=2, max_value=6))
    rows = {}
    for i in range(n):
        others = list(range(n))
        k = draw(st.integers(min_value=1, max_value=min(3, n)))
        support = sorted(set(draw(
            st.lists(st.sampled_from(others), min_size=k, max_size=k)
        )) | {(i + 1) % n})   # a cycle keeps every state reachable
        weights = [draw(st.integers(min_value=1, max_value=9)) for _ in support]
        total = sum(weights)
        rows[i] = [(j, w / total) for j, w in zip(support, weights)]
    return ExplicitFinite(rows, root=0, name="random_chain")


@settings(max_examples=25, deadline=None)
@given(random_chain(), st.integers(min_value=1, max_value=4),
       st.floats(min_value=0.0, max_value=1.5), st.integers(min_value=0, max_value=10 ** 6))
def test_front_dp_equals_path_enumeration(g, n, beta, seed):
    s = FieldSampler(GAUSS, seed)
    got = log_partition(g, s, g.root, n, beta)
    want = brute_force_log_w(g, s, g.root, n, beta)
    assert got == pytest.approx(want, abs=1e-11)


@settings(max_examples=20, deadline=None)
@given(random_chain(), st.integers(min_value=1, max_value=3),
       st.floats(min_value=0.0, max_value=1.2))
def test_pair_dp_equals_pair_enumeration(g, n, beta):
    got = second_moment_pair(g, GAUSS, g.root, beta, n)[n]
    want = brute_force_second_moment(g, GAUSS, g.root, beta, n)
    assert got == pytest.approx(want, rel=1e-11)


@settings(max_examples=25, deadline=None)
@given(random_chain(), st.integers(min_value=0, max_value=4))
def test_reachable_front_recursion(g, n):
    fn = reachable_front(g, g.root, n)
    union = set()
    for v in fn:
        union.update(g.transition_row(v).vertices)
    assert union == reachable_front(g, g.root, n + 1)


@settings(max_examples=15, deadline=None)
@given(random_chain(), st.integers(min_value=0, max_value=20),
       st.integers(min_value=0, max_value=2 ** 32))
def test_walk_stays_on_support(g, n, seed):
    path = sample_walk(g, g.root, n, seed)
    assert len(path) == n + 1
    for a, b in zip(path, path[1:]):
        assert b in g.transition_row(a).vertices


@settings(max_examples=15, deadline=None)
@given(random_chain(), st.floats(min_value=0.1, max_value=1.5),
       st.integers(min_value=0, max_value=10 ** 6))
def test_martingale_increment_mean(g, beta, seed):
    # E over the environment of the one-step ratio is 1 by construction;
    # check the exact one-step front against the direct formula
    s = FieldSampler(GAUSS, seed)
    lam = GAUSS.lambda_of(beta)
    f1 = evolve_front(g, make_front(g, g.root, beta), s, 1)
    row = g.transition_row(g.root)
    direct = math.fsum(
        p * math.exp(beta * s.omega(1, y) - lam) for y, p in row.items()
    )
    assert math.exp(f1.total_log()) == pytest.approx(direct, rel=1e-12)
