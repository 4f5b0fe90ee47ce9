"""Acceptance suite: each test implements one criterion at its stated
tolerance and records a pass/fail line in the terminal summary."""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import record_criterion
from oracles import brute_force_log_w
from polymerlab.diagnostics import (
    canopy_level_chain,
    hitting_time_distribution,
    return_probabilities,
    spectral_dimension_fit,
    zd_return_log,
)
from polymerlab.disorder import FieldSampler, beta_for_lambda2, make_law, spawn_seed
from polymerlab.experiments.named import (
    percolation_pipes,
    pipes_log_divergence,
    t2z2_recurrent_L2,
)
from polymerlab.partition_dp import BallSystem, env_mc, free_energy_mc, log_partition
from polymerlab.replica import (
    chaos_identity_value,
    diagonal_collision_sum,
    khasminskii_sup,
    second_moment_exact,
)
from polymerlab.seriesfit import diagnose_convergence, linear_fit
from polymerlab.zoo import (
    ExplicitFinite,
    make_canopy,
    make_conductance_segment,
    make_double_exp_ray_tree,
    make_gw_tree,
    make_lattice,
    make_percolation_cluster,
    make_pipes_lattice,
    make_sierpinski_gasket,
    make_t2_times_z2,
)

GAUSS = make_law("gaussian")


@contextmanager
def criterion(number, description):
    t0 = time.time()
    ok = False
    try:
        yield
        ok = True
    finally:
        record_criterion(number, description, ok, time.time() - t0)


def zoo_for_brute_force():
    out = [
        (make_lattice(1), None),
        (make_lattice(2), None),
        (make_lattice(1, half=True), None),
        (make_percolation_cluster(2, 0.7, 8, graph_seed=1), None),
        (make_gw_tree({2: 1.0}, 1.0, graph_seed=3), None),
        (
            make_gw_tree(
                {0: 0.25, 1: 0.25, 2: 0.5}, 1.5, graph_seed=5, survival_depth=6
            ),
            None,
        ),
        (make_canopy(2, 1.5), "ray1"),
        (make_pipes_lattice(2), None),
        (make_double_exp_ray_tree(), None),
        (make_t2_times_z2(), None),
        (make_sierpinski_gasket(5), None),
        (make_conductance_segment(6, 2.0), None),
        (
            ExplicitFinite.srw_from_edges([(0, 1), (1, 2), (2, 0)], name="triangle"),
            None,
        ),
    ]
    resolved = []
    for g, tag in out:
        x = g.ray_vertex(1) if tag == "ray1" else g.root
        resolved.append((g, x))
    return resolved


def test_criterion_1_brute_force_equivalence():
    with criterion(1, "quenched W_n equals path enumeration (n<=4, 1e-12)"):
        for g, x in zoo_for_brute_force():
            s = FieldSampler(GAUSS, 101)
            for n in (1, 2, 3, 4):
                got = log_partition(g, s, x, n, 0.7)
                want = brute_force_log_w(g, s, x, n, 0.7)
                assert got == pytest.approx(want, abs=1e-12), (g.family, n)


def test_criterion_2_martingale_mean():
    cells = [
        (make_lattice(1), 0.5, 10),
        (make_lattice(1), 1.0, 16),
        (make_lattice(2), 0.6, 8),
        (make_lattice(1, half=True), 0.7, 10),
        (make_conductance_segment(10, 2.0), 0.8, 12),
        (make_conductance_segment(None, 2.0), 0.4, 10),
        (make_canopy(2, 1.5), 0.5, 10),
        (make_canopy(2, 1.5), 1.0, 8),
        (make_gw_tree({2: 1.0}, 1.0, graph_seed=3), 0.6, 8),
        (make_gw_tree({0: 0.25, 1: 0.25, 2: 0.5}, 1.5, graph_seed=5, survival_depth=12), 0.5, 8),
        (make_pipes_lattice(2), 0.5, 8),
        (make_sierpinski_gasket(5), 0.5, 8),
    ]
    with criterion(2, "MC mean of W_n is 1 within 3 SE on 12 cells (R=2000)"):
        assert len(cells) == 12
        for i, (g, beta, n) in enumerate(cells):
            system = BallSystem(g, g.root, n)
            res = env_mc(system, GAUSS, beta, n, replicas=2000, seed=1000 + i)
            w = np.exp(res.log_w)
            se = float(w.std(ddof=1) / math.sqrt(len(w)))
            assert abs(float(w.mean()) - 1.0) <= 3 * se, (g.family, beta, n)


def test_criterion_3_chaos_identity():
    graphs = [
        (make_lattice(1), None),
        (make_canopy(2, 1.5), None),
        (make_gw_tree({2: 1.0}, 1.0, graph_seed=3), None),
    ]
    with criterion(3, "chaos expansion identity to 1e-10 (n<=4)"):
        for g, _ in graphs:
            for n in (2, 3, 4):
                lhs = chaos_identity_value(g, GAUSS, g.root, 0.8, n)
                rhs = second_moment_exact(g, GAUSS, g.root, 0.8, n, method="pair")[n]
                assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs)), (g.family, n)


def test_criterion_4_two_oracle_second_moment():
    with criterion(4, "exact E[W_n^2] vs environment MC within 3 SE (n<=12, R=1e4)"):
        for g, x, beta, n in [
            (make_lattice(1), None, 0.6, 12),
            (make_canopy(2, 1.5), None, 0.6, 12),
        ]:
            x = x or g.root
            exact = second_moment_exact(g, GAUSS, x, beta, n)[n]
            system = BallSystem(g, x, n)
            res = env_mc(system, GAUSS, beta, n, replicas=10_000, seed=77)
            w2 = np.exp(2.0 * res.log_w)
            se = float(w2.std(ddof=1) / math.sqrt(len(w2)))
            assert abs(float(w2.mean()) - exact) <= 3 * se, g.family


def test_criterion_5_pipe_log_divergence():
    with criterion(5, "pipe collision sums fit c log L (slope>0, R^2>0.98)"):
        report, _, passed = pipes_log_divergence({})
        assert passed, report


def test_criterion_6_segment_hitting_bound():
    with criterion(6, "segment hitting bound: max_t P * gamma^l stable within 25%"):
        cs = []
        for ell in range(6, 13):
            g = make_conductance_segment(ell, 2.0)
            dist = hitting_time_distribution(g, g.vertex(ell), [g.vertex(0)], 600)
            cs.append(float(dist.max()) * 2.0 ** ell)
        cs = np.array(cs)
        assert (cs.max() - cs.min()) / cs.mean() < 0.25
        assert cs.max() < 8.0


def test_criterion_7_canopy_l2_surrogate():
    with criterion(7, "canopy Khas'minskii bounded+Cauchy (K=4000); E[W_n^2] Cauchy"):
        g = make_canopy(2, 1.5)
        rec = khasminskii_sup(g, [g.ray_vertex(l) for l in range(11)], 4000)
        assert rec.all_cauchy
        assert rec.max_sum < 10.0
        beta = beta_for_lambda2(GAUSS, 0.05)
        series = second_moment_exact(g, GAUSS, g.ray_vertex(0), beta, 150)
        diag = diagnose_convergence(np.diff(series), total=float(series[-1]))
        assert diag.converged, diag


def test_criterion_8_z1_very_strong_disorder():
    with criterion(8, "Z^1 free energy at beta=1: 99% CI excludes 0 (n=100, R=200)"):
        g = make_lattice(1)
        est = free_energy_mc(g, GAUSS, g.root, 1.0, 100, 200, seed=4, level=0.99)
        assert est.p_hat < 0.0
        assert est.ci[1] < 0.0


def test_criterion_9_z3_l2_window():
    with criterion(9, "Z^3: collision sums Cauchy; E[W_n^2] Cauchy at Lambda2=0.05"):
        g = make_lattice(3)
        rec = diagonal_collision_sum(g, g.root, 2000)
        assert rec.cauchy.converged, rec.cauchy
        beta = beta_for_lambda2(GAUSS, 0.05)
        series = second_moment_exact(g, GAUSS, g.root, beta, 40)
        diag = diagnose_convergence(np.diff(series), total=float(series[-1]))
        assert diag.converged, diag


def test_criterion_10_canopy_chain_reversibility():
    with criterion(10, "glued canopy chain identity (m/lambda)^w to 1e-10 (t<=200, w<=6)"):
        g = make_canopy(2, 1.5)
        chain = canopy_level_chain(g, chain_top=8, horizon=200)
        assert chain.reversibility_deviation(w_max=6) < 1e-10


def test_criterion_11_spectral_dimensions():
    with criterion(11, "spectral dimensions: Z^1, Z^2, gasket in their windows"):
        d1, _ = spectral_dimension_fit(np.exp(zd_return_log(1, 2 ** 12)))
        d2, _ = spectral_dimension_fit(np.exp(zd_return_log(2, 2 ** 12)))
        assert 0.95 <= d1 <= 1.05
        assert 1.9 <= d2 <= 2.1
        g = make_sierpinski_gasket(12)
        dg, _ = spectral_dimension_fit(return_probabilities(g, g.root, 2 ** 10))
        assert 1.26 <= dg <= 1.47


def test_criterion_12_percolation_pipe_fixture():
    with criterion(12, "percolation fixture pipe >= 8; collision sum beats Z^2"):
        report, _, passed = percolation_pipes({})
        assert passed, report
        assert report["pipe_length"] >= 8


def test_criterion_13_t2z2():
    with criterion(13, "T2 x Z2: recurrence monitor + bounded Cauchy Khas'minskii"):
        report, _, passed = t2z2_recurrent_L2({})
        assert passed, report


def test_criterion_14_primary_standalone():
    # primary suite must not import the secondary component
    import pathlib

    import polymerlab

    with criterion(14, "primary component has no dependency on the plot frontend"):
        root = pathlib.Path(polymerlab.__file__).parent
        for py in root.rglob("*.py"):
            text = py.read_text()
            assert "frontend" not in text, py
