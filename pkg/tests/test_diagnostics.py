import math

import numpy as np
import pytest

from oracles import z1_kernel, z1_return_prob, z2_return_prob
from polymerlab.diagnostics import (
    canopy_level_chain,
    carne_varopoulos_check,
    green_truncated,
    heat_kernel,
    hitting_time_distribution,
    kernel_profile,
    return_probabilities,
    self_overlap_series,
    spectral_dimension_fit,
    volume_growth,
    z2_point_prob,
    zd_return_log,
)
from polymerlab.errors import InsufficientData
from polymerlab.zoo import (
    make_canopy,
    make_conductance_segment,
    make_gw_tree,
    make_lattice,
    make_pipes_lattice,
    make_sierpinski_gasket,
)

WATSON_G_Z3 = 1.516386059151978  # SRW on Z^3: G(0,0), literature constant


def test_z1_heat_kernel_binomial():
    g = make_lattice(1)
    for n in (3, 8, 15):
        kern = heat_kernel(g, g.root, n)
        for v, p in kern.items():
            assert p == pytest.approx(z1_kernel(n, v.payload[0]), abs=1e-14)


def test_z2_local_clt_constant():
    # p_{2n}(0,0) * (pi * n) -> 1
    probs = np.exp(zd_return_log(2, 2 ** 11 + 2))
    n = 2 ** 10
    assert probs[2 * n] * math.pi * n == pytest.approx(1.0, rel=0.05)


def test_zd_return_log_matches_dp_and_oracle():
    for d in (2, 3):
        g = make_lattice(d)
        fast = np.exp(zd_return_log(d, 8))
        kern = [heat_kernel(g, g.root, k).get(g.root, 0.0) for k in range(9)]
        assert np.allclose(fast, kern, atol=1e-14)
    assert np.allclose(
        np.exp(zd_return_log(2, 12))[::2],
        [z2_return_prob(k) for k in range(0, 13, 2)],
        atol=1e-14,
    )


def test_z2_point_prob_matches_dp():
    g = make_lattice(2)
    kern = heat_kernel(g, g.root, 7)
    for v, p in kern.items():
        assert z2_point_prob(7, tuple(v.payload)) == pytest.approx(p, abs=1e-14)


def test_canopy_return_fast_path_matches_generic_dp():
    g = make_canopy(2, 1.5)
    for lvl in (0, 2):
        x = g.ray_vertex(lvl)
        fast = return_probabilities(g, x, 10)
        kern = [heat_kernel(g, x, k).get(x, 0.0) for k in range(11)]
        assert np.allclose(fast, kern, atol=1e-13)


def test_canopy_level0_one_step():
    g = make_canopy(2, 1.5)
    x = g.ray_vertex(0)
    kern = heat_kernel(g, x, 1)
    assert kern == {g.ray_vertex(1): 1.0}


def test_green_z3_watson():
    g = make_lattice(3)
    est = green_truncated(g, g.root, 2000)
    assert not est.divergent
    assert est.estimate == pytest.approx(WATSON_G_Z3, abs=0.01)
    assert est.error < 0.01


def test_green_z1_divergent():
    g = make_lattice(1)
    est = green_truncated(g, g.root, 512)
    assert est.divergent and est.estimate is None


def test_green_biased_ray_closed_form():
    # escape analysis: G(0,0) = gamma / (gamma - 1) on the conductance ray
    g = make_conductance_segment(None, 2.0)
    est = green_truncated(g, g.vertex(0), 300)
    assert not est.divergent
    assert est.estimate == pytest.approx(2.0, abs=1e-3)


def test_hitting_time_segment_bound():
    # P_l(tau_0 = t) <= c gamma^-l, with c stable across l
    cs = []
    for ell in range(6, 13):
        g = make_conductance_segment(ell, 2.0)
        dist = hitting_time_distribution(g, g.vertex(ell), [g.vertex(0)], 600)
        cs.append(float(dist.max()) * 2.0 ** ell)
    cs = np.array(cs)
    assert cs.max() < 8.0
    assert (cs.max() - cs.min()) / cs.mean() < 0.25


def test_hitting_time_total_mass():
    g = make_conductance_segment(8, 2.0)
    T = 400
    res = hitting_time_distribution(g, g.vertex(8), [g.vertex(0)], T, with_survival=True)
    dist, survival = res
    assert dist[0] == 0.0
    assert dist.sum() <= 1.0 + 1e-12
    assert dist.sum() + survival == pytest.approx(1.0, abs=1e-12)


def test_hitting_time_first_return_convention():
    g = make_lattice(1)
    dist = hitting_time_distribution(g, g.root, [g.root], 10)
    assert dist[0] == 0.0
    assert dist[2] == pytest.approx(0.5, abs=1e-15)   # first return at time 2
    assert dist[4] == pytest.approx(0.125, abs=1e-15)


def test_volume_growth_z2():
    g = make_lattice(2)
    vg = volume_growth(g, g.root, 12)
    assert np.allclose(vg.sphere_measure, 4 * vg.radii)
    assert not vg.exponential_growth
    assert vg.fractal_dimension == pytest.approx(2.0, abs=0.15)


def test_volume_growth_binary_tree_exponential():
    g = make_gw_tree({2: 1.0}, 1.0, graph_seed=1)
    vg = volume_growth(g, g.root, 14)
    assert vg.exponential_growth
    assert vg.fractal_dimension is None


def test_volume_growth_gasket():
    g = make_sierpinski_gasket(6)
    vg = volume_growth(g, g.root, 60)
    assert 1.5 <= vg.fractal_dimension <= 1.7


def test_spectral_dimensions_z1_z2():
    d1, fit1 = spectral_dimension_fit(np.exp(zd_return_log(1, 2 ** 12)))
    assert 0.95 <= d1 <= 1.05
    d2, fit2 = spectral_dimension_fit(np.exp(zd_return_log(2, 2 ** 12)))
    assert 1.9 <= d2 <= 2.1


def test_spectral_dimension_needs_points():
    with pytest.raises(InsufficientData):
        spectral_dimension_fit(np.ones(17))


def test_gasket_spectral_dimension():
    g = make_sierpinski_gasket(12)
    probs = return_probabilities(g, g.root, 2 ** 10)
    d_hat, fit = spectral_dimension_fit(probs)
    assert 1.26 <= d_hat <= 1.47


def test_gasket_corner_two_step():
    g = make_sierpinski_gasket(4)
    assert return_probabilities(g, g.root, 2)[2] == pytest.approx(0.25, abs=1e-15)


def test_pipes_center_collision_budget():
    g = make_pipes_lattice(2)
    c = g.pipe_center(64)
    probs = return_probabilities(g, c, 32)
    for k in range(0, 33):
        assert probs[k] == pytest.approx(z1_return_prob(k), abs=1e-13)


def test_canopy_level_chain_identity():
    g = make_canopy(2, 1.5)
    chain = canopy_level_chain(g, chain_top=8, horizon=200)
    assert chain.reversibility_deviation(w_max=6) < 1e-10
    # w = 0 trivially exact
    assert np.allclose(chain.pbar[0, :, 0], chain.pbar[0, :, 0])


def test_canopy_level_chain_matches_full_tree_returns():
    g = make_canopy(2, 1.5)
    chain = canopy_level_chain(g, chain_top=5, horizon=40)
    ret = return_probabilities(g, g.ray_vertex(5), 40)
    assert np.allclose(chain.pbar[0, :, 0], ret, atol=1e-12)


def test_carne_varopoulos_monitor():
    for g in (make_lattice(2), make_canopy(2, 1.5), make_sierpinski_gasket(4)):
        assert carne_varopoulos_check(g, g.root, 12) <= 1.0


def test_kernel_profile_serializes():
    import json

    g = make_lattice(2)
    prof = kernel_profile(g, g.root, 2 ** 9, r_max=10)
    blob = json.dumps(prof.to_json())
    assert "spectral_dimension" in blob
    assert prof.green_partial[-1] >= prof.green_partial[0]


def test_self_overlap_z2_equals_return_at_2k():
    g = make_lattice(2)
    s = self_overlap_series(g, g.root, 6)
    probs = np.exp(zd_return_log(2, 12))
    assert np.allclose(s, probs[::2], atol=1e-14)


def test_heat_kernel_rows_sum_to_one():
    for g in (make_lattice(2), make_canopy(2, 1.5), make_pipes_lattice(2)):
        for n in (3, 7):
            kern = heat_kernel(g, g.root, n)
            assert sum(kern.values()) == pytest.approx(1.0, abs=1e-12)


def test_green_increments_equal_heat_kernel_diagonal():
    g = make_canopy(2, 1.5)
    probs = return_probabilities(g, g.ray_vertex(1), 12)
    for k in range(13):
        assert probs[k] == pytest.approx(
            heat_kernel(g, g.ray_vertex(1), k).get(g.ray_vertex(1), 0.0), abs=1e-12
        )
