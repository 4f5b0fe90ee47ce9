"""Scripted desk-scale experiments, one per phase-structure claim.

Each experiment runs a fixed scripted computation, writes a CSV + JSON
report, and asserts its acceptance predicate; the CLI exit code reflects the
predicate.  Thresholds marked "fixture" were frozen from oracle runs of this
implementation, not from the literature.
"""

from __future__ import annotations

import json
import math
import os
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..diagnostics import (
    hitting_time_distribution,
    return_probabilities,
    spectral_dimension_fit,
    zd_return_log,
)
from ..disorder import FieldSampler, beta_for_lambda2, make_law, spawn_seed
from ..errors import ConfigError
from ..keys import VertexKey
from ..partition_dp import free_energy_mc
from ..replica import (
    birkner_conditional,
    diagonal_collision_sum,
    khasminskii_sup,
    second_moment_exact,
)
from ..seriesfit import diagnose_convergence, linear_fit
from ..zoo import (
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

# Frozen percolation fixture: d=2, p=0.7, L=200; this draw contains a
# 13-site degree-2 run (pipe of length 15 including its endpoints).
PERCOLATION_FIXTURE_SEED = 16


def _report_rows(rows: List[dict]) -> List[dict]:
    from .runner import CSV_COLUMNS

    out = []
    for r in rows:
        base = {c: "" for c in CSV_COLUMNS}
        base.update(r)
        out.append(base)
    return out


# ---------------------------------------------------------------------------

def pipes_log_divergence(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """Collision sums at pipe centers grow like c log L across pipe lengths."""
    o = overrides or {}
    lengths = o.get("lengths", [64, 256, 1024])
    g = make_pipes_lattice(o.get("d", 2))
    rows = []
    sums = []
    for L in lengths:
        c = g.pipe_center(L)
        rec = diagonal_collision_sum(g, c, L // 2)
        s = float(rec.partial_sums[-1])
        sums.append(s)
        rows.append(
            dict(
                graph_family=g.family,
                statistic="pipe_collision_sum",
                n=L,
                k=L // 2,
                value=s,
            )
        )
    fit = linear_fit(np.log(lengths), sums)
    passed = fit.slope > 0 and fit.r2 > 0.98
    report = {
        "lengths": lengths,
        "partial_sums": sums,
        "slope": fit.slope,
        "r2": fit.r2,
        "predicate": "slope > 0 and r2 > 0.98",
    }
    return report, rows, passed


def percolation_pipes(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """On a frozen supercritical draw containing a long pipe, the pipe-center
    collision sum exceeds the free-lattice baseline at matched horizon."""
    o = overrides or {}
    seed = o.get("graph_seed", PERCOLATION_FIXTURE_SEED)
    K = o.get("K", 64)
    g = make_percolation_cluster(2, o.get("p", 0.7), o.get("box_side", 200), graph_seed=seed)
    margin = o.get("interior_margin", 10)
    lim = g.L - margin
    runs = [
        r for r in g.find_pipes(6)
        if all(max(abs(c) for c in site) <= lim for site in r)
    ]
    if not runs:
        return {"error": "fixture draw contains no interior pipe"}, [], False
    run = max(runs, key=len)
    center_site = run[len(run) // 2]
    center = g.vertex(*center_site)
    rec = diagonal_collision_sum(g, center, K)
    cluster_sum = float(rec.partial_sums[-1])
    z2 = np.exp(zd_return_log(2, K))
    baseline = float((z2 ** 2).sum())
    pipe_len = len(run) + 2
    passed = pipe_len >= 8 and cluster_sum > baseline
    rows = [
        dict(
            graph_family=g.family,
            graph_hash=g.graph_hash(),
            env_seed=seed,
            k=K,
            statistic="cluster_pipe_collision_sum",
            value=cluster_sum,
            extra=json.dumps({"pipe_length": pipe_len, "center": list(center_site)}),
        ),
        dict(graph_family="lattice", k=K, statistic="z2_baseline_collision_sum", value=baseline),
    ]
    report = {
        "graph_seed": seed,
        "pipe_length": pipe_len,
        "pipe_center": list(center_site),
        "cluster_density": g.meta["cluster_density"],
        "cluster_sum": cluster_sum,
        "z2_baseline": baseline,
        "K": K,
        "predicate": "pipe_length >= 8 and cluster_sum > z2_baseline",
    }
    return report, rows, passed


def canopy_L2(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """Khas'minskii sums along the canopy ray are uniformly bounded and
    Cauchy, and the second-moment series at small Lambda2 converges."""
    o = overrides or {}
    g = make_canopy(2, 1.5)
    K = o.get("K", 4000)
    levels = o.get("levels", list(range(11)))
    law = make_law("gaussian")
    beta = beta_for_lambda2(law, o.get("lambda2", 0.05))
    rec = khasminskii_sup(g, [g.ray_vertex(l) for l in levels], K)
    n2 = o.get("second_moment_n", 150)
    series = second_moment_exact(g, law, g.ray_vertex(0), beta, n2)
    diag = diagnose_convergence(np.diff(series), total=float(series[-1]))
    bound = o.get("khas_bound", 10.0)   # fixture constant from oracle runs
    passed = rec.all_cauchy and rec.max_sum < bound and diag.converged
    rows = [
        dict(
            graph_family=g.family,
            k=K,
            n=l,
            statistic="khasminskii_sum",
            value=float(s),
            extra=json.dumps({"cauchy": d.mode}),
        )
        for l, s, d in zip(levels, rec.truncated_sums, rec.diagnoses)
    ]
    rows += [
        dict(graph_family=g.family, beta=beta, k=k, statistic="second_moment", value=float(v))
        for k, v in enumerate(series)
    ]
    report = {
        "K": K,
        "khas_max": rec.max_sum,
        "khas_bound_fixture": bound,
        "khas_all_cauchy": rec.all_cauchy,
        "beta": beta,
        "lambda2": o.get("lambda2", 0.05),
        "second_moment_final": float(series[-1]),
        "second_moment_diagnosis": {"mode": diag.mode, **diag.detail},
        "predicate": "khas bounded+Cauchy and second-moment series converges",
    }
    return report, rows, passed


def segment_hitting(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """max_t P_l(tau_0 = t) * gamma^l stays within a tight band across l."""
    o = overrides or {}
    gamma = o.get("gamma", 2.0)
    ells = o.get("ells", list(range(6, 13)))
    horizon = o.get("horizon", 600)
    cs = []
    rows = []
    for ell in ells:
        g = make_conductance_segment(ell, gamma)
        dist = hitting_time_distribution(g, g.vertex(ell), [g.vertex(0)], horizon)
        c = float(dist.max()) * gamma ** ell
        cs.append(c)
        rows.append(
            dict(
                graph_family=g.family,
                n=ell,
                statistic="hitting_max_scaled",
                value=c,
                extra=json.dumps({"argmax_t": int(dist.argmax())}),
            )
        )
    cs_arr = np.array(cs)
    spread = float((cs_arr.max() - cs_arr.min()) / cs_arr.mean())
    passed = spread < 0.25 and cs_arr.max() < 8.0
    report = {
        "gamma": gamma,
        "ells": ells,
        "scaled_max": cs,
        "spread": spread,
        "predicate": "spread < 25% and fitted constant < 8",
    }
    return report, rows, passed


def gw_positive_recurrent_fractional(
    overrides: Optional[dict] = None,
) -> Tuple[dict, List[dict], bool]:
    """Positive-recurrent biased tree: free energy strictly negative at
    moderate beta, with decaying fractional moments."""
    o = overrides or {}
    g = make_gw_tree({2: 1.0}, o.get("lam", 4.0), graph_seed=o.get("graph_seed", 1))
    law = make_law("gaussian")
    beta = o.get("beta", 1.0)
    n = o.get("n", 60)
    replicas = o.get("replicas", 120)
    depth_cap = o.get("depth_cap", 14)
    ball_filter = lambda v: len(v.payload) <= depth_cap
    est = free_energy_mc(
        g, law, g.root, beta, n, replicas, o.get("env_seed", 11), ball_filter=ball_filter
    )
    # fractional moment decay at theta = 1/2 over an n-grid
    from ..partition_dp import BallSystem, env_mc

    theta = o.get("theta", 0.5)
    ns = o.get("ns", [20, 40, 60])
    logs = []
    for m in ns:
        system = BallSystem(g, g.root, m, ball_filter=ball_filter)
        r = env_mc(system, law, beta, m, replicas, o.get("env_seed", 11))
        logs.append(math.log(float(np.exp(theta * r.log_w).mean())))
    frac_fit = linear_fit(ns, logs)
    passed = est.ci[1] < 0.0 and frac_fit.slope < 0.0
    rows = [
        dict(
            graph_family=g.family,
            beta=beta,
            n=n,
            statistic="free_energy",
            value=est.p_hat,
            stderr=est.se,
            lo=est.ci[0],
            hi=est.ci[1],
        )
    ] + [
        dict(
            graph_family=g.family,
            beta=beta,
            n=m,
            statistic="fractional_moment_log",
            value=v,
            extra=json.dumps({"theta": theta}),
        )
        for m, v in zip(ns, logs)
    ]
    report = {
        "lambda": o.get("lam", 4.0),
        "beta": beta,
        "n": n,
        "replicas": replicas,
        "p_hat": est.p_hat,
        "ci": list(est.ci),
        "fractional_slope": frac_fit.slope,
        "depth_cap": depth_cap,
        "predicate": "99% CI excludes 0 from above and fractional slope < 0",
    }
    return report, rows, passed


def gw_transient_birkner(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """Conditional collision moments stabilize on the transient tree and
    blow up on the recurrent line."""
    o = overrides or {}
    g = make_gw_tree({2: 1.0}, o.get("lam", 1.0), graph_seed=o.get("graph_seed", 4))
    law = make_law("gaussian")
    beta = o.get("beta", beta_for_lambda2(law, 0.08))
    horizon = o.get("horizon", 400)
    n_traj = o.get("n_traj", 12)
    rec = birkner_conditional(g, law, g.root, beta, n_traj, horizon, o.get("seed", 3))
    z1 = make_lattice(1)
    rec_z1 = birkner_conditional(z1, law, z1.root, 0.5, 4, horizon, o.get("seed", 3))
    passed = rec.all_stabilized and not rec_z1.all_stabilized
    rows = [
        dict(
            graph_family=g.family,
            beta=beta,
            n=horizon,
            k=i,
            statistic="birkner_log_final",
            value=float(t.log_values[-1]),
            extra=json.dumps({"ratio": t.final_ratio, "stabilized": t.stabilized}),
        )
        for i, t in enumerate(rec.trajectories)
    ]
    report = {
        "beta": beta,
        "lambda2": rec.lambda2,
        "horizon": horizon,
        "tree_quantiles_log": rec.quantiles().tolist(),
        "tree_all_stabilized": rec.all_stabilized,
        "z1_all_stabilized": rec_z1.all_stabilized,
        "predicate": "tree trajectories stabilize, Z^1 trajectories do not",
    }
    return report, rows, passed


def counterexample_tree_WnA(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """Double-exponential ray tree: the ray-restricted partition function
    collapses while the never-return martingale keeps mean P(D) > 0.

    The two claims live at different desk-checkable parameter points.  The
    ray collapse holds for every beta > 0 and is computed exactly at a beta
    large enough to see the decay within the horizon.  The martingale-mean
    check is Monte Carlo over environments and paths, whose variance grows
    like exp(n Lambda2(beta)); it runs at a small beta where that scale
    stays order one.
    """
    o = overrides or {}
    g = make_double_exp_ray_tree()
    law = make_law("centered_uniform")   # bounded disorder, as the argument requires
    beta_ray = o.get("beta_ray", 0.8)
    n_ray = o.get("n_ray", 64)
    beta = o.get("beta", 0.25)
    n = o.get("n", 24)
    n_env = o.get("n_env", 50)
    n_paths = o.get("n_paths", 4000)
    seed = o.get("env_seed", 5)

    # escape probabilities from the conductance structure
    resist = np.array([math.exp(-math.exp(j)) for j in range(1, 60)])
    tail = resist[::-1].cumsum()[::-1]
    h_ray = lambda i: 0.0 if i == 0 else 1.0 - (tail[i] / tail[0] if i < len(tail) else 0.0)
    h_tree = lambda j: 1.0 - 0.5 ** j
    row_o = g.transition_row(g.root).as_dict()
    v_tree = g.tree_vertex(1)
    v_ray = g.ray_vertex(1)
    p_tree = row_o[v_tree] * h_tree(1)
    p_ray = row_o[v_ray] * h_ray(1)
    p_D = p_tree + p_ray
    p_ray_out = row_o[v_ray]
    q_return = 1.0 - h_ray(1)
    p_C = p_ray_out * (1 - q_return) / (1 - p_ray_out * q_return)

    lam = law.lambda_of(beta)
    lam_ray = law.lambda_of(beta_ray)
    checkpoints = sorted(set(o.get("ns", [n // 3, 2 * n // 3, n])))
    import random

    def conditioned_path(rng) -> List[VertexKey]:
        path = [g.root]
        u = rng.random() * p_D
        if u < p_tree:
            cur, depth, on_ray = v_tree, 1, False
        else:
            cur, depth, on_ray = v_ray, 1, True
        path.append(cur)
        for _ in range(n - 1):
            if on_ray:
                row = g.transition_row(cur).as_dict()
                nxt = g.ray_vertex(depth + 1)
                w_out = row.get(nxt, 0.0) * h_ray(depth + 1)
                w_in = (
                    row.get(g.ray_vertex(depth - 1), 0.0) * h_ray(depth - 1)
                    if depth > 1
                    else 0.0
                )
                if rng.random() * (w_out + w_in) < w_out:
                    cur, depth = nxt, depth + 1
                else:
                    cur, depth = g.ray_vertex(depth - 1), depth - 1
            else:
                bits = cur.payload[1:]
                kids = [g.tree_vertex(*bits, b) for b in (0, 1)]
                parent = g.root if depth == 1 else g.tree_vertex(*bits[:-1])
                w_par = (1.0 / 3.0) * h_tree(depth - 1) if depth > 1 else 0.0
                w_kid = (1.0 / 3.0) * h_tree(depth + 1)
                u = rng.random() * (w_par + 2 * w_kid)
                if u < w_par:
                    cur, depth = parent, depth - 1
                elif u < w_par + w_kid:
                    cur, depth = kids[0], depth + 1
                else:
                    cur, depth = kids[1], depth + 1
            path.append(cur)
        return path

    env_means = {m: [] for m in checkpoints}
    ray_w = {m: [] for m in o.get("ray_ns", [8, 16, 32, 64])}
    for r in range(n_env):
        sampler = FieldSampler(law, spawn_seed(seed, r))
        rng = random.Random(1000 + r)
        acc = {m: 0.0 for m in checkpoints}
        for _ in range(n_paths):
            path = conditioned_path(rng)
            h = 0.0
            for i in range(1, n + 1):
                h += sampler.omega(i, path[i])
                if i in acc:
                    # the h-transform path density already carries h(S_i),
                    # so P(D) * mean(e_i) estimates E[e_i 1_D] = W_i^{t,*}
                    acc[i] += math.exp(beta * h - i * lam)
        for m in checkpoints:
            env_means[m].append(p_D * acc[m] / n_paths)
        # exact ray-restricted partition function (sub-stochastic DP)
        masses = {g.root: 1.0}
        for i in range(1, max(ray_w) + 1):
            push: Dict[VertexKey, float] = {}
            for z, m_z in masses.items():
                row = g.transition_row(z).as_dict()
                for y, p in row.items():
                    if y == g.root or y.payload[0] == 0:
                        push[y] = push.get(y, 0.0) + m_z * p
            masses = {
                y: m_y * math.exp(beta_ray * sampler.omega(i, y) - lam_ray)
                for y, m_y in push.items()
            }
            if i in ray_w:
                ray_w[i].append(math.fsum(masses.values()))

    stats = {}
    ok = True
    for m in checkpoints:
        vals = np.array(env_means[m])
        se = float(vals.std(ddof=1) / math.sqrt(n_env))
        stats[m] = {"mean": float(vals.mean()), "se": se}
        ok = ok and abs(vals.mean() - p_D) <= 3 * se
    ray_medians = {m: float(np.median(v)) for m, v in ray_w.items()}
    ray_seq = [ray_medians[m] for m in sorted(ray_medians)]
    decay_ok = all(a > b for a, b in zip(ray_seq, ray_seq[1:])) and ray_seq[
        -1
    ] < o.get("ray_tol", 1e-3) * p_C
    passed = ok and decay_ok
    rows = [
        dict(graph_family=g.family, beta=beta, n=m, statistic="never_return_mc_mean",
             value=stats[m]["mean"], stderr=stats[m]["se"],
             extra=json.dumps({"p_D": p_D}))
        for m in checkpoints
    ] + [
        dict(graph_family=g.family, beta=beta_ray, n=m, statistic="ray_restricted_median",
             value=v, extra=json.dumps({"p_C": p_C}))
        for m, v in sorted(ray_medians.items())
    ]
    report = {
        "beta_martingale": beta,
        "beta_ray": beta_ray,
        "p_D": p_D,
        "p_C": p_C,
        "martingale_means": stats,
        "ray_restricted_medians": ray_medians,
        "predicate": "MC mean within 3 SE of P(D) at each n; "
        "ray medians decay below 1e-3 P(C)",
    }
    return report, rows, passed


def t2z2_recurrent_L2(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """Recurrence monitor on the lattice marginal plus bounded Cauchy
    collision sums over sampled vertices."""
    o = overrides or {}
    g = make_t2_times_z2()
    K = o.get("K", 2000)
    batches = o.get("batches", 5)
    paths_per_batch = o.get("paths_per_batch", 20)
    steps = o.get("steps", 10_000)
    rng = np.random.default_rng(o.get("monitor_seed", 123))
    # the lattice part of the kernel is exactly SRW on Z^2 (tested at kernel
    # level), so the monitor samples it directly
    returns_per_batch = []
    for b in range(batches):
        found = 0
        for _ in range(paths_per_batch):
            axis = rng.integers(0, 2, size=steps)
            step = rng.choice([-1, 1], size=steps)
            x = np.zeros((steps, 2), dtype=np.int64)
            moves = np.zeros((steps, 2), dtype=np.int64)
            moves[np.arange(steps), axis] = step
            x = moves.cumsum(axis=0)
            if np.any((x[:, 0] == 0) & (x[:, 1] == 0)):
                found += 1
        returns_per_batch.append(found)
    monitor_ok = all(f >= 1 for f in returns_per_batch)

    # sample vertices along kernel walks
    from ..graph_core import sample_walk

    verts = [g.root]
    for s in range(1, o.get("n_vertices", 20)):
        verts.append(sample_walk(g, g.root, 5 + 3 * (s % 5), seed=s)[-1])
    rec = khasminskii_sup(g, verts, K)
    bound = o.get("khas_bound", 5.0)   # fixture constant from oracle runs
    passed = monitor_ok and rec.all_cauchy and rec.max_sum < bound
    rows = [
        dict(graph_family=g.family, k=K, n=i, statistic="khasminskii_sum",
             value=float(s), extra=json.dumps({"cauchy": d.mode}))
        for i, (s, d) in enumerate(zip(rec.truncated_sums, rec.diagnoses))
    ]
    report = {
        "returns_per_batch": returns_per_batch,
        "khas_max": rec.max_sum,
        "khas_all_cauchy": rec.all_cauchy,
        "khas_bound_fixture": bound,
        "K": K,
        "predicate": "returns in every batch; khas bounded and Cauchy",
    }
    return report, rows, passed


def gasket_spectral(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """Spectral dimensions: Z^1, Z^2 and the gasket land in their windows."""
    o = overrides or {}
    K = o.get("K", 2 ** 12)
    d1, _ = spectral_dimension_fit(np.exp(zd_return_log(1, K)))
    d2, _ = spectral_dimension_fit(np.exp(zd_return_log(2, K)))
    g = make_sierpinski_gasket(o.get("levels", 12))
    probs = return_probabilities(g, g.root, o.get("gasket_K", 2 ** 10))
    dg, fit = spectral_dimension_fit(probs)
    passed = 0.95 <= d1 <= 1.05 and 1.9 <= d2 <= 2.1 and 1.26 <= dg <= 1.47
    rows = [
        dict(graph_family="lattice", n=1, statistic="spectral_dimension", value=d1),
        dict(graph_family="lattice", n=2, statistic="spectral_dimension", value=d2),
        dict(graph_family=g.family, statistic="spectral_dimension", value=dg,
             extra=json.dumps({"r2": fit.r2})),
    ] + [
        dict(graph_family=g.family, k=2 * n, statistic="return_prob",
             value=float(probs[2 * n]))
        for n in (4, 8, 16, 32, 64, 128, 256, 512)
    ]
    report = {
        "d_hat_z1": d1,
        "d_hat_z2": d2,
        "d_hat_gasket": dg,
        "gasket_true": 2 * math.log(3) / math.log(5),
        "predicate": "d1 in [0.95,1.05], d2 in [1.9,2.1], gasket in [1.26,1.47]",
    }
    return report, rows, passed


def free_energy_beta_power(overrides: Optional[dict] = None) -> Tuple[dict, List[dict], bool]:
    """Exploratory: free-energy decay exponent in beta on a d < 2 graph.

    The theory gives an asymptotic upper-bound shape -C beta^(4/(2-d)); a
    finite-n fit need not match it, so this experiment never gates.
    """
    o = overrides or {}
    g = make_sierpinski_gasket(o.get("levels", 9))
    law = make_law("gaussian")
    betas = o.get("betas", [0.5, 0.7, 1.0, 1.4])
    n = o.get("n", 128)
    replicas = o.get("replicas", 48)
    rows = []
    pts = []
    for b in betas:
        est = free_energy_mc(g, law, g.root, b, n, replicas, o.get("env_seed", 7))
        rows.append(
            dict(graph_family=g.family, beta=b, n=n, statistic="free_energy",
                 value=est.p_hat, stderr=est.se, lo=est.ci[0], hi=est.ci[1])
        )
        if est.p_hat < 0:
            pts.append((b, est.p_hat))
    fit = None
    if len(pts) >= 3:
        fit = linear_fit([math.log(b) for b, _ in pts], [math.log(-p) for _, p in pts])
    g_big = make_sierpinski_gasket(12)   # spectral fit needs a longer safe horizon
    d_probs = return_probabilities(g_big, g_big.root, 2 ** 10)
    d_hat, _ = spectral_dimension_fit(d_probs)
    report = {
        "betas": betas,
        "n": n,
        "fitted_exponent": None if fit is None else fit.slope,
        "fit_r2": None if fit is None else fit.r2,
        "theory_exponent": 4.0 / (2.0 - d_hat),
        "d_hat": d_hat,
        "gating": False,
        "note": "exploratory: finite-n fit vs asymptotic bound shape",
    }
    return report, rows, True


EXPERIMENTS: Dict[str, Callable] = {
    "pipes_log_divergence": pipes_log_divergence,
    "percolation_pipes": percolation_pipes,
    "canopy_L2": canopy_L2,
    "segment_hitting": segment_hitting,
    "gw_positive_recurrent_fractional": gw_positive_recurrent_fractional,
    "gw_transient_birkner": gw_transient_birkner,
    "counterexample_tree_WnA": counterexample_tree_WnA,
    "t2z2_recurrent_L2": t2z2_recurrent_L2,
    "gasket_spectral": gasket_spectral,
    "free_energy_beta_power": free_energy_beta_power,
}


def run_experiment(name: str, out_dir: Optional[str] = None, overrides: Optional[dict] = None):
    """Run a named experiment; writes report files when out_dir is given."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; have {sorted(EXPERIMENTS)}")
    report, rows, passed = EXPERIMENTS[name](overrides)
    if out_dir:
        import csv as _csv
        import time

        from .. import __version__
        from .runner import CSV_COLUMNS, REPORT_SCHEMA, json_default

        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{name}.csv")
        with open(csv_path, "w", newline="") as fh:
            writer = _csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for r in _report_rows(rows):
                writer.writerow(r)
        payload = {
            "schema": REPORT_SCHEMA,
            "kind": f"experiment:{name}",
            "version": __version__,
            "config": overrides or {},
            "verdicts": [report],
            "errors": [],
            "row_count": len(rows),
            "passed": bool(passed),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        with open(os.path.join(out_dir, f"{name}.json"), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=json_default)
            fh.write("\n")
    return report, passed
