"""Phase-diagram scans: per-(beta, n) cells with full provenance.

Each cell yields the free-energy estimate, endpoint-overlap statistics, and
optional fractional moments; per beta the exact second-moment series and the
truncated collision sum feed the phase classification.  Cells are
independent jobs over a thread pool (POLYMERLAB_WORKERS); aggregation is
order-independent because rows are sorted by cell index before emission.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .. import __version__
from ..disorder import make_law
from ..errors import PolymerLabError
from ..partition_dp import BallSystem, env_mc
from ..replica import diagonal_collision_sum, second_moment_exact
from ..seriesfit import diagnose_convergence, linear_fit
from .config import RunConfig

CSV_COLUMNS = [
    "graph_family",
    "graph_hash",
    "graph_params",
    "law",
    "env_seed",
    "beta",
    "n",
    "k",
    "statistic",
    "value",
    "stderr",
    "lo",
    "hi",
    "extra",
]

REPORT_SCHEMA = "polymerlab-report-v1"


def json_default(o):
    """Coerce numpy scalars/arrays for JSON emission."""
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


@dataclass
class ScanResult:
    config: RunConfig
    rows: List[dict] = field(default_factory=list)
    verdicts: List[dict] = field(default_factory=list)
    errors: List[dict] = field(default_factory=list)


def _commit_hash() -> str:
    import subprocess

    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        return out.stdout.strip() or "unknown"
    except Exception:
        return "unknown"


_COMMIT = None


def _row(cfg: RunConfig, g, **kw) -> dict:
    """Normalize a measurement row; every row carries seeds, budgets and the
    code revision in its provenance."""
    global _COMMIT
    if _COMMIT is None:
        _COMMIT = _commit_hash()
    base = {
        "graph_family": g.family,
        "graph_hash": g.graph_hash(),
        "graph_params": json.dumps(cfg.graph.describe(), sort_keys=True),
        "law": cfg.law_kind,
        "env_seed": cfg.env_seed,
        "beta": "",
        "n": "",
        "k": "",
        "statistic": "",
        "value": "",
        "stderr": "",
        "lo": "",
        "hi": "",
        "extra": "",
    }
    base.update(kw)
    prov = {"budgets": dict(cfg.budgets), "commit": _COMMIT}
    if base["extra"]:
        prov.update(json.loads(base["extra"]))
    base["extra"] = json.dumps(prov, sort_keys=True)
    return base


def _cell_job(cfg: RunConfig, g, law, beta: float, n: int):
    """One (beta, n) cell: free energy + endpoint statistics (+ thetas)."""
    from scipy.stats import norm

    rows = []
    system = BallSystem(g, g.root, n, cap=cfg.budgets["front_cap"])
    res = env_mc(
        system, law, beta, n, cfg.replicas, cfg.env_seed, collect_endpoint=True
    )
    vals = res.log_w / n
    if beta == 0.0:   # W_n is identically 1; suppress float residue
        p_hat, se = 0.0, 0.0
    else:
        p_hat = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(cfg.replicas))
    z = float(norm.ppf(0.5 + cfg.ci_level / 2.0))
    rows.append(
        dict(
            beta=beta,
            n=n,
            statistic="free_energy",
            value=p_hat,
            stderr=se,
            lo=p_hat - z * se,
            hi=p_hat + z * se,
            extra=json.dumps({"replicas": cfg.replicas}),
        )
    )
    overlap_mean = res.overlap.mean(axis=0)
    running = float(overlap_mean.mean())
    rows.append(
        dict(beta=beta, n=n, statistic="endpoint_overlap", value=float(overlap_mean[-1]))
    )
    rows.append(
        dict(beta=beta, n=n, statistic="overlap_running_avg", value=running)
    )
    rows.append(
        dict(
            beta=beta,
            n=n,
            statistic="endpoint_max_mass",
            value=float(res.max_mass[:, -1].mean()),
        )
    )
    for theta in cfg.thetas:
        w_theta = np.exp(theta * res.log_w)
        m = float(w_theta.mean())
        rows.append(
            dict(
                beta=beta,
                n=n,
                statistic="fractional_moment",
                value=m,
                stderr=float(w_theta.std(ddof=1) / math.sqrt(cfg.replicas)),
                extra=json.dumps({"theta": theta}),
            )
        )
    return rows


def classify(cell_rows: List[dict], cfg: RunConfig, beta: float) -> dict:
    """Phase verdict for one beta: labels carry their evidence, never bare
    booleans.  Very strong disorder is read off the largest-n CI; the L2
    label follows the second-moment Cauchy diagnosis."""
    fe = [
        r
        for r in cell_rows
        if r["statistic"] == "free_energy" and r["beta"] == beta
    ]
    verdict = {"beta": beta, "graph": cfg.graph.describe()}
    if fe:
        top = max(fe, key=lambda r: r["n"])
        if top["hi"] < 0.0:
            label = "yes"
        elif top["lo"] >= -1e-9:
            label = "no"
        else:
            label = "inconclusive"
        verdict["very_strong_disorder"] = {
            "label": label,
            "n": top["n"],
            "ci": [top["lo"], top["hi"]],
            "p_hat": top["value"],
        }
    sm = [
        r
        for r in cell_rows
        if r["statistic"] == "second_moment" and r["beta"] == beta
    ]
    if sm:
        series = np.array([r["value"] for r in sorted(sm, key=lambda r: r["k"])])
        diag = diagnose_convergence(np.diff(series), total=float(series[-1]))
        verdict["L2_bounded"] = {
            "label": "yes" if diag.converged else ("no" if diag.mode == "divergent" else "inconclusive"),
            "mode": diag.mode,
            "detail": diag.detail,
            "sup_value": float(series[-1]),
        }
    fr = [
        r
        for r in cell_rows
        if r["statistic"] == "fractional_moment" and r["beta"] == beta
    ]
    if fr:
        by_theta: dict = {}
        for r in fr:
            theta = json.loads(r["extra"])["theta"]
            by_theta.setdefault(theta, []).append((r["n"], r["value"]))
        slopes = {}
        for theta, pts in by_theta.items():
            pts.sort()
            if len(pts) >= 2 and all(v > 0 for _, v in pts):
                fit = linear_fit([p[0] for p in pts], [math.log(p[1]) for p in pts])
                slopes[theta] = {"slope": fit.slope, "r2": fit.r2}
        verdict["fractional_moment_decay"] = slopes
    return verdict


def scan(cfg: RunConfig) -> ScanResult:
    cfg.validate()
    g = cfg.graph.build()
    law = make_law(cfg.law_kind)
    out = ScanResult(cfg)
    jobs = [(beta, n) for beta in cfg.betas for n in cfg.ns]

    workers = int(os.environ.get("POLYMERLAB_WORKERS", "1"))
    results: dict = {}
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = {
                ex.submit(_cell_job, cfg, g, law, beta, n): (beta, n)
                for beta, n in jobs
            }
            for fut, key in futures.items():
                try:
                    results[key] = fut.result()
                except PolymerLabError as exc:
                    out.errors.append({"cell": key, "error": str(exc)})
    else:
        for key in jobs:
            try:
                results[key] = _cell_job(cfg, g, law, *key)
            except PolymerLabError as exc:
                out.errors.append({"cell": list(key), "error": str(exc)})

    cell_rows: List[dict] = []
    for key in jobs:   # deterministic order regardless of completion order
        for r in results.get(key, []):
            cell_rows.append(r)

    n2 = cfg.budgets.get("second_moment_n", 0)
    for beta in cfg.betas:
        if n2:
            series = second_moment_exact(
                g, law, g.root, beta, n2, cap=cfg.budgets["front_cap"]
            )
            for k, v in enumerate(series):
                cell_rows.append(
                    dict(beta=beta, n=n2, k=k, statistic="second_moment", value=float(v))
                )
    K = cfg.budgets.get("collision_horizon", 0)
    if K:
        rec = diagonal_collision_sum(g, g.root, K, cap=cfg.budgets["front_cap"])
        for k in (2 ** j for j in range(3, K.bit_length())):
            if k <= K:
                cell_rows.append(
                    dict(
                        k=k,
                        statistic="collision_partial_sum",
                        value=float(rec.partial_sums[k]),
                        extra=json.dumps({"cauchy": rec.cauchy.mode}),
                    )
                )

    out.rows = [_row(cfg, g, **r) for r in cell_rows]
    out.verdicts = [classify(cell_rows, cfg, beta) for beta in cfg.betas]
    return out


def emit(result: ScanResult, out_dir, kind: str = "scan", passed: Optional[bool] = None) -> dict:
    """Write rows to CSV and the full report to JSON; returns file paths.

    Deterministic except for the timestamp field in the JSON report.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{kind}.csv")
    json_path = os.path.join(out_dir, f"{kind}.json")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in result.rows:
            writer.writerow(row)
    report = {
        "schema": REPORT_SCHEMA,
        "kind": kind,
        "version": __version__,
        "config": result.config.describe(),
        "verdicts": result.verdicts,
        "errors": result.errors,
        "row_count": len(result.rows),
        "passed": passed,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=json_default)
        fh.write("\n")
    return {"csv": csv_path, "json": json_path}
