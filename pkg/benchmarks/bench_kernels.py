"""Benchmark: compiled disorder kernel vs the numpy fallback.

Two measurements: raw field evaluation (hash + normal transform over a
vertex batch, the innermost loop of every quenched computation) and a
macro run (Z^1 free-energy MC) through each backend.

Run:  python benchmarks/bench_kernels.py
The fallback is forced in a subprocess via POLYMERLAB_PURE=1.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np


BATCHES = (64, 256, 1024, 8192, 65536)


def bench_field() -> dict:
    """Throughput sweep over batch sizes: small batches are the dict-front
    regime where per-call overhead dominates the numpy fallback."""
    from polymerlab import kernel_backend
    from polymerlab.disorder import FieldSampler, make_law

    law = make_law("gaussian")
    f = FieldSampler(law, 12345)
    rates = {}
    checksum = 0.0
    for n in BATCHES:
        digests = np.arange(n, dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)
        reps = max(10, 1_000_000 // n)
        f.omega_array(1, digests)  # warm up
        t0 = time.perf_counter()
        for i in range(1, reps + 1):
            checksum += float(f.omega_array(i, digests).sum())
        rates[n] = n * reps / (time.perf_counter() - t0)
    return {"backend": kernel_backend, "rates": rates, "checksum": checksum}


def bench_free_energy() -> dict:
    """Macro benchmark through the dict-front engine (one small omega batch
    per step per replica)."""
    from polymerlab import kernel_backend
    from polymerlab.disorder import FieldSampler, make_law, spawn_seed
    from polymerlab.partition_dp import log_partition
    from polymerlab.zoo import make_lattice

    g = make_lattice(1)
    law = make_law("gaussian")
    t0 = time.perf_counter()
    total = 0.0
    for r in range(40):
        s = FieldSampler(law, spawn_seed(9, r))
        total += log_partition(g, s, g.root, 150, 1.0)
    dt = time.perf_counter() - t0
    return {"backend": kernel_backend, "seconds": dt, "p_hat": total / 40 / 150}


def main() -> None:
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps({"field": bench_field(), "free_energy": bench_free_energy()}))
        return
    results = {}
    for label, env_extra in (("compiled", {}), ("fallback", {"POLYMERLAB_PURE": "1"})):
        env = dict(os.environ)
        env.update(env_extra)
        env["_BENCH_CHILD"] = "1"
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__)],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        results[label] = json.loads(out.stdout)
    print(f"{'batch':>8s} | {'compiled M/s':>12s} | {'fallback M/s':>12s} | {'speedup':>7s}")
    for n in BATCHES:
        rc = results["compiled"]["field"]["rates"][str(n)]
        rf = results["fallback"]["field"]["rates"][str(n)]
        print(f"{n:8d} | {rc / 1e6:12.2f} | {rf / 1e6:12.2f} | {rc / rf:6.2f}x")
    fc = results["compiled"]["free_energy"]
    ff = results["fallback"]["free_energy"]
    print(
        f"dict-front free energy (n=150, 40 replicas): compiled {fc['seconds']:.2f} s,"
        f" fallback {ff['seconds']:.2f} s ({ff['seconds'] / fc['seconds']:.2f}x)"
    )
    drift = abs(
        results["compiled"]["field"]["checksum"] - results["fallback"]["field"]["checksum"]
    )
    print(
        f"checksum drift {drift:.3e} | identical macro p_hat: "
        f"{fc['p_hat'] == ff['p_hat']}"
    )


if __name__ == "__main__":
    main()
