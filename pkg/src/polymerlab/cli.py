"""Command-line interface.

Verbs:
  scan            run a config-driven phase scan, write CSV + JSON
  experiment      run a named desk-scale experiment; exit code = predicate
  probe-walk      beta-free walk diagnostics for one graph
  describe-graph  print a graph's metadata and a few kernel rows

Exit codes: 0 pass, 1 predicate failure, 2 config error.  POLYMERLAB_WORKERS
sets the scan worker count.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, PolymerLabError


def _parse_overrides(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, val = item.split("=", 1)
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


def _graph_from_args(args):
    from .zoo import GraphSpec

    params = _parse_overrides(args.param)
    return GraphSpec(args.family, params).build()


def cmd_scan(args) -> int:
    from .experiments import RunConfig, emit, scan

    cfg = RunConfig.from_yaml(args.config)
    if args.out:
        cfg.output_dir = args.out
    result = scan(cfg)
    out_dir = cfg.output_dir or "out"
    paths = emit(result, out_dir)
    print(f"scan: {len(result.rows)} rows -> {paths['csv']}")
    for v in result.verdicts:
        print(json.dumps(v, sort_keys=True))
    if result.errors:
        print(f"{len(result.errors)} cell(s) failed", file=sys.stderr)
    return 0


def cmd_experiment(args) -> int:
    from .experiments import run_experiment

    overrides = _parse_overrides(args.set)
    report, passed = run_experiment(args.name, args.out, overrides)
    print(json.dumps(report, indent=2, sort_keys=True, default=str))
    print(f"experiment {args.name}: {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


def cmd_probe_walk(args) -> int:
    from .diagnostics import kernel_profile, volume_growth
    from .experiments.runner import CSV_COLUMNS

    g = _graph_from_args(args)
    prof = kernel_profile(g, g.root, args.horizon, r_max=args.r_max)
    blob = prof.to_json()
    if args.csv:
        import csv as _csv

        with open(args.csv, "w", newline="") as fh:
            writer = _csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            base = {c: "" for c in CSV_COLUMNS}
            base.update(graph_family=g.family, graph_hash=g.graph_hash())
            for k, p in enumerate(prof.return_probs):
                if p > 0:
                    writer.writerow({**base, "k": k, "statistic": "return_prob", "value": p})
            if args.r_max:
                vg = volume_growth(g, g.root, args.r_max)
                for r, mu in zip(vg.radii, vg.sphere_measure):
                    writer.writerow(
                        {**base, "k": int(r), "statistic": "sphere_measure", "value": mu}
                    )
        print(f"wrote {args.csv}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(blob, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.out}")
    if not args.out and not args.csv:
        summary = {k: v for k, v in blob.items() if k != "return_probs" and k != "green_partial"}
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_describe_graph(args) -> int:
    from .graph_core import sample_walk

    g = _graph_from_args(args)
    print(json.dumps({"family": g.family, "hash": g.graph_hash(), "meta": g.meta},
                     indent=2, sort_keys=True, default=str))
    walk = sample_walk(g, g.root, args.rows, seed=0)
    for v in walk[: args.rows]:
        row = g.transition_row(v)
        entries = ", ".join(f"{w.payload}:{p:.6g}" for w, p in row.items())
        print(f"{v.payload} -> {entries}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polymerlab", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("scan", help="run a config-driven scan")
    p.add_argument("--config", required=True, help="YAML run config")
    p.add_argument("--out", help="output directory (overrides config)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("experiment", help="run a named experiment")
    p.add_argument("name")
    p.add_argument("--out", help="output directory for report files")
    p.add_argument("--set", action="append", metavar="KEY=VAL",
                   help="override an experiment parameter (JSON values)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("probe-walk", help="walk diagnostics for one graph")
    p.add_argument("--family", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VAL")
    p.add_argument("--horizon", type=int, default=512)
    p.add_argument("--r-max", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_probe_walk)

    p = sub.add_parser("describe-graph", help="print graph metadata and rows")
    p.add_argument("--family", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VAL")
    p.add_argument("--rows", type=int, default=4)
    p.set_defaults(func=cmd_describe_graph)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PolymerLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
