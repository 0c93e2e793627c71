"""Command-line surface: detection runs, scoring, oracle, and benchmarks.

Exit codes: 0 success, 1 runtime/I-O failure, 2 usage errors (argparse).
Reports are versioned JSON (schema 1); partition files are
"original_node_id community_id" lines sorted by node id.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .graph import (Graph, Partition, load_edge_list, modularity,
                    read_partition, write_partition)
from .leiden import RunConfig, leiden_locale
from .locale import ValidationLog
from .oracle import DEFAULT_MAX_N, brute_force_max_modularity

REPORT_SCHEMA = 1


def _parse_rounds(text: str) -> int | None:
    if text == "full":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"inner rounds must be a positive integer or 'full', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("inner rounds must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modmax",
        description="Community detection by low-cardinality embedding ascent.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="detect communities in an edge list")
    detect.add_argument("--input", required=True, help="edge-list file")
    detect.add_argument("--algo", choices=("louvain", "leiden", "locale"),
                        default="locale")
    detect.add_argument("--k", type=int, default=8,
                        help="cardinality bound for the embedding phase")
    detect.add_argument("--inner-rounds", type=_parse_rounds, default=2,
                        metavar="{N|full}",
                        help="embedding sweeps per level (default 2)")
    detect.add_argument("--iterations", type=int, default=1,
                        help="full multi-level passes")
    detect.add_argument("--seed", type=int, default=None,
                        help="shuffle update order for trial variance")
    detect.add_argument("--output", help="partition file (default: stdout)")
    detect.add_argument("--report", help="write a JSON run report here")
    detect.add_argument("--validated", action="store_true",
                        help="check the per-update descent inequality")
    detect.add_argument("--weighted", action="store_true",
                        help="use the third edge-list column as weights")
    detect.set_defaults(func=cmd_detect)

    score = sub.add_parser("modularity", help="score a partition file")
    score.add_argument("--input", required=True)
    score.add_argument("--partition", required=True)
    score.add_argument("--weighted", action="store_true")
    score.set_defaults(func=cmd_modularity)

    oracle = sub.add_parser("oracle",
                            help="exact maximum modularity by enumeration")
    oracle.add_argument("--input", required=True)
    oracle.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    oracle.add_argument("--weighted", action="store_true")
    oracle.set_defaults(func=cmd_oracle)

    bench = sub.add_parser("bench", help="run a benchmark manifest")
    bench.add_argument("--manifest", required=True,
                       help="JSON file listing datasets and configs")
    bench.add_argument("--format", choices=("csv", "json"), default="csv")
    bench.add_argument("--output", help="table file (default: stdout)")
    bench.add_argument("--jobs", type=int, default=1,
                       help="worker threads for independent rows")
    bench.set_defaults(func=cmd_bench)
    return parser


def _load_graph(path: str, weighted: bool) -> Graph:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such dataset: {path}")
    return load_edge_list(p, weighted=weighted)


def _run(g: Graph, cfg: RunConfig) -> tuple[Partition, list, ValidationLog | None]:
    validation = ValidationLog() if cfg.validated else None
    part, records = leiden_locale(g, cfg, validation=validation)
    return part, records, validation


def _report_dict(name: str, g: Graph, cfg: RunConfig, records,
                 validation) -> dict:
    report = {
        "schema": REPORT_SCHEMA,
        "tool": "modmax",
        "version": __version__,
        "dataset": name,
        "nodes": g.n,
        "edges": g.edge_count(),
        "avg_degree": g.two_m / g.n if g.n else 0.0,
        "algorithm": cfg.algorithm,
        "config": {
            "k": cfg.k,
            "inner_rounds": cfg.inner_rounds,
            "iterations": cfg.iterations,
            "seed": cfg.seed,
            "validated": cfg.validated,
        },
        "iterations": [
            {
                "modularity": rec.modularity,
                "seconds": rec.seconds,
                "levels": [
                    {"nodes": lv.nodes, "communities": lv.communities,
                     "modularity": lv.modularity, "seconds": lv.seconds}
                    for lv in rec.levels
                ],
            }
            for rec in records
        ],
        "final_modularity": records[-1].modularity,
    }
    if validation is not None:
        report["validation"] = {
            "checks": validation.checks,
            "transitions": validation.transitions,
            "violations": len(validation.violations),
        }
    return report


def cmd_detect(args) -> int:
    cfg = RunConfig(algorithm=args.algo, k=args.k,
                    inner_rounds=args.inner_rounds,
                    iterations=args.iterations, seed=args.seed,
                    validated=args.validated)
    g = _load_graph(args.input, args.weighted)
    part, records, validation = _run(g, cfg)
    if validation is not None and validation.violations:
        print(f"warning: {len(validation.violations)} descent-inequality "
              f"violations out of {validation.checks} checks", file=sys.stderr)
    if args.output:
        write_partition(args.output, g, part)
    else:
        write_partition(sys.stdout, g, part)
    if args.report:
        report = _report_dict(Path(args.input).stem, g, cfg, records, validation)
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n",
                                     encoding="utf-8")
    return 0


def cmd_modularity(args) -> int:
    g = _load_graph(args.input, args.weighted)
    part = read_partition(args.partition, g)
    print(f"{modularity(g, part):.6f}")
    return 0


def cmd_oracle(args) -> int:
    g = _load_graph(args.input, args.weighted)
    try:
        best_q, best_p = brute_force_max_modularity(g, max_n=args.max_n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"maximum modularity: {best_q:.6f}")
    labels = g.node_labels.tolist()
    for i, c in enumerate(best_p.assignment.tolist()):
        print(f"{labels[i]} {c}")
    return 0


def _bench_row(name: str, path: Path, weighted: bool, cfg: RunConfig,
               cache: dict) -> dict:
    row = {
        "dataset": name,
        "nodes": "", "avg_degree": "",
        "algorithm": cfg.algorithm, "k": cfg.k,
        "inner_rounds": "full" if cfg.inner_rounds is None else cfg.inner_rounds,
        "iterations": cfg.iterations, "seed": cfg.seed,
        "modularity": "", "seconds": "",
        "status": "ok",
    }
    if not path.exists():
        row["status"] = "skipped"
        return row
    if path not in cache:
        cache[path] = load_edge_list(path, weighted=weighted)
    g = cache[path]
    start = time.perf_counter()
    _, records, _ = _run(g, cfg)
    elapsed = time.perf_counter() - start
    row.update(nodes=g.n, avg_degree=round(g.two_m / g.n, 4),
               modularity=records[-1].modularity, seconds=round(elapsed, 6))
    return row


def cmd_bench(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    base = manifest_path.parent
    datasets = manifest.get("datasets", [])
    configs = manifest.get("configs", [])
    if not datasets or not configs:
        print("error: manifest needs non-empty 'datasets' and 'configs'",
              file=sys.stderr)
        return 1

    jobs = []
    cache: dict = {}
    for ds in datasets:
        path = Path(ds["path"])
        if not path.is_absolute():
            path = base / path
        for conf in configs:
            cfg = RunConfig(
                algorithm=conf.get("algorithm", "locale"),
                k=conf.get("k", 8),
                inner_rounds=(None if conf.get("inner_rounds", 2) == "full"
                              else conf.get("inner_rounds", 2)),
                iterations=conf.get("iterations", 1),
                seed=conf.get("seed"))
            jobs.append((ds.get("name", path.stem), path,
                         bool(ds.get("weighted", False)), cfg))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(lambda j: _bench_row(*j, cache), jobs))
    else:
        rows = [_bench_row(*job, cache) for job in jobs]

    out = open(args.output, "w", encoding="utf-8", newline="") \
        if args.output else sys.stdout
    try:
        if args.format == "json":
            json.dump(rows, out, indent=2)
            out.write("\n")
        else:
            writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    return 1 if any(r["status"] == "skipped" for r in rows) else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
