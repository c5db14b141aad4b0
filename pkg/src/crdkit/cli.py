"""Command-line front door.

Subcommands: gen-grid, gen-pathstar, crd, acl, eval, experiment-grid,
experiment-clusters, filter-truth. Every subcommand writes CSV or
edge-list text to --out (default: standard output). Exit codes: 0 on
success, 1 on input errors (including bad flags), 2 on contract
violations. Ratio-valued flags accept decimals or exact "p/q" text.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import acl as acl_mod
from . import crd as crd_mod
from . import evaluation, experiments
from . import graph as graph_mod
from .errors import ContractError, InputError

CUT_HEADER = "source,conductance,boundary_edges,volume,size,members"


def parse_ratio(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse ratio {text!r}") from None


def parse_noise_levels(text: str) -> list[float]:
    """Either 'start:stop:step' (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError("noise range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise InputError("noise step must be positive")
        levels = []
        value = start
        while value <= stop + 1e-9:
            levels.append(round(value, 10))
            value += step
        return levels
    return [float(p) for p in text.split(",") if p]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # unknown flags exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_graph(path: str, indexing: str) -> graph_mod.Graph:
    return graph_mod.load_edge_list(Path(path).read_text(encoding="utf-8"), indexing)


def _load_node_set(path: str) -> frozenset:
    tokens = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    try:
        return frozenset(int(t) for t in tokens)
    except ValueError:
        raise InputError(f"non-integer node id in {path}") from None


def _cut_rows(g: graph_mod.Graph, named_cuts) -> str:
    lines = [CUT_HEADER]
    for name, cut in named_cuts:
        if cut is None:
            continue
        members = " ".join(str(v) for v in sorted(cut.side))
        lines.append(
            f"{name},{float(cut.conductance):.10g},{cut.boundary_edges},"
            f"{cut.side_volume},{len(cut.side)},{members}"
        )
    return "\n".join(lines) + "\n"


def build_parser() -> _Parser:
    parser = _Parser(prog="crdkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("gen-grid", help="write a (noisy) grid graph as an edge list", formatter_class=fmt)
    p.add_argument("--w", type=int, default=60, help="grid width")
    p.add_argument("--h", type=int, default=60, help="grid height")
    p.add_argument("--noise", type=float, default=0.0, help="extra-edge probability per node")
    p.add_argument("--rng", type=int, default=0, help="random seed")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("gen-pathstar", help="write the path-star leakage graph", formatter_class=fmt)
    p.add_argument("--k", type=int, default=10, help="number of paths")
    p.add_argument("--l", type=int, default=40, help="path length")
    p.add_argument("--outside-degree", type=int, default=100, help="degree of the outside attachment node")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("crd", help="run the diffusion from a seed and report cuts", formatter_class=fmt)
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--seed", type=int, required=True, help="start node")
    p.add_argument("--phi", type=parse_ratio, default=Fraction(1, 3), help="effort parameter phi")
    p.add_argument("--tau", type=parse_ratio, default=Fraction(1, 2), help="mass-test threshold tau")
    p.add_argument("--t", type=int, default=20, help="doubling iteration bound")
    p.add_argument("--indexing", choices=["zero-based", "one-based"], default="zero-based")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("acl", help="run approximate PageRank clustering from a seed", formatter_class=fmt)
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--seed", type=int, required=True, help="start node")
    p.add_argument("--alpha", type=float, default=0.1, help="teleportation probability")
    p.add_argument("--epsilon", type=float, default=1e-7, help="residual tolerance epsilon")
    p.add_argument("--lam", type=float, default=None, help="run the 4-point alpha grid spanning [lam/2, 2*lam] instead of a single alpha")
    p.add_argument("--indexing", choices=["zero-based", "one-based"], default="zero-based")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("eval", help="score a found node set against a reference set", formatter_class=fmt)
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--found", required=True, help="file of node ids")
    p.add_argument("--truth", required=True, help="file of node ids")
    p.add_argument("--weighting", choices=["node-count", "volume"], default="node-count")
    p.add_argument("--indexing", choices=["zero-based", "one-based"], default="zero-based")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("experiment-grid", help="noisy-grid protocol: CRD vs ACL conductance", formatter_class=fmt)
    p.add_argument("--w", type=int, default=60)
    p.add_argument("--h", type=int, default=60)
    p.add_argument("--noise", type=parse_noise_levels, default=list(experiments.DEFAULT_NOISE_LEVELS), help="levels as start:stop:step or comma list")
    p.add_argument("--trials", type=int, default=2, help="graphs per noise level")
    p.add_argument("--starts", type=int, default=10, help="start nodes per graph")
    p.add_argument("--phi", type=parse_ratio, default=Fraction(1, 3), help="CRD effort parameter phi")
    p.add_argument("--tau", type=parse_ratio, default=Fraction(1, 2), help="CRD mass-test threshold tau")
    p.add_argument("--t", type=int, default=8, help="CRD doubling iterations")
    p.add_argument("--lam", type=float, default=0.8, help="ACL gap estimate for the alpha grid")
    p.add_argument("--epsilon", type=float, default=1e-7, help="ACL residual tolerance epsilon")
    p.add_argument("--rng", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: CRD_JOBS or 1)")
    p.add_argument("--timing", action="store_true", help="record wall-clock micros (non-deterministic)")
    p.add_argument("--out", help="records CSV path (default: stdout)")
    p.add_argument("--summary", help="summary CSV path")
    p.add_argument("--means", help="per-level mean conductance CSV path")

    p = sub.add_parser("experiment-clusters", help="ground-truth cluster protocol on a real graph", formatter_class=fmt)
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--features", required=True, help="TSV feature table")
    p.add_argument("--sample-fraction", type=float, default=0.5, help="fraction of each cluster sampled as seeds")
    p.add_argument("--phi", type=parse_ratio, default=Fraction(1, 3), help="CRD effort parameter phi")
    p.add_argument("--tau", type=parse_ratio, default=Fraction(1, 2), help="CRD mass-test threshold tau")
    p.add_argument("--epsilon", type=float, default=1e-7, help="ACL residual tolerance epsilon")
    p.add_argument("--min-volume", type=int, default=1000, help="ground-truth volume filter")
    p.add_argument("--max-conductance", type=float, default=0.5, help="ground-truth conductance filter")
    p.add_argument("--min-gap", type=float, default=0.5, help="ground-truth gap filter")
    p.add_argument("--rng", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: CRD_JOBS or 1)")
    p.add_argument("--timing", action="store_true", help="record wall-clock micros (non-deterministic)")
    p.add_argument("--graph-id", default=None, help="graph label in records (default: file stem)")
    p.add_argument("--indexing", choices=["zero-based", "one-based"], default="zero-based")
    p.add_argument("--out", help="records CSV path (default: stdout)")
    p.add_argument("--summary", help="summary CSV path")

    p = sub.add_parser("filter-truth", help="list feature clusters passing the quality filter", formatter_class=fmt)
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--features", required=True, help="TSV feature table")
    p.add_argument("--min-volume", type=int, default=1000)
    p.add_argument("--max-conductance", type=float, default=0.5)
    p.add_argument("--min-gap", type=float, default=0.5)
    p.add_argument("--indexing", choices=["zero-based", "one-based"], default="zero-based")
    p.add_argument("--out", help="output path (default: stdout)")
    return parser


def _jobs(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("CRD_JOBS")
    return max(1, int(env)) if env else 1


def _run(args) -> None:
    if args.command == "gen-grid":
        g = graph_mod.generate_grid(args.w, args.h, args.noise, args.rng)
        _write(graph_mod.edge_list_text(g), args.out)
    elif args.command == "gen-pathstar":
        g, cluster = graph_mod.generate_path_star(args.k, args.l, args.outside_degree)
        header = "# cluster: " + " ".join(str(v) for v in sorted(cluster)) + "\n"
        _write(header + graph_mod.edge_list_text(g), args.out)
    elif args.command == "crd":
        g = _load_graph(args.graph, args.indexing)
        result = crd_mod.crd_outer(g, args.seed, args.phi, args.tau, args.t)
        recovered = crd_mod.extract_recovered_set(g, result.mass)
        rec_cut = None
        if 0 < len(recovered) < g.node_count:
            rec_cut = graph_mod.conductance(g, recovered)
        _write(
            _cut_rows(
                g,
                [("sweep", result.best_sweep), ("inner-cut", result.cut), ("recovered", rec_cut)],
            ),
            args.out,
        )
    elif args.command == "acl":
        g = _load_graph(args.graph, args.indexing)
        if args.lam is not None:
            cut = acl_mod.acl_grid_runs(g, args.seed, args.lam, args.epsilon)
            _write(_cut_rows(g, [("acl-grid", cut)]), args.out)
        else:
            cut = acl_mod.acl_cluster(g, args.seed, args.alpha, args.epsilon)
            _write(_cut_rows(g, [("acl", cut)]), args.out)
    elif args.command == "eval":
        g = _load_graph(args.graph, args.indexing)
        found = _load_node_set(args.found)
        truth = _load_node_set(args.truth)
        metrics = evaluation.precision_recall(found, truth, g, args.weighting)
        lines = ["metric,value"]
        lines.append(f"precision,{metrics.precision:.10g}")
        lines.append(f"recall,{metrics.recall:.10g}")
        lines.append(f"f1,{metrics.f1:.10g}")
        if 0 < len(found) < g.node_count:
            lines.append(f"conductance,{float(graph_mod.conductance(g, found).conductance):.10g}")
        _write("\n".join(lines) + "\n", args.out)
    elif args.command == "experiment-grid":
        records, means = experiments.run_grid_experiment(
            width=args.w,
            height=args.h,
            noise_levels=args.noise,
            seeds_per_level=args.trials,
            starts_per_graph=args.starts,
            phi=args.phi,
            tau=args.tau,
            t=args.t,
            acl_lambda=args.lam,
            epsilon=args.epsilon,
            rng_seed=args.rng,
            jobs=_jobs(args.jobs),
            timing=args.timing,
        )
        _write(experiments.records_to_csv(records), args.out)
        if args.summary:
            _write(experiments.summaries_to_csv(experiments.summarize(records)), args.summary)
        if args.means:
            lines = ["noise,algorithm,mean_conductance"]
            for (noise, algorithm), value in sorted(means.items()):
                lines.append(f"{noise:g},{algorithm},{value:.10g}")
            _write("\n".join(lines) + "\n", args.means)
    elif args.command == "experiment-clusters":
        g = _load_graph(args.graph, args.indexing)
        table = graph_mod.load_feature_table(Path(args.features).read_text(encoding="utf-8"))
        clusters = evaluation.filter_ground_truth(
            g, table, args.min_volume, args.max_conductance, args.min_gap
        )
        if not clusters:
            raise InputError("no ground-truth cluster passed the filter")
        records, summaries = experiments.run_cluster_experiment(
            g,
            clusters,
            sample_fraction=args.sample_fraction,
            rng_seed=args.rng,
            phi=args.phi,
            tau=args.tau,
            epsilon=args.epsilon,
            graph_id=args.graph_id or Path(args.graph).stem,
            jobs=_jobs(args.jobs),
            timing=args.timing,
        )
        _write(experiments.records_to_csv(records), args.out)
        if args.summary:
            _write(experiments.summaries_to_csv(summaries), args.summary)
    elif args.command == "filter-truth":
        g = _load_graph(args.graph, args.indexing)
        table = graph_mod.load_feature_table(Path(args.features).read_text(encoding="utf-8"))
        clusters = evaluation.filter_ground_truth(
            g, table, args.min_volume, args.max_conductance, args.min_gap
        )
        lines = ["feature,value,nodes,volume,conductance,gap"]
        for c in clusters:
            lines.append(
                f"{c.feature},{c.value},{len(c.members)},{c.volume},"
                f"{float(c.conductance):.10g},{c.gap:.10g}"
            )
        _write("\n".join(lines) + "\n", args.out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _run(args)
    except SystemExit as exc:  # argparse --help (0) or usage error (1)
        return int(exc.code or 0)
    except (InputError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ContractError as exc:
        sys.stderr.write(f"contract violation: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
