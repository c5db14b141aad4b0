"""Benchmark protocols: noisy-grid sweep, ground-truth cluster runs, summaries.

Each (algorithm, start node, trial) cell is independent; cells may run in
worker processes under `jobs > 1`, and results are merged and sorted so
the emitted CSV is byte-identical regardless of parallelism. Wall-clock
micros are recorded only when timing=True (they are the one
non-deterministic field; volume-based work counters are always present).
"""

from __future__ import annotations

import io
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import acl as acl_mod
from . import crd as crd_mod
from .errors import InputError
from .evaluation import GroundTruthCluster, precision_recall, spectral_gap
from .graph import CutResult, Graph, generate_grid, induced_subgraph, make_rng, volume

RECORD_HEADER = "graph,cluster,algorithm,seed_node,trial,conductance,precision,recall,f1,touched_volume,micros"
SUMMARY_HEADER = "group,metric,q1,median,q3"

DEFAULT_NOISE_LEVELS = tuple(round(0.05 * i, 2) for i in range(11))  # 0.0 .. 0.5


@dataclass
class ExperimentRecord:
    graph_id: str
    cluster: str
    algorithm: str
    seed_node: int
    trial: int
    conductance: float
    precision: float
    recall: float
    f1: float
    touched_volume: int
    micros: int

    def csv_row(self) -> str:
        return (
            f"{self.graph_id},{self.cluster},{self.algorithm},{self.seed_node},"
            f"{self.trial},{self.conductance:.10g},{self.precision:.10g},"
            f"{self.recall:.10g},{self.f1:.10g},{self.touched_volume},{self.micros}"
        )


@dataclass
class SummaryRow:
    group: str
    metric: str
    q1: float
    median: float
    q3: float

    def csv_row(self) -> str:
        return f"{self.group},{self.metric},{self.q1:.10g},{self.median:.10g},{self.q3:.10g}"


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    buf.write(RECORD_HEADER + "\n")
    for rec in records:
        buf.write(rec.csv_row() + "\n")
    return buf.getvalue()


def summaries_to_csv(rows: Sequence[SummaryRow]) -> str:
    buf = io.StringIO()
    buf.write(SUMMARY_HEADER + "\n")
    for row in rows:
        buf.write(row.csv_row() + "\n")
    return buf.getvalue()


def summarize(
    records: Sequence[ExperimentRecord],
    metrics: Sequence[str] = ("conductance", "precision", "recall", "f1"),
) -> list[SummaryRow]:
    """Median and quartiles per (graph, cluster, algorithm, metric).

    Even-length medians average the middle two values; quartiles use
    linear interpolation. Empty groups are excluded by construction.
    """
    groups: dict[tuple[str, str, str], list[ExperimentRecord]] = {}
    for rec in records:
        groups.setdefault((rec.graph_id, rec.cluster, rec.algorithm), []).append(rec)
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        for metric in metrics:
            values = [getattr(r, metric) for r in recs]
            q1, med, q3 = np.percentile(values, [25, 50, 75])
            rows.append(SummaryRow("|".join(key), metric, float(q1), float(med), float(q3)))
    return rows


def acl_opt(
    g: Graph, seed: int, truth: Iterable[int], lam: float, epsilon: float
) -> tuple[float, CutResult]:
    """Supervised ACL: the grid cut with the best F1 against the truth set.

    Ties break toward the smaller teleportation value. Returns (alpha, cut).
    """
    truth = frozenset(int(v) for v in truth)
    if not truth:
        raise InputError("truth set is empty")
    best = None
    for alpha, cut, _ in acl_mod.acl_grid_cuts(g, seed, lam, epsilon):
        f1 = precision_recall(cut.side, truth, g).f1
        if best is None or f1 > best[0]:
            best = (f1, alpha, cut)
    return best[1], best[2]


def _timed(timing: bool, started: float) -> int:
    return int((time.perf_counter() - started) * 1_000_000) if timing else 0


def _grid_cell(args) -> list[ExperimentRecord]:
    (width, height, noise, graph_seed, starts, phi, tau, t, lam, epsilon, timing) = args
    g = generate_grid(width, height, noise, graph_seed)
    graph_id = f"grid-{width}x{height}-seed{graph_seed}"
    cluster_id = f"noise={noise:g}"
    records = []
    for trial, start in enumerate(starts):
        t0 = time.perf_counter()
        result = crd_mod.crd_outer(g, start, phi, tau, t)
        cut = result.best_sweep
        records.append(
            ExperimentRecord(
                graph_id,
                cluster_id,
                "CRD",
                start,
                trial,
                float(cut.conductance),
                0.0,
                0.0,
                0.0,
                result.touched_volume,
                _timed(timing, t0),
            )
        )
        t0 = time.perf_counter()
        touched = 0
        best = None
        for _, acut, work in acl_mod.acl_grid_cuts(g, start, lam, epsilon):
            touched += work
            if best is None or acut.conductance < best.conductance:
                best = acut
        records.append(
            ExperimentRecord(
                graph_id,
                cluster_id,
                "ACL",
                start,
                trial,
                float(best.conductance),
                0.0,
                0.0,
                0.0,
                touched,
                _timed(timing, t0),
            )
        )
    return records


def run_grid_experiment(
    width: int = 60,
    height: int = 60,
    noise_levels: Sequence[float] = DEFAULT_NOISE_LEVELS,
    seeds_per_level: int = 2,
    starts_per_graph: int = 10,
    phi: Fraction | float | str = Fraction(1, 3),
    tau: Fraction | float | str = Fraction(1, 2),
    t: int = 8,
    acl_lambda: float = 0.8,
    epsilon: float = 1e-7,
    rng_seed: int = 0,
    jobs: int = 1,
    timing: bool = False,
) -> tuple[list[ExperimentRecord], dict[tuple[float, str], float]]:
    """The noisy-grid protocol: conductance of CRD vs grid-tuned ACL.

    For every noise level, generates seeds_per_level grids, samples
    starts_per_graph start nodes per grid (without replacement), runs both
    algorithms, and aggregates the mean conductance per (level, algorithm).
    The default gap estimate makes the teleportation grid land clusters of
    the same scale the diffusion reaches on a clean lattice, so the noise
    sweep compares cut quality rather than region size.
    """
    if seeds_per_level < 1 or starts_per_graph < 1:
        raise InputError("need at least one graph seed and one start per graph")
    rng = make_rng(rng_seed)
    tasks = []
    for noise in noise_levels:
        for _ in range(seeds_per_level):
            graph_seed = int(rng.integers(1 << 62))
            starts = sorted(
                int(v) for v in rng.choice(width * height, starts_per_graph, replace=False)
            )
            tasks.append(
                (width, height, noise, graph_seed, starts, Fraction(phi), Fraction(tau), t, acl_lambda, epsilon, timing)
            )
    records = _run_tasks(_grid_cell, tasks, jobs)
    records.sort(key=lambda r: (r.cluster, r.graph_id, r.algorithm, r.seed_node, r.trial))
    means: dict[tuple[float, str], float] = {}
    for noise in noise_levels:
        for algorithm in ("CRD", "ACL"):
            values = [
                r.conductance
                for r in records
                if r.cluster == f"noise={noise:g}" and r.algorithm == algorithm
            ]
            means[(noise, algorithm)] = float(np.mean(values))
    return records, means


def _cluster_cell(args) -> list[ExperimentRecord]:
    (g, graph_id, cluster_tag, members, lam, starts, trials, phi, tau, epsilon, timing) = args
    records = []
    for trial, start in zip(trials, starts):
        t = default_step_budget(g, members, start)
        t0 = time.perf_counter()
        result = crd_mod.crd_outer(g, start, phi, tau, t)
        cut = result.best_sweep
        m = precision_recall(cut.side, members, g)
        records.append(
            ExperimentRecord(
                graph_id,
                cluster_tag,
                "CRD",
                start,
                trial,
                float(cut.conductance),
                m.precision,
                m.recall,
                m.f1,
                result.touched_volume,
                _timed(timing, t0),
            )
        )
        t0 = time.perf_counter()
        grid_cuts = acl_mod.acl_grid_cuts(g, start, lam, epsilon)
        micros = _timed(timing, t0)
        touched = sum(work for _, _, work in grid_cuts)
        best_cond = None
        best_f1 = None
        for alpha, acut, _ in grid_cuts:
            am = precision_recall(acut.side, members, g)
            if best_cond is None or acut.conductance < best_cond[1].conductance:
                best_cond = (alpha, acut, am)
            if best_f1 is None or am.f1 > best_f1[2].f1:
                best_f1 = (alpha, acut, am)
        for name, (alpha, acut, am) in (("ACL", best_cond), ("ACLopt", best_f1)):
            records.append(
                ExperimentRecord(
                    graph_id,
                    cluster_tag,
                    name,
                    start,
                    trial,
                    float(acut.conductance),
                    am.precision,
                    am.recall,
                    am.f1,
                    touched,
                    micros,
                )
            )
    return records


def default_step_budget(g: Graph, members: Iterable[int], start: int) -> int:
    """Doubling iterations so the untruncated mass reaches 4x the cluster volume."""
    vol_b = volume(g, members)
    return max(1, math.ceil(math.log2(max(2 * vol_b / g.degree(start), 2))))


def run_cluster_experiment(
    g: Graph,
    clusters: Sequence[GroundTruthCluster],
    sample_fraction: float = 0.5,
    rng_seed: int = 0,
    phi: Fraction | float | str = Fraction(1, 3),
    tau: Fraction | float | str = Fraction(1, 2),
    epsilon: float = 1e-7,
    graph_id: str = "graph",
    jobs: int = 1,
    timing: bool = False,
) -> tuple[list[ExperimentRecord], list[SummaryRow]]:
    """Run CRD, ACL, and supervised ACL from sampled seeds of each cluster.

    Samples ceil(sample_fraction * |B|) start nodes per cluster without
    replacement; the ACL teleportation grid spans the induced subgraph's
    spectral gap. Clusters smaller than 2 nodes are skipped with a warning.
    """
    if not clusters:
        raise InputError("no clusters supplied")
    if not 0 < sample_fraction <= 1:
        raise InputError("sample_fraction must lie in (0, 1]")
    rng = make_rng(rng_seed)
    tasks = []
    for cluster in clusters:
        members = sorted(cluster.members)
        if len(members) < 2:
            warnings.warn(f"cluster {cluster.feature}={cluster.value} has fewer than 2 nodes; skipped")
            continue
        sub, _ = induced_subgraph(g, members)
        lam = spectral_gap(sub)
        count = int(np.ceil(sample_fraction * len(members)))
        starts = sorted(int(v) for v in rng.choice(members, count, replace=False))
        tag = f"{cluster.feature}={cluster.value}"
        chunk = max(1, -(-len(starts) // max(jobs, 1)))
        for lo in range(0, len(starts), chunk):
            part = starts[lo : lo + chunk]
            trials = list(range(lo, lo + len(part)))
            tasks.append(
                (g, graph_id, tag, frozenset(members), lam, part, trials, Fraction(phi), Fraction(tau), epsilon, timing)
            )
    records = _run_tasks(_cluster_cell, tasks, jobs)
    records.sort(key=lambda r: (r.graph_id, r.cluster, r.algorithm, r.seed_node, r.trial))
    return records, summarize(records)


def _run_tasks(fn, tasks, jobs: int) -> list[ExperimentRecord]:
    records: list[ExperimentRecord] = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for batch in pool.map(fn, tasks):
                records.extend(batch)
    else:
        for task in tasks:
            records.extend(fn(task))
    return records
