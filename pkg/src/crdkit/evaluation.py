"""Metrics, brute-force oracles, spectral gap, and ground-truth filtering.

The brute-force set conductance and the dense-matrix eigensolver used in
tests are deliberately independent of the incremental sweep machinery and
the iterative Lanczos solver they check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import InputError, SizeError
from .graph import FeatureTable, Graph, conductance, induced_subgraph, make_rng, volume

BRUTE_FORCE_LIMIT = 20


@dataclass
class ClusterMetrics:
    precision: float
    recall: float
    f1: float
    weighting: str  # "node-count" or "volume"


def precision_recall(
    found: Iterable[int],
    truth: Iterable[int],
    g: Graph,
    weighting: str = "node-count",
) -> ClusterMetrics:
    """Precision/recall/F1 of a found set against a reference set.

    Node-count weighting scores set sizes; volume weighting scores degree
    sums (the form the recovery guarantees are stated in). An empty found
    or truth set yields 0 for the corresponding metric.
    """
    if weighting not in ("node-count", "volume"):
        raise InputError(f"unknown weighting {weighting!r}")
    found = frozenset(int(v) for v in found)
    truth = frozenset(int(v) for v in truth)
    common = found & truth
    if weighting == "node-count":
        p = len(common) / len(found) if found else 0.0
        r = len(common) / len(truth) if truth else 0.0
    else:
        vol_common = volume(g, common)
        p = vol_common / volume(g, found) if found and volume(g, found) else 0.0
        r = vol_common / volume(g, truth) if truth and volume(g, truth) else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return ClusterMetrics(p, r, f1, weighting)


def set_conductance_bruteforce(g: Graph, b: Iterable[int]) -> Fraction:
    """Exact internal connectivity of a set: the minimum conductance over
    all non-trivial cuts of the induced subgraph. Exponential; |b| <= 20.
    """
    members = frozenset(int(v) for v in b)
    if len(members) > BRUTE_FORCE_LIMIT:
        raise SizeError(
            f"brute force limited to {BRUTE_FORCE_LIMIT} nodes; "
            "use spectral_gap as a proxy for larger sets"
        )
    if len(members) < 2:
        raise InputError("internal connectivity needs at least 2 nodes")
    sub, _ = induced_subgraph(g, members)
    n = sub.node_count
    masks = [0] * n
    for v in range(n):
        for u in sub.neighbors(v):
            masks[v] |= 1 << int(u)
    deg = sub.degrees.tolist()
    total = sub.total_volume
    if total == 0:
        raise InputError("induced subgraph has no edges")
    # gray-code walk over subsets of nodes 1..n-1, with node 0 pinned inside
    # (complements cover the remaining cuts)
    in_set = [False] * n
    in_set[0] = True
    vol_s = deg[0]
    boundary = deg[0]
    subset = 1
    denom = min(vol_s, total - vol_s)
    best = Fraction(boundary, denom) if denom > 0 else None
    for code in range(1, 1 << (n - 1)):
        v = 1 + ((code & -code).bit_length() - 1)  # gray-changed bit
        if in_set[v]:
            subset ^= 1 << v
            in_set[v] = False
            inside = (masks[v] & subset).bit_count()
            vol_s -= deg[v]
            boundary -= deg[v] - 2 * inside
        else:
            inside = (masks[v] & subset).bit_count()
            subset |= 1 << v
            in_set[v] = True
            vol_s += deg[v]
            boundary += deg[v] - 2 * inside
        denom = min(vol_s, total - vol_s)
        if denom > 0:
            phi = Fraction(boundary, denom)
            if best is None or phi < best:
                best = phi
    if best is None:
        raise InputError("no non-trivial cut with positive volume on both sides")
    return best


def _is_connected(g: Graph) -> bool:
    if g.node_count == 0:
        return False
    seen = [False] * g.node_count
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        v = stack.pop()
        for u in g.neighbors(v):
            if not seen[u]:
                seen[u] = True
                count += 1
                stack.append(int(u))
    return count == g.node_count


def _normalized_adjacency_matvec(g: Graph, inv_sqrt_deg: np.ndarray):
    # connected input guarantees every reduceat segment is non-empty
    indptr, indices = g.indptr, g.indices

    def matvec(x: np.ndarray) -> np.ndarray:
        scaled = x * inv_sqrt_deg
        sums = np.add.reduceat(scaled[indices], indptr[:-1])
        return sums * inv_sqrt_deg

    return matvec


def spectral_gap(
    g: Graph, tol: float = 1e-8, max_matvecs: int = 100_000
) -> float:
    """Smallest nonzero eigenvalue of the normalized Laplacian.

    Lanczos iteration with full reorthogonalization on L + 2 q q^T, where
    q is the unit vector along sqrt(degrees); the shift moves the known
    zero eigenvalue out of the way so the smallest Ritz value converges to
    the gap. Converged when the Rayleigh-quotient residual drops below tol.
    """
    if g.node_count < 2:
        raise InputError("spectral gap needs at least 2 nodes")
    if not _is_connected(g):
        raise InputError("graph is disconnected; operate on components")
    n = g.node_count
    deg = g.degrees.astype(np.float64)
    inv_sqrt = 1.0 / np.sqrt(deg)
    q = np.sqrt(deg)
    q /= np.linalg.norm(q)
    nmv = _normalized_adjacency_matvec(g, inv_sqrt)

    def op(x: np.ndarray) -> np.ndarray:
        return x - nmv(x) + 2.0 * q * (q @ x)

    rng = make_rng(12345)
    start = rng.standard_normal(n)
    start -= q * (q @ start)
    matvecs = 0
    while matvecs < max_matvecs:
        basis: list[np.ndarray] = []
        alphas: list[float] = []
        betas: list[float] = []
        vec = start / np.linalg.norm(start)
        prev = np.zeros(n)
        beta = 0.0
        k_max = min(n, 200)
        theta = None
        ritz = None
        for k in range(k_max):
            basis.append(vec)
            w = op(vec)
            matvecs += 1
            a = float(vec @ w)
            alphas.append(a)
            w = w - a * vec - beta * prev
            for b in basis:  # full reorthogonalization
                w -= (b @ w) * b
            beta = float(np.linalg.norm(w))
            tri = np.diag(alphas)
            if len(betas):
                off = np.array(betas)
                tri += np.diag(off, 1) + np.diag(off, -1)
            evals, evecs = np.linalg.eigh(tri)
            theta = float(evals[0])
            coeff = evecs[:, 0]
            ritz = np.zeros(n)
            for c, b in zip(coeff, basis):
                ritz += c * b
            resid = float(np.linalg.norm(op(ritz) - theta * ritz))
            matvecs += 1
            if resid < tol or beta < 1e-14 or k == n - 1:
                return theta
            betas.append(beta)
            prev = vec
            vec = w / beta
        start = ritz  # restart from the best Ritz vector
    raise InputError("eigensolver failed to converge within the iteration cap")


def spectral_gap_dense(g: Graph) -> float:
    """Dense-eigensolve oracle for the normalized Laplacian gap."""
    if g.node_count < 2:
        raise InputError("spectral gap needs at least 2 nodes")
    if not _is_connected(g):
        raise InputError("graph is disconnected; operate on components")
    n = g.node_count
    a = np.zeros((n, n))
    for v in range(n):
        for u in g.neighbors(v):
            a[v, u] = 1.0
    d = g.degrees.astype(np.float64)
    inv_sqrt = 1.0 / np.sqrt(d)
    lap = np.eye(n) - (inv_sqrt[:, None] * a * inv_sqrt[None, :])
    evals = np.linalg.eigvalsh(lap)
    return float(evals[1])


@dataclass
class GroundTruthCluster:
    feature: str
    value: int
    members: frozenset
    volume: int
    conductance: Fraction
    gap: float


def filter_ground_truth(
    g: Graph,
    table: FeatureTable,
    min_volume: int = 1000,
    max_conductance: float = 0.5,
    min_gap: float = 0.5,
) -> list[GroundTruthCluster]:
    """Feature-value groups passing the volume / conductance / gap filter.

    gap is the induced subgraph's spectral gap divided by the group's cut
    conductance in the full graph. Groups whose induced subgraph is
    disconnected are skipped with a warning (their gap would be 0 and
    they would fail the filter regardless).
    """
    if table.node_ids.size and int(table.node_ids.max()) >= g.node_count:
        raise InputError("feature table refers to nodes beyond the graph")
    kept = []
    for feature in table.columns:
        for value, members in sorted(table.groups(feature).items()):
            vol = volume(g, members)
            if vol <= min_volume:
                continue
            if len(members) >= g.node_count:
                continue  # conductance undefined for the full vertex set
            phi = conductance(g, members).conductance
            if float(phi) >= max_conductance or phi == 0:
                continue
            if len(members) < 2:
                continue
            sub, _ = induced_subgraph(g, members)
            if not _is_connected(sub):
                warnings.warn(
                    f"cluster {feature}={value} induces a disconnected subgraph; skipped",
                    stacklevel=2,
                )
                continue
            lam = spectral_gap(sub)
            gap = lam / float(phi)
            if gap > min_gap:
                kept.append(
                    GroundTruthCluster(feature, int(value), members, vol, phi, gap)
                )
    return kept


def sigma2_lower_bound_estimate(
    g: Graph, b: Iterable[int], samples: int = 200, rng_seed: int = 0
) -> float:
    """Sampled diagnostic for the smoothness ratio of a cluster.

    Draws random subsets T of b with at most half its internal volume and
    returns the smallest observed value of
    |E(T, B-T)| / (|E(T, V-B)| * log2(vol(B)) * log2(1/phi_internal)).
    A lower bound estimate only; never a verified quantity.
    """
    members = sorted(frozenset(int(v) for v in b))
    if len(members) < 2:
        raise InputError("need at least 2 nodes")
    member_set = frozenset(members)
    sub, old_ids = induced_subgraph(g, member_set)
    vol_b = sub.total_volume
    if vol_b == 0:
        raise InputError("cluster has no internal edges")
    if len(members) <= BRUTE_FORCE_LIMIT:
        phi_s = float(set_conductance_bruteforce(g, member_set))
    else:
        phi_s = float(spectral_gap(sub)) / 2.0  # Cheeger-style proxy
    denom_scale = math.log2(max(vol_b, 2)) * math.log2(max(1.0 / max(phi_s, 1e-12), 2))
    rng = make_rng(rng_seed)
    best = float("inf")
    for _ in range(samples):
        size = int(rng.integers(1, len(members)))
        t = frozenset(int(v) for v in rng.choice(members, size=size, replace=False))
        vol_t = sum(sub.degree(int(np.searchsorted(old_ids, v))) for v in t)
        if vol_t > vol_b / 2 or vol_t == 0:
            continue
        internal = 0
        external = 0
        for v in t:
            for u in g.neighbors(v):
                u = int(u)
                if u in t:
                    continue
                if u in member_set:
                    internal += 1
                else:
                    external += 1
        if external == 0:
            continue
        best = min(best, internal / (external * denom_scale))
    return best
