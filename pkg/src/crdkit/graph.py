"""Immutable undirected graphs, ingestion, generators, and cut primitives.

Graphs are stored in compressed adjacency (CSR) form with a degree array.
Conductance values are exact integer ratios (fractions.Fraction) so that
tie-breaking and equality tests are deterministic.

All randomness in the generators comes from numpy's PCG64 generator seeded
explicitly, so derived outputs are reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError, ParseError


@dataclass(frozen=True)
class CutResult:
    """One side of a cut, its volume, boundary size, and exact conductance."""

    side: frozenset
    side_volume: int
    boundary_edges: int
    conductance: Fraction

    def __float__(self) -> float:
        return float(self.conductance)


class Graph:
    """Undirected simple graph in compressed sparse adjacency form.

    Immutable after construction: the underlying arrays are marked
    read-only, so one Graph can safely be shared across concurrent runs.
    """

    __slots__ = ("node_count", "indptr", "indices", "degrees", "total_volume")

    def __init__(self, node_count: int, indptr: np.ndarray, indices: np.ndarray):
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        if indptr.shape != (node_count + 1,):
            raise InputError("indptr length must be node_count + 1")
        degrees = np.diff(indptr)
        self.node_count = node_count
        self.indptr = indptr
        self.indices = indices
        self.degrees = degrees
        self.total_volume = int(degrees.sum())
        self._validate()
        for arr in (self.indptr, self.indices, self.degrees):
            arr.setflags(write=False)

    def _validate(self) -> None:
        if self.node_count and self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.node_count:
                raise InputError("neighbor id out of range")
        seen = set()
        for v in range(self.node_count):
            row = self.neighbors(v)
            if row.size:
                if np.any(np.diff(row) <= 0):
                    raise InputError(f"adjacency of node {v} not sorted/duplicate-free")
                if np.any(row == v):
                    raise InputError(f"self-loop at node {v}")
            for u in row:
                seen.add((v, int(u)))
        for v, u in seen:
            if (u, v) not in seen:
                raise InputError(f"adjacency not symmetric: {v}->{u} has no reverse")

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return i < row.size and row[i] == v

    @property
    def edge_count(self) -> int:
        return self.total_volume // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each undirected edge once, as (u, v) with u < v."""
        for v in range(self.node_count):
            for u in self.neighbors(v):
                if v < u:
                    yield (v, int(u))

    @classmethod
    def from_edge_pairs(
        cls, pairs: Iterable[tuple[int, int]], node_count: int | None = None
    ) -> "Graph":
        """Build a Graph from (u, v) pairs, dropping self-loops and duplicates."""
        edges = set()
        max_id = -1
        for u, v in pairs:
            u, v = int(u), int(v)
            if u < 0 or v < 0:
                raise InputError(f"negative node id in edge ({u}, {v})")
            max_id = max(max_id, u, v)
            if u == v:
                continue
            edges.add((u, v) if u < v else (v, u))
        n = node_count if node_count is not None else max_id + 1
        if max_id >= n:
            raise InputError("edge endpoint exceeds declared node_count")
        deg = np.zeros(n, dtype=np.int64)
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.zeros(int(indptr[-1]), dtype=np.int64)
        cursor = indptr[:-1].copy()
        for u, v in sorted(edges):
            indices[cursor[u]] = v
            cursor[u] += 1
            indices[cursor[v]] = u
            cursor[v] += 1
        for v in range(n):
            indices[indptr[v] : indptr[v + 1]].sort()
        return cls(n, indptr, indices)


def load_edge_list(source: str | Iterable[str], indexing: str = "zero-based") -> Graph:
    """Parse a whitespace-separated edge list ('#' starts a comment line).

    `indexing` is "zero-based" or "one-based"; one-based ids are shifted
    down so the result is always zero-based.
    """
    if indexing not in ("zero-based", "one-based"):
        raise InputError(f"unknown indexing mode {indexing!r}")
    shift = 1 if indexing == "one-based" else 0
    lines = source.splitlines() if isinstance(source, str) else source
    pairs = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected two tokens, got {len(tokens)}", lineno)
        try:
            u, v = int(tokens[0]) - shift, int(tokens[1]) - shift
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise InputError(f"line {lineno}: negative node id after normalization")
        pairs.append((u, v))
    return Graph.from_edge_pairs(pairs)


def edge_list_text(g: Graph) -> str:
    """Render a graph back into the edge-list text format."""
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def _check_members(g: Graph, s: Iterable[int]) -> frozenset:
    members = frozenset(int(v) for v in s)
    for v in members:
        if v < 0 or v >= g.node_count:
            raise InputError(f"node id {v} out of range for graph with {g.node_count} nodes")
    return members


def volume(g: Graph, s: Iterable[int]) -> int:
    """Sum of degrees over the node set."""
    members = _check_members(g, s)
    return int(sum(g.degrees[v] for v in members))


def boundary_edge_count(g: Graph, s: Iterable[int]) -> int:
    """Number of edges with exactly one endpoint in the set."""
    members = _check_members(g, s)
    count = 0
    for v in members:
        for u in g.neighbors(v):
            if int(u) not in members:
                count += 1
    return count


def conductance(g: Graph, s: Iterable[int]) -> CutResult:
    """Exact conductance of the cut (s, complement).

    Undefined (InputError) for the empty set and the full vertex set.
    """
    members = _check_members(g, s)
    if not members:
        raise InputError("conductance undefined for the empty set")
    if len(members) == g.node_count:
        raise InputError("conductance undefined for the full vertex set")
    vol = volume(g, members)
    other = g.total_volume - vol
    # count boundary by scanning the smaller-volume side
    if vol <= other:
        boundary = boundary_edge_count(g, members)
    else:
        comp = frozenset(range(g.node_count)) - members
        boundary = boundary_edge_count(g, comp)
    denom = min(vol, other)
    if denom == 0:
        raise InputError("conductance undefined: one side has zero volume")
    return CutResult(members, vol, boundary, Fraction(boundary, denom))


def induced_subgraph(g: Graph, s: Iterable[int]) -> tuple[Graph, np.ndarray]:
    """Subgraph on s plus an array mapping new ids back to original ids."""
    members = _check_members(g, s)
    if not members:
        raise InputError("induced subgraph of an empty set")
    old_ids = np.array(sorted(members), dtype=np.int64)
    new_id = {int(v): i for i, v in enumerate(old_ids)}
    pairs = []
    for v in old_ids:
        for u in g.neighbors(int(v)):
            if int(u) in new_id and v < u:
                pairs.append((new_id[int(v)], new_id[int(u)]))
    return Graph.from_edge_pairs(pairs, node_count=len(old_ids)), old_ids


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide RNG: numpy PCG64, fully determined by the seed."""
    return np.random.Generator(np.random.PCG64(seed))


def generate_grid(width: int, height: int, noise_prob: float = 0.0, rng_seed: int = 0) -> Graph:
    """4-neighbor lattice with floor(noise_prob * n) random extra edges.

    Each noise trial connects one uniformly random currently-non-adjacent
    node pair, so every trial adds exactly one new edge.
    """
    if width < 2 or height < 2:
        raise InputError("grid dimensions must be at least 2x2")
    if not 0.0 <= noise_prob <= 1.0:
        raise InputError("noise_prob must lie in [0, 1]")
    n = width * height
    adjacency: list[set[int]] = [set() for _ in range(n)]

    def nid(x: int, y: int) -> int:
        return y * width + x

    for y in range(height):
        for x in range(width):
            if x + 1 < width:
                adjacency[nid(x, y)].add(nid(x + 1, y))
                adjacency[nid(x + 1, y)].add(nid(x, y))
            if y + 1 < height:
                adjacency[nid(x, y)].add(nid(x, y + 1))
                adjacency[nid(x, y + 1)].add(nid(x, y))
    rng = make_rng(rng_seed)
    trials = int(noise_prob * n)
    for _ in range(trials):
        while True:
            u = int(rng.integers(n))
            v = int(rng.integers(n))
            if u != v and v not in adjacency[u]:
                break
        adjacency[u].add(v)
        adjacency[v].add(u)
    pairs = [(u, v) for u in range(n) for v in adjacency[u] if u < v]
    return Graph.from_edge_pairs(pairs, node_count=n)


def generate_path_star(k: int, l: int, outside_degree: int) -> tuple[Graph, frozenset]:
    """Cluster of k length-l paths joined at a hub, leaking through one edge.

    The hub (node 0) carries the paths and a single edge to a high-degree
    outside node whose remaining outside_degree - 1 edges go to fresh
    pendant nodes. Returns the graph and the ground-truth cluster (hub
    plus all path nodes).
    """
    if k < 2 or l < 1 or outside_degree < 1:
        raise InputError("need k >= 2, l >= 1, outside_degree >= 1")
    hub = 0
    pairs = []
    node = 1
    cluster = {hub}
    for _ in range(k):
        prev = hub
        for _ in range(l):
            pairs.append((prev, node))
            cluster.add(node)
            prev = node
            node += 1
    outside = node
    node += 1
    pairs.append((hub, outside))
    for _ in range(outside_degree - 1):
        pairs.append((outside, node))
        node += 1
    return Graph.from_edge_pairs(pairs, node_count=node), frozenset(cluster)


def sweep_cut(g: Graph, order: Sequence[int]) -> CutResult:
    """Minimum-conductance prefix of a node ranking.

    Conductance of every proper prefix is evaluated incrementally; ties
    break toward the shorter prefix. The prefix equal to the whole vertex
    set is skipped (conductance undefined there).
    """
    seen = set()
    for v in order:
        v = int(v)
        if v in seen:
            raise InputError(f"duplicate node {v} in sweep order")
        if v < 0 or v >= g.node_count:
            raise InputError(f"node id {v} out of range")
        seen.add(v)
    if not order:
        raise InputError("sweep order is empty")
    total = g.total_volume
    in_prefix = [False] * g.node_count
    vol = 0
    boundary = 0
    best: tuple[Fraction, int] | None = None
    limit = len(order) if len(order) < g.node_count else g.node_count - 1
    for i, v in enumerate(order[:limit]):
        v = int(v)
        inside = sum(1 for u in g.neighbors(v) if in_prefix[u])
        boundary += g.degree(v) - 2 * inside
        vol += g.degree(v)
        in_prefix[v] = True
        denom = min(vol, total - vol)
        if denom == 0:
            continue
        phi = Fraction(boundary, denom)
        if best is None or phi < best[0]:
            best = (phi, i)
    if best is None:
        raise InputError("no prefix with positive volume on both sides")
    phi, idx = best
    side = frozenset(int(v) for v in order[: idx + 1])
    side_vol = volume(g, side)
    return CutResult(side, side_vol, boundary_edge_count(g, side), phi)


@dataclass
class FeatureTable:
    """Integer-coded node features; value 0 is the missing-data sentinel."""

    node_ids: np.ndarray
    columns: dict = field(default_factory=dict)

    def groups(self, feature: str) -> dict[int, frozenset]:
        """Node sets sharing each non-missing value of the feature."""
        if feature not in self.columns:
            raise InputError(f"unknown feature {feature!r}")
        values = self.columns[feature]
        out: dict[int, set] = {}
        for node, val in zip(self.node_ids, values):
            if val != 0:
                out.setdefault(int(val), set()).add(int(node))
        return {val: frozenset(s) for val, s in out.items()}


def load_feature_table(source: str | Iterable[str]) -> FeatureTable:
    """Parse a TSV feature table with header 'node_id<TAB>feat1<TAB>...'."""
    lines = source.splitlines() if isinstance(source, str) else list(source)
    rows = [line.rstrip("\n") for line in lines if line.strip()]
    if not rows:
        raise ParseError("empty feature table", 1)
    header = rows[0].split("\t")
    if header[0] != "node_id" or len(header) < 2:
        raise ParseError("header must be 'node_id<TAB>feat1...'", 1)
    features = header[1:]
    ids = []
    cols: list[list[int]] = [[] for _ in features]
    for lineno, row in enumerate(rows[1:], start=2):
        tokens = row.split("\t")
        if len(tokens) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(tokens)}", lineno)
        try:
            parsed = [int(t) for t in tokens]
        except ValueError:
            raise ParseError(f"non-integer value in {row!r}", lineno) from None
        if parsed[0] < 0:
            raise InputError(f"line {lineno}: negative node id")
        ids.append(parsed[0])
        for col, val in zip(cols, parsed[1:]):
            col.append(val)
    return FeatureTable(
        np.array(ids, dtype=np.int64),
        {name: np.array(col, dtype=np.int64) for name, col in zip(features, cols)},
    )
