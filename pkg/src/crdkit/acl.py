"""Approximate personalized PageRank with sweep-cut extraction.

The push rule is the lazy-walk variant: a push at v settles alpha * r(v)
into p(v), spreads (1 - alpha) * r(v) / (2 d(v)) to each neighbor, and
keeps (1 - alpha) * r(v) / 2 at v. Pushing continues while any node
holds residual at least epsilon times its degree, processed FIFO for
determinism.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import CutResult, Graph, sweep_cut


@dataclass
class PprState:
    """Approximate PageRank vector p, residual r, and run accounting."""

    p: np.ndarray
    r: np.ndarray
    alpha: float
    epsilon: float
    pushes: int
    touched_volume: int


def approx_ppr(g: Graph, seed: int, alpha: float, epsilon: float) -> PprState:
    """Push residual mass from the seed until every r(v) < epsilon * d(v)."""
    if not 0 < alpha <= 1:
        raise InputError("alpha must lie in (0, 1]")
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    if seed < 0 or seed >= g.node_count:
        raise InputError(f"seed node {seed} out of range")
    if g.degree(seed) < 1:
        raise InputError("seed node is isolated")
    n = g.node_count
    deg = g.degrees.tolist()
    p = [0.0] * n
    r = [0.0] * n
    r[seed] = 1.0
    in_queue = [False] * n
    queue: deque[int] = deque()
    if r[seed] >= epsilon * deg[seed]:
        queue.append(seed)
        in_queue[seed] = True
    adj_cache: dict[int, list[int]] = {}
    touched = 0
    pushes = 0
    keep = (1.0 - alpha) / 2.0
    while queue:
        v = queue.popleft()
        in_queue[v] = False
        rv = r[v]
        dv = deg[v]
        if rv < epsilon * dv:
            continue
        adj = adj_cache.get(v)
        if adj is None:
            adj = g.neighbors(v).tolist()
            adj_cache[v] = adj
            touched += dv
        p[v] += alpha * rv
        share = keep * rv / dv
        r[v] = keep * rv
        pushes += 1
        if r[v] >= epsilon * dv:
            queue.append(v)
            in_queue[v] = True
        for u in adj:
            ru = r[u] + share
            r[u] = ru
            if not in_queue[u] and ru >= epsilon * deg[u]:
                queue.append(u)
                in_queue[u] = True
    return PprState(
        np.array(p), np.array(r), float(alpha), float(epsilon), pushes, touched
    )


def ppr_sweep_order(g: Graph, state: PprState) -> list[int]:
    """Nodes with positive p, ranked by p / degree descending (id breaks ties)."""
    nodes = [v for v in range(g.node_count) if state.p[v] > 0.0]
    nodes.sort(key=lambda v: (-state.p[v] / g.degrees[v], v))
    return nodes


def acl_cluster(g: Graph, seed: int, alpha: float, epsilon: float) -> CutResult:
    """Approximate PPR from the seed, then the best sweep-cut prefix."""
    state = approx_ppr(g, seed, alpha, epsilon)
    order = ppr_sweep_order(g, state)
    if not order:
        raise InputError("PageRank vector is empty; epsilon too large to push at all")
    return sweep_cut(g, order)


def alpha_grid(lam: float) -> list[float]:
    """Four evenly spaced teleportation values spanning [lam/2, 2*lam].

    Grid points are lam/2 + i * (2*lam - lam/2) / 4 for i = 0..3; values
    above 1 are clamped into the probability domain and duplicates
    collapse (order preserved).
    """
    if not 0 < lam <= 2:
        raise InputError("gap estimate must lie in (0, 2]")
    step = (2 * lam - lam / 2) / 4
    values = []
    for i in range(4):
        a = min(lam / 2 + i * step, 1.0)
        if a not in values:
            values.append(a)
    return values


def acl_grid_cuts(
    g: Graph, seed: int, lam: float, epsilon: float
) -> list[tuple[float, CutResult, int]]:
    """(alpha, sweep cut, touched volume) per grid alpha, in grid order."""
    out = []
    for a in alpha_grid(lam):
        state = approx_ppr(g, seed, a, epsilon)
        order = ppr_sweep_order(g, state)
        if not order:
            raise InputError("PageRank vector is empty; epsilon too large to push at all")
        out.append((a, sweep_cut(g, order), state.touched_volume))
    return out


def acl_grid_runs(g: Graph, seed: int, lam: float, epsilon: float) -> CutResult:
    """Lowest-conductance sweep cut over the alpha grid (ties: smaller alpha)."""
    best: CutResult | None = None
    for _, cut, _ in acl_grid_cuts(g, seed, lam, epsilon):
        if best is None or cut.conductance < best.conductance:
            best = cut
    return best
