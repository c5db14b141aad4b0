"""Input validation helpers for the estimator layer."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .graph import Graph


def check_graph(X) -> Graph:
    """Coerce estimator input into a Graph.

    Accepts a Graph, a square dense 0/1 adjacency array, or a scipy sparse
    adjacency matrix. Adjacency input must be symmetric, unweighted, and
    free of self-loops (weighted graphs are out of scope).
    """
    if isinstance(X, Graph):
        return X
    if sp.issparse(X):
        coo = X.tocoo()
        if coo.shape[0] != coo.shape[1]:
            raise InputError("adjacency matrix must be square")
        if coo.data.size and not np.all(coo.data == 1):
            raise InputError("adjacency must be unweighted (all entries 0 or 1)")
        pairs = [(int(u), int(v)) for u, v in zip(coo.row, coo.col) if u < v]
        reverse = {(int(v), int(u)) for u, v in zip(coo.row, coo.col) if u > v}
        if set(pairs) != reverse:
            raise InputError("adjacency matrix must be symmetric")
        if np.any(coo.row == coo.col):
            raise InputError("self-loops are not supported")
        return Graph.from_edge_pairs(pairs, node_count=coo.shape[0])
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError("adjacency matrix must be square")
    if not np.array_equal(arr, arr.T):
        raise InputError("adjacency matrix must be symmetric")
    if np.any(np.diag(arr) != 0):
        raise InputError("self-loops are not supported")
    if not np.all(np.isin(arr, (0, 1))):
        raise InputError("adjacency must be unweighted (all entries 0 or 1)")
    rows, cols = np.nonzero(arr)
    pairs = [(int(u), int(v)) for u, v in zip(rows, cols) if u < v]
    return Graph.from_edge_pairs(pairs, node_count=arr.shape[0])


def check_seed(g: Graph, seed_node) -> int:
    seed = int(seed_node)
    if seed < 0 or seed >= g.node_count:
        raise InputError(f"seed node {seed} out of range")
    if g.degree(seed) < 1:
        raise InputError("seed node is isolated")
    return seed
