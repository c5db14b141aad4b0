"""Scikit-learn style estimators wrapping the diffusion and PageRank cores.

Both estimators consume an adjacency structure (Graph, dense 0/1 array, or
scipy sparse matrix) in fit and expose the found cluster through labels_
(0 for members, -1 for the rest), so fit_predict composes with the usual
scikit-learn tooling, and get_params/set_params make the teleportation and
effort parameters grid-searchable.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from . import acl, crd
from .errors import InputError
from .graph import conductance as graph_conductance
from .graph import sweep_cut
from .validation import check_graph, check_seed


class CapacityReleasingDiffusion(ClusterMixin, BaseEstimator):
    """Seeded local clustering by capacity releasing diffusion.

    Parameters
    ----------
    seed_node : int
        Node the diffusion starts from.
    phi : Fraction | float | str
        Effort parameter; the inner step certifies bottlenecks of
        conductance at most 4 * phi. Fraction text like "1/3" is accepted.
    tau : Fraction | float | str
        Early-termination threshold on surviving mass, in (0, 1).
    max_steps : int
        Doubling iterations to run when the mass test never fires.
    cluster_from : {"sweep", "inner-cut", "recovered"}
        Which terminal object becomes the reported cluster: the best
        label-sweep cut over all iterations (default), the last inner
        step's certificate cut, or the set of nodes holding at least
        their degree in mass.

    Attributes
    ----------
    labels_ : ndarray of shape (n_nodes,) with 0 for cluster members, -1 otherwise.
    cluster_ : frozenset of member node ids.
    conductance_ : float of the reported cluster (nan for "recovered" on
        degenerate sets).
    mass_ : ndarray of the final truncated mass vector.
    result_ : the underlying OuterResult (trace, counters, certificate cut).
    """

    def __init__(
        self,
        seed_node: int = 0,
        phi=Fraction(1, 3),
        tau=Fraction(1, 2),
        max_steps: int = 20,
        cluster_from: str = "sweep",
    ):
        self.seed_node = seed_node
        self.phi = phi
        self.tau = tau
        self.max_steps = max_steps
        self.cluster_from = cluster_from

    def fit(self, X, y=None):
        g = check_graph(X)
        seed = check_seed(g, self.seed_node)
        if self.cluster_from not in ("sweep", "inner-cut", "recovered"):
            raise InputError(f"unknown cluster_from {self.cluster_from!r}")
        result = crd.crd_outer(g, seed, self.phi, self.tau, self.max_steps)
        self.result_ = result
        self.recovered_ = crd.extract_recovered_set(g, result.mass)
        if self.cluster_from == "recovered":
            cluster = self.recovered_
            conductance = np.nan
            if 0 < len(cluster) < g.node_count:
                conductance = float(graph_conductance(g, cluster).conductance)
        else:
            cut = result.cut if self.cluster_from == "inner-cut" else result.best_sweep
            if cut is None:
                cut = result.best_sweep
            if cut is None:
                raise InputError("diffusion produced no cluster")
            cluster = cut.side
            conductance = float(cut.conductance)
        self.cluster_ = frozenset(cluster)
        self.conductance_ = conductance
        self.mass_ = result.mass
        labels = np.full(g.node_count, -1, dtype=np.int64)
        labels[sorted(self.cluster_)] = 0
        self.labels_ = labels
        return self


class ACLClustering(ClusterMixin, BaseEstimator):
    """Seeded local clustering by approximate personalized PageRank.

    Runs the lazy push approximation from the seed with teleportation
    probability alpha and residual tolerance epsilon, then reports the
    minimum-conductance sweep prefix.
    """

    def __init__(self, seed_node: int = 0, alpha: float = 0.1, epsilon: float = 1e-7):
        self.seed_node = seed_node
        self.alpha = alpha
        self.epsilon = epsilon

    def fit(self, X, y=None):
        g = check_graph(X)
        seed = check_seed(g, self.seed_node)
        state = acl.approx_ppr(g, seed, self.alpha, self.epsilon)
        self.ppr_ = state.p
        self.residual_ = state.r
        order = acl.ppr_sweep_order(g, state)
        if not order:
            raise InputError("PageRank vector is empty; epsilon too large to push at all")
        cut = sweep_cut(g, order)
        self.cluster_ = cut.side
        self.conductance_ = float(cut.conductance)
        labels = np.full(g.node_count, -1, dtype=np.int64)
        labels[sorted(cut.side)] = 0
        self.labels_ = labels
        return self
