import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.base import clone

from crdkit import ACLClustering, CapacityReleasingDiffusion
from crdkit import graph as G
from crdkit.errors import InputError
from crdkit.validation import check_graph


def planted_clique():
    lattice = G.generate_grid(10, 10, 0.0, 0)
    pairs = list(lattice.edges())
    members = list(range(100, 110))
    pairs += [(i, j) for i in members for j in members if i < j]
    pairs.append((0, 100))
    return G.Graph.from_edge_pairs(pairs), frozenset(members)


def to_sparse(g):
    rows, cols = [], []
    for u, v in g.edges():
        rows += [u, v]
        cols += [v, u]
    data = np.ones(len(rows))
    return sp.csr_matrix((data, (rows, cols)), shape=(g.node_count, g.node_count))


class TestCheckGraph:
    def test_graph_passthrough(self):
        g = planted_clique()[0]
        assert check_graph(g) is g

    def test_sparse_and_dense_agree(self):
        g, _ = planted_clique()
        sparse = check_graph(to_sparse(g))
        dense = check_graph(to_sparse(g).toarray())
        assert sparse.degrees.tolist() == g.degrees.tolist()
        assert dense.indices.tolist() == g.indices.tolist()

    def test_asymmetric_rejected(self):
        m = np.zeros((3, 3))
        m[0, 1] = 1
        with pytest.raises(InputError, match="symmetric"):
            check_graph(m)

    def test_weighted_rejected(self):
        m = np.zeros((2, 2))
        m[0, 1] = m[1, 0] = 2.5
        with pytest.raises(InputError, match="unweighted"):
            check_graph(m)

    def test_self_loop_rejected(self):
        m = np.eye(3)
        with pytest.raises(InputError, match="self-loop"):
            check_graph(m)


class TestCapacityReleasingDiffusion:
    def test_finds_planted_cluster(self):
        g, clique = planted_clique()
        est = CapacityReleasingDiffusion(seed_node=105).fit(g)
        assert est.cluster_ == clique
        assert est.conductance_ == pytest.approx(1 / 91)
        assert set(np.flatnonzero(est.labels_ == 0)) == clique

    def test_fit_predict_matches_labels(self):
        g, _ = planted_clique()
        est = CapacityReleasingDiffusion(seed_node=105)
        labels = est.fit_predict(g)
        assert labels.tolist() == est.labels_.tolist()

    def test_matrix_inputs_agree(self):
        g, clique = planted_clique()
        for X in (to_sparse(g), to_sparse(g).toarray()):
            est = CapacityReleasingDiffusion(seed_node=105).fit(X)
            assert est.cluster_ == clique

    def test_cluster_from_variants(self):
        g, clique = planted_clique()
        sweep = CapacityReleasingDiffusion(seed_node=105, cluster_from="sweep").fit(g)
        inner = CapacityReleasingDiffusion(seed_node=105, cluster_from="inner-cut").fit(g)
        recovered = CapacityReleasingDiffusion(seed_node=105, cluster_from="recovered").fit(g)
        assert sweep.cluster_ == inner.cluster_ == clique
        assert clique <= recovered.cluster_

    def test_get_set_params_and_clone(self):
        est = CapacityReleasingDiffusion(seed_node=7, max_steps=5)
        params = est.get_params()
        assert params["seed_node"] == 7 and params["max_steps"] == 5
        twin = clone(est)
        assert twin.get_params() == params
        est.set_params(seed_node=3)
        assert est.seed_node == 3

    def test_param_string_ratios(self):
        g, clique = planted_clique()
        est = CapacityReleasingDiffusion(seed_node=105, phi="1/3", tau="0.5").fit(g)
        assert est.cluster_ == clique

    def test_unknown_cluster_rule(self):
        g, _ = planted_clique()
        with pytest.raises(InputError):
            CapacityReleasingDiffusion(seed_node=0, cluster_from="best").fit(g)


class TestACLClustering:
    def test_finds_planted_cluster(self):
        g, clique = planted_clique()
        est = ACLClustering(seed_node=105, alpha=0.2).fit(g)
        assert est.cluster_ == clique
        assert est.ppr_.sum() + est.residual_.sum() == pytest.approx(1.0, abs=1e-9)

    def test_clone_round_trip(self):
        est = ACLClustering(seed_node=2, alpha=0.4, epsilon=1e-5)
        assert clone(est).get_params() == est.get_params()

    def test_isolated_seed_rejected(self):
        g = G.Graph.from_edge_pairs([(0, 1)], node_count=3)
        with pytest.raises(InputError):
            ACLClustering(seed_node=2).fit(g)
