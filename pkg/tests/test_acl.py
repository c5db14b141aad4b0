import numpy as np
import pytest

from crdkit import acl
from crdkit import graph as G
from crdkit.errors import InputError


def bridged_triangles():
    return G.Graph.from_edge_pairs([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def dense_ppr(g: G.Graph, seed: int, alpha: float) -> np.ndarray:
    """Oracle: exact lazy-walk PPR from the linear system."""
    n = g.node_count
    a = np.zeros((n, n))
    for v in range(n):
        for u in g.neighbors(v):
            a[v, u] = 1.0
    d = g.degrees.astype(float)
    walk = 0.5 * (np.eye(n) + a @ np.diag(1.0 / d))
    rhs = np.zeros(n)
    rhs[seed] = alpha
    return np.linalg.solve(np.eye(n) - (1 - alpha) * walk, rhs)


class TestApproxPpr:
    def test_alpha_one_absorbs_immediately(self):
        g = bridged_triangles()
        state = acl.approx_ppr(g, 1, 1.0, 1e-7)
        expect = np.zeros(6)
        expect[1] = 1.0
        assert np.allclose(state.p, expect)
        assert np.allclose(state.r, 0.0)

    def test_large_epsilon_no_pushes(self):
        g = bridged_triangles()  # every degree >= 2
        state = acl.approx_ppr(g, 0, 0.3, 1.0)
        assert state.pushes == 0
        assert state.p.sum() == 0.0
        assert state.r[0] == 1.0

    def test_single_edge_matches_dense_solution(self):
        g = G.Graph.from_edge_pairs([(0, 1)])
        eps = 1e-7
        state = acl.approx_ppr(g, 0, 0.5, eps)
        exact = dense_ppr(g, 0, 0.5)
        assert np.allclose(exact, [0.75, 0.25])
        assert np.all(np.abs(state.p - exact) <= eps * g.degrees + 1e-12)

    def test_conservation_and_termination(self):
        g = bridged_triangles()
        for alpha in (0.05, 0.3, 0.9):
            state = acl.approx_ppr(g, 0, alpha, 1e-7)
            assert abs(state.p.sum() + state.r.sum() - 1.0) < 1e-9
            assert np.all(state.r < 1e-7 * g.degrees)
            assert np.all(state.p >= 0) and np.all(state.r >= 0)

    def test_matches_dense_on_random_graphs(self):
        eps = 1e-6
        for seed in range(10):
            rng = G.make_rng(seed)
            n = int(rng.integers(3, 10))
            pairs = [(i, i + 1) for i in range(n - 1)]
            pairs += [
                (int(u), int(v))
                for u, v in rng.integers(0, n, size=(2 * n, 2))
                if u != v
            ]
            g = G.Graph.from_edge_pairs(pairs, node_count=n)
            alpha = float(rng.uniform(0.05, 0.95))
            state = acl.approx_ppr(g, 0, alpha, eps)
            exact = dense_ppr(g, 0, alpha)
            assert np.all(np.abs(state.p - exact) <= eps * g.degrees + 1e-12)

    def test_bad_inputs(self):
        g = bridged_triangles()
        with pytest.raises(InputError):
            acl.approx_ppr(g, 0, 0.0, 1e-7)
        with pytest.raises(InputError):
            acl.approx_ppr(g, 0, 0.5, 0.0)
        iso = G.Graph.from_edge_pairs([(0, 1)], node_count=3)
        with pytest.raises(InputError):
            acl.approx_ppr(iso, 2, 0.5, 1e-7)


class TestAclCluster:
    def test_bridged_triangles(self):
        g = bridged_triangles()
        cut = acl.acl_cluster(g, 1, 0.1, 1e-7)
        assert cut.side == {0, 1, 2}
        assert float(cut.conductance) == pytest.approx(1 / 7)

    def test_alpha_one_returns_seed(self):
        g = bridged_triangles()
        cut = acl.acl_cluster(g, 1, 1.0, 1e-7)
        assert cut.side == {1}

    def test_clean_grid_center(self):
        g = G.generate_grid(60, 60, 0.0, 0)
        center = 30 * 60 + 30
        cut = acl.acl_cluster(g, center, 0.05, 1e-7)
        assert float(cut.conductance) <= 0.1


class TestAlphaGrid:
    def test_grid_points(self):
        assert acl.alpha_grid(0.4) == pytest.approx([0.2, 0.35, 0.5, 0.65])

    def test_degenerate_lambda_two_clamps(self):
        # raw grid [1, 1.75, 2.5, 3.25] clamps into the probability domain
        assert acl.alpha_grid(2.0) == [1.0]

    def test_out_of_range(self):
        with pytest.raises(InputError):
            acl.alpha_grid(0.0)
        with pytest.raises(InputError):
            acl.alpha_grid(2.5)

    def test_identical_runs_return_that_set(self):
        g = bridged_triangles()
        cuts = {cut.side for _, cut, _ in acl.acl_grid_cuts(g, 0, 0.4, 1e-7)}
        assert cuts == {frozenset({0, 1, 2})}
        assert acl.acl_grid_runs(g, 0, 0.4, 1e-7).side == {0, 1, 2}

    def test_triangle_gap_recovers_triangle(self):
        from crdkit.evaluation import spectral_gap

        g = bridged_triangles()
        sub, _ = G.induced_subgraph(g, {0, 1, 2})
        lam = spectral_gap(sub)
        assert lam == pytest.approx(1.5, abs=1e-8)
        cut = acl.acl_grid_runs(g, 0, min(lam, 2.0), 1e-7)
        assert cut.side == {0, 1, 2}
