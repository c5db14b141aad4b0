from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crdkit import graph as G
from crdkit.errors import InputError, ParseError


def bridged_triangles() -> G.Graph:
    # left triangle {0,1,2}, right triangle {3,4,5}, bridge 2-3
    return G.Graph.from_edge_pairs([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def k4() -> G.Graph:
    return G.Graph.from_edge_pairs([(i, j) for i in range(4) for j in range(i + 1, 4)])


@st.composite
def small_graphs(draw, max_nodes=12):
    n = draw(st.integers(2, max_nodes))
    pairs = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
            min_size=1,
            max_size=3 * n,
        )
    )
    pairs = [(u, v) for u, v in pairs if u != v]
    if not pairs:
        pairs = [(0, 1)]
    return G.Graph.from_edge_pairs(pairs, node_count=n)


class TestLoadEdgeList:
    def test_small_path(self):
        g = G.load_edge_list("0 1\n1 2")
        assert g.node_count == 3
        assert g.edge_count == 2
        assert g.degrees.tolist() == [1, 2, 1]

    def test_duplicates_and_self_loops_dropped(self):
        g = G.load_edge_list("0 1\n1 0\n1 1")
        assert g.node_count == 2
        assert g.edge_count == 1

    def test_comments_and_blank_lines(self):
        g = G.load_edge_list("# header\n\n0 1\n# trailing\n1 2\n")
        assert g.edge_count == 2

    def test_one_based(self):
        g = G.load_edge_list("1 2\n2 3", indexing="one-based")
        assert g.node_count == 3
        assert g.has_edge(0, 1) and g.has_edge(1, 2)

    def test_malformed_token_reports_line(self):
        with pytest.raises(ParseError, match="line 2"):
            G.load_edge_list("0 1\n1 x")

    def test_wrong_token_count(self):
        with pytest.raises(ParseError, match="two tokens"):
            G.load_edge_list("0 1 2")

    def test_negative_after_normalization(self):
        with pytest.raises(InputError, match="negative"):
            G.load_edge_list("0 1", indexing="one-based")

    def test_round_trip(self):
        g = bridged_triangles()
        again = G.load_edge_list(G.edge_list_text(g))
        assert again.edge_count == g.edge_count
        assert again.degrees.tolist() == g.degrees.tolist()


class TestVolume:
    def test_k4_single_vertex(self):
        assert G.volume(k4(), {0}) == 3

    def test_grid_corner_block(self):
        # independent oracle: enumerate lattice edges by coordinates
        g = G.generate_grid(60, 60, 0.0, 0)
        block = {y * 60 + x for x in range(30) for y in range(30)}
        internal = 2 * (30 * 29 + 29 * 30)
        boundary = 30 + 30  # one right edge per row, one down edge per column
        assert internal + boundary == 3540
        assert G.volume(g, block) == 3540

    def test_empty(self):
        assert G.volume(k4(), set()) == 0

    def test_out_of_range(self):
        with pytest.raises(InputError):
            G.volume(k4(), {7})


class TestConductance:
    def test_single_edge(self):
        g = G.load_edge_list("0 1")
        assert G.conductance(g, {0}).conductance == 1

    def test_bridged_triangles(self):
        cut = G.conductance(bridged_triangles(), {0, 1, 2})
        assert cut.conductance == Fraction(1, 7)
        assert cut.boundary_edges == 1
        assert cut.side_volume == 7

    def test_empty_and_full_rejected(self):
        g = k4()
        with pytest.raises(InputError):
            G.conductance(g, set())
        with pytest.raises(InputError):
            G.conductance(g, range(4))

    @settings(max_examples=60, deadline=None)
    @given(small_graphs(), st.data())
    def test_complement_symmetry(self, g, data):
        size = data.draw(st.integers(1, g.node_count - 1))
        side = frozenset(range(size))
        comp = frozenset(range(g.node_count)) - side
        if min(G.volume(g, side), G.volume(g, comp)) == 0:
            return
        assert G.conductance(g, side).conductance == G.conductance(g, comp).conductance


class TestInducedSubgraph:
    def test_k4_triangle(self):
        sub, ids = G.induced_subgraph(k4(), {0, 1, 2})
        assert sub.node_count == 3 and sub.edge_count == 3
        assert ids.tolist() == [0, 1, 2]

    def test_bridge_dropped(self):
        sub, ids = G.induced_subgraph(bridged_triangles(), {3, 4, 5})
        assert sub.edge_count == 3
        assert ids.tolist() == [3, 4, 5]

    def test_single_vertex(self):
        sub, _ = G.induced_subgraph(k4(), {2})
        assert sub.node_count == 1 and sub.edge_count == 0

    @settings(max_examples=40, deadline=None)
    @given(small_graphs(), st.data())
    def test_internal_cuts_match_restricted_counting(self, g, data):
        # conductance of a cut inside the induced subgraph equals the same
        # quantity counted on the original graph restricted to the set
        b_size = data.draw(st.integers(2, g.node_count))
        b = sorted(data.draw(st.permutations(range(g.node_count)))[:b_size])
        sub, old_ids = G.induced_subgraph(g, b)
        t_size = data.draw(st.integers(1, len(b) - 1))
        t_new = set(range(t_size))
        t_old = {int(old_ids[i]) for i in t_new}
        boundary = sum(
            1
            for v in t_old
            for u in g.neighbors(v)
            if int(u) in set(b) and int(u) not in t_old
        )
        vol_t = sum(
            1 for v in t_old for u in g.neighbors(v) if int(u) in set(b)
        )
        vol_rest = sub.total_volume - vol_t
        if min(vol_t, vol_rest) == 0:
            return
        expected = Fraction(boundary, min(vol_t, vol_rest))
        assert G.conductance(sub, t_new).conductance == expected


class TestGenerateGrid:
    def test_clean_lattice_counts(self):
        g = G.generate_grid(60, 60, 0.0, 0)
        assert g.node_count == 3600
        assert g.edge_count == 7080
        assert set(np.unique(g.degrees)) <= {2, 3, 4}

    def test_2x2_cycle(self):
        g = G.generate_grid(2, 2, 0.0, 0)
        assert g.node_count == 4
        assert g.degrees.tolist() == [2, 2, 2, 2]

    def test_noise_adds_exactly_the_trial_count(self):
        g = G.generate_grid(60, 60, 0.05, 7)
        assert g.edge_count == 7080 + 180

    def test_deterministic(self):
        a = G.generate_grid(12, 9, 0.3, 42)
        b = G.generate_grid(12, 9, 0.3, 42)
        assert a.indices.tolist() == b.indices.tolist()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 9), st.integers(2, 9))
    def test_edge_count_formula(self, w, h):
        g = G.generate_grid(w, h, 0.0, 0)
        assert g.edge_count == 2 * w * h - w - h

    def test_bad_params(self):
        with pytest.raises(InputError):
            G.generate_grid(1, 5)
        with pytest.raises(InputError):
            G.generate_grid(4, 4, noise_prob=1.5)


class TestGeneratePathStar:
    def test_small_instance(self):
        g, b = G.generate_path_star(3, 2, 5)
        assert len(b) == 7
        cut = G.conductance(g, b)
        assert cut.boundary_edges == 1
        # vol(B) = 13, outside volume = 9: the outside is the smaller side
        assert cut.conductance == Fraction(1, 9)

    def test_smallest_instance(self):
        g, b = G.generate_path_star(2, 1, 1)
        assert len(b) == 3
        assert G.volume(g, b) == 5  # hub degree 3, two leaves

    def test_long_paths_phi(self):
        g, b = G.generate_path_star(10, 40, 1000)
        cut = G.conductance(g, b)
        assert G.volume(g, b) == 2 * 10 * 40 + 1
        assert cut.conductance == Fraction(1, 801)

    def test_bad_params(self):
        with pytest.raises(InputError):
            G.generate_path_star(1, 4, 2)


def enumerate_prefix_conductances(g, order):
    """Brute-force oracle for sweep_cut."""
    best = None
    members = set()
    limit = min(len(order), g.node_count - 1)
    for i in range(limit):
        members.add(order[i])
        vol = G.volume(g, members)
        if min(vol, g.total_volume - vol) == 0:
            continue
        phi = G.conductance(g, members).conductance
        if best is None or phi < best[0]:
            best = (phi, i)
    return best


class TestSweepCut:
    def test_bridged_triangles_prefix(self):
        g = bridged_triangles()
        order = [0, 1, 2, 3, 4, 5]
        oracle = enumerate_prefix_conductances(g, order)
        cut = G.sweep_cut(g, order)
        assert cut.conductance == oracle[0] == Fraction(1, 7)
        assert cut.side == {0, 1, 2}

    def test_path_prefers_shorter_on_tie(self):
        # every proper prefix of the path has conductance 1; ties break short
        g = G.load_edge_list("0 1\n1 2")
        oracle = enumerate_prefix_conductances(g, [0, 1, 2])
        cut = G.sweep_cut(g, [0, 1, 2])
        assert cut.conductance == oracle[0] == 1
        assert cut.side == {0}

    def test_full_order_skips_whole_set(self):
        g = k4()
        cut = G.sweep_cut(g, [0, 1, 2, 3])
        assert len(cut.side) < 4

    def test_duplicates_rejected(self):
        with pytest.raises(InputError):
            G.sweep_cut(k4(), [0, 0, 1])

    @settings(max_examples=80, deadline=None)
    @given(small_graphs(), st.randoms(use_true_random=False))
    def test_matches_bruteforce(self, g, rnd):
        order = list(range(g.node_count))
        rnd.shuffle(order)
        oracle = enumerate_prefix_conductances(g, order)
        if oracle is None:
            return
        cut = G.sweep_cut(g, order)
        assert cut.conductance == oracle[0]
        assert cut.side == frozenset(order[: oracle[1] + 1])


class TestGraphInvariants:
    @settings(max_examples=60, deadline=None)
    @given(small_graphs())
    def test_adjacency_symmetric_and_sorted(self, g):
        for v in range(g.node_count):
            row = g.neighbors(v)
            assert np.all(np.diff(row) > 0) or row.size <= 1
            for u in row:
                assert g.has_edge(int(u), v)
        assert g.total_volume == int(g.degrees.sum())

    def test_asymmetric_input_rejected(self):
        indptr = np.array([0, 1, 1])
        indices = np.array([1])
        with pytest.raises(InputError):
            G.Graph(2, indptr, indices)

    def test_immutable(self):
        g = k4()
        with pytest.raises(ValueError):
            g.indices[0] = 3


class TestFeatureTable:
    TEXT = "node_id\tdorm\tyear\n0\t1\t2009\n1\t1\t0\n2\t2\t2009\n3\t0\t2009\n"

    def test_parse_and_group(self):
        table = G.load_feature_table(self.TEXT)
        groups = table.groups("dorm")
        assert groups == {1: frozenset({0, 1}), 2: frozenset({2})}
        assert table.groups("year")[2009] == frozenset({0, 2, 3})

    def test_missing_sentinel_excluded(self):
        table = G.load_feature_table(self.TEXT)
        assert all(3 not in s for s in table.groups("dorm").values())

    def test_bad_header(self):
        with pytest.raises(ParseError):
            G.load_feature_table("id\tdorm\n0\t1\n")

    def test_bad_value(self):
        with pytest.raises(ParseError, match="line 3"):
            G.load_feature_table("node_id\tdorm\n0\t1\n1\tx\n")

    def test_unknown_feature(self):
        table = G.load_feature_table(self.TEXT)
        with pytest.raises(InputError):
            table.groups("major")
