import io
import random

import numpy as np
import pytest

from modmax import (EdgeListError, Graph, Partition, aggregate,
                    community_is_connected, load_edge_list, modularity,
                    read_partition, write_edge_list, write_partition)
from conftest import (barbell, erdos_renyi, graph_from_text, path3,
                      single_edge, triangle)


class TestLoadEdgeList:
    def test_single_unweighted_edge(self):
        g = single_edge()
        assert g.n == 2
        assert g.two_m == 2.0
        assert g.row(0) == [(1, 1.0)]
        assert g.row(1) == [(0, 1.0)]
        assert g.degrees.tolist() == [1.0, 1.0]

    def test_duplicate_edges_sum(self):
        g = graph_from_text("0 1 2\n1 0 3\n", weighted=True)
        assert g.row(0) == [(1, 5.0)]
        assert g.row(1) == [(0, 5.0)]
        assert g.two_m == 10.0

    def test_self_loop_stored_once(self):
        g = graph_from_text("0 0 2\n0 1 1\n", weighted=True)
        assert g.row(0) == [(0, 2.0), (1, 1.0)]
        assert g.degrees[0] == 3.0
        assert g.two_m == 4.0

    def test_zachary_counts(self, zachary):
        # 34 nodes and 78 unweighted edges in the standard public edge list
        assert zachary.n == 34
        assert zachary.two_m == 156.0
        assert zachary.edge_count() == 78
        zachary.validate()

    def test_comments_and_blank_lines_skipped(self):
        g = graph_from_text("# header\n\n0 1\n# trailing\n")
        assert g.n == 2

    def test_first_appearance_remap(self):
        g = graph_from_text("7 3\n3 9\n")
        assert g.node_labels.tolist() == [7, 3, 9]

    def test_unweighted_ignores_third_column(self):
        g = graph_from_text("0 1 5\n")
        assert g.two_m == 2.0

    def test_malformed_line_reports_lineno(self):
        with pytest.raises(EdgeListError, match="line 2"):
            graph_from_text("0 1\n0 1 2 3\n")

    def test_non_integer_node(self):
        with pytest.raises(EdgeListError, match="node id"):
            graph_from_text("a 1\n")

    def test_negative_node_id(self):
        with pytest.raises(EdgeListError, match="negative node id"):
            graph_from_text("-1 1\n")

    def test_negative_weight(self):
        with pytest.raises(EdgeListError, match="negative weight"):
            graph_from_text("0 1 -2\n", weighted=True)

    def test_roundtrip_identical(self):
        g = graph_from_text("7 3 1.5\n3 9 0.25\n9 9 2\n7 9 1\n", weighted=True)
        buf = io.StringIO()
        write_edge_list(buf, g)
        g2 = load_edge_list(buf.getvalue().encode(), weighted=True)
        assert g2.n == g.n
        assert np.array_equal(g2.indptr, g.indptr)
        assert np.array_equal(g2.indices, g.indices)
        assert np.array_equal(g2.weights, g.weights)
        assert np.array_equal(g2.node_labels, g.node_labels)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_roundtrip(self, seed):
        g = erdos_renyi(12, 0.3, seed, weighted=True)
        buf = io.StringIO()
        write_edge_list(buf, g)
        g2 = load_edge_list(buf.getvalue().encode(), weighted=True)
        assert np.array_equal(g2.indices, g.indices)
        assert np.array_equal(g2.weights, g.weights)
        g.validate()


class TestModularity:
    def test_single_edge_merged(self):
        assert modularity(single_edge(), Partition([0, 0])) == 0.0

    def test_single_edge_split(self):
        assert modularity(single_edge(), Partition([0, 1])) == -0.5

    def test_empty_graph_rejected(self):
        g = Graph([0], [], [])
        with pytest.raises(ValueError):
            modularity(g, Partition([]))

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            modularity(single_edge(), Partition([0]))

    @pytest.mark.parametrize("seed", range(8))
    def test_all_one_community_is_zero(self, seed):
        g = erdos_renyi(15, 0.3, seed, weighted=(seed % 2 == 0))
        q = modularity(g, Partition([0] * g.n))
        assert abs(q) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_relabeling_invariance(self, seed):
        g = erdos_renyi(15, 0.3, seed)
        rng = random.Random(seed)
        labels = [rng.randrange(4) for _ in range(g.n)]
        shuffled = [(label * 7 + 3) % 1000 for label in labels]
        assert modularity(g, Partition(labels)) == pytest.approx(
            modularity(g, Partition(shuffled)), abs=1e-14)

    def test_matches_networkx(self):
        nx = pytest.importorskip("networkx")
        rng = random.Random(11)
        g = erdos_renyi(20, 0.25, 11)
        labels = [rng.randrange(3) for _ in range(g.n)]
        ng = nx.Graph()
        ng.add_nodes_from(range(g.n))
        for i in range(g.n):
            for j, w in g.row(i):
                if i <= j:
                    ng.add_edge(i, j)
        communities = {}
        for node, c in enumerate(labels):
            communities.setdefault(c, set()).add(node)
        expected = nx.algorithms.community.modularity(ng, communities.values())
        assert modularity(g, Partition(labels)) == pytest.approx(expected, abs=1e-12)


class TestAggregate:
    def test_triangle_single_community(self):
        agg = aggregate(triangle(), Partition([0, 0, 0]))
        assert agg.n == 1
        assert agg.row(0) == [(0, 6.0)]
        assert agg.degrees[0] == 6.0
        assert agg.two_m == 6.0

    def test_singletons_identity(self):
        g = single_edge()
        agg = aggregate(g, Partition([0, 1]))
        assert agg.n == 2
        assert np.array_equal(agg.indices, g.indices)
        assert np.array_equal(agg.weights, g.weights)

    def test_barbell_two_communities(self):
        agg = aggregate(barbell(), Partition([0, 0, 0, 1, 1, 1]))
        assert agg.n == 2
        assert agg.row(0) == [(0, 6.0), (1, 1.0)]
        assert agg.row(1) == [(0, 1.0), (1, 6.0)]

    def test_degrees_and_two_m_preserved(self):
        g = erdos_renyi(20, 0.3, 3, weighted=True)
        p = Partition([i % 4 for i in range(g.n)])
        agg = aggregate(g, p)
        assert agg.two_m == pytest.approx(g.two_m, rel=1e-14)
        labels = p.compacted().assignment
        for c in range(agg.n):
            expected = g.degrees[labels == c].sum()
            assert agg.degrees[c] == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_modularity_preserved(self, seed):
        g = erdos_renyi(18, 0.25, seed, weighted=(seed % 2 == 0))
        rng = random.Random(100 + seed)
        p = Partition([rng.randrange(5) for _ in range(g.n)])
        agg = aggregate(g, p)
        q_fine = modularity(g, p)
        q_coarse = modularity(agg, Partition.singletons(agg.n))
        assert abs(q_fine - q_coarse) <= 1e-12


class TestConnectivity:
    def test_disconnected_pair_in_path(self):
        assert not community_is_connected(path3(), Partition([0, 1, 0]), 0)

    def test_whole_path_connected(self):
        assert community_is_connected(path3(), Partition([0, 0, 0]), 0)

    def test_singleton_connected(self):
        assert community_is_connected(path3(), Partition([0, 1, 2]), 1)

    def test_unknown_community(self):
        with pytest.raises(ValueError, match="unknown community"):
            community_is_connected(path3(), Partition([0, 0, 0]), 5)


class TestPartitionIO:
    def test_write_sorted_by_original_id(self):
        g = graph_from_text("7 3\n3 9\n")
        buf = io.StringIO()
        write_partition(buf, g, Partition([0, 0, 1]))
        assert buf.getvalue() == "3 0\n7 0\n9 1\n"

    def test_roundtrip(self):
        g = erdos_renyi(12, 0.4, 2)
        p = Partition([i % 3 for i in range(g.n)])
        buf = io.StringIO()
        write_partition(buf, g, p)
        back = read_partition(buf.getvalue().encode(), g)
        assert back == p

    def test_missing_node_rejected(self):
        g = graph_from_text("0 1\n1 2\n")
        with pytest.raises(ValueError, match="missing"):
            read_partition(b"0 0\n1 0\n", g)

    def test_unknown_node_rejected(self):
        g = single_edge()
        with pytest.raises(EdgeListError, match="unknown node"):
            read_partition(b"0 0\n1 0\n5 1\n", g)


class TestPartition:
    def test_compacted_first_appearance(self):
        p = Partition([5, 5, 2, 7, 2])
        assert p.compacted().assignment.tolist() == [0, 0, 1, 2, 1]

    def test_community_count(self):
        assert Partition([3, 3, 9]).community_count == 2

    def test_members(self):
        assert Partition([1, 0, 1]).members() == {1: [0, 2], 0: [1]}
