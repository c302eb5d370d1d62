import numpy as np
import pytest

from girgex.graphs import Graph, canonical_edges, largest_connected_component


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


class TestGraph:
    def test_canonicalization(self):
        g = Graph(3, [(2, 1), (1, 2), (0, 1), (1, 1)])
        np.testing.assert_array_equal(g.edges, [[0, 1], [1, 2]])
        assert g.m == 2
        g.validate()

    def test_adjacency_sorted_symmetric(self):
        g = Graph(4, [(0, 2), (0, 1), (2, 3)])
        np.testing.assert_array_equal(g.neighbors(0), [1, 2])
        np.testing.assert_array_equal(g.neighbors(2), [0, 3])
        for u, v in g.edges:
            assert g.has_edge(u, v) and g.has_edge(v, u)

    def test_degrees_handshake(self):
        g = complete(5)
        assert int(g.degrees().sum()) == 2 * g.m
        assert g.m == 10

    def test_empty(self):
        g = Graph(3)
        assert g.m == 0
        assert g.neighbors(1).size == 0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            Graph(2, [(0, 5)])

    def test_canonical_edges_dedup(self):
        e = canonical_edges(np.array([[1, 0], [0, 1], [2, 2], [3, 1]]))
        np.testing.assert_array_equal(e, [[0, 1], [1, 3]])


class TestLCC:
    def test_connected_identity(self):
        g = path(5)
        sub, ids = largest_connected_component(g)
        assert sub.n == 5 and sub.m == 4
        np.testing.assert_array_equal(ids, np.arange(5))

    def test_two_components(self):
        # sizes 5 (path on 0..4) and 3 (triangle on 5..7)
        edges = [(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7), (5, 7)]
        sub, ids = largest_connected_component(Graph(8, edges))
        assert sub.n == 5
        np.testing.assert_array_equal(ids, np.arange(5))

    def test_tie_smallest_vertex(self):
        # two K4s; the one containing vertex 0 wins
        k4a = [(u, v) for u in range(4) for v in range(u + 1, 4)]
        k4b = [(u + 4, v + 4) for u, v in k4a]
        sub, ids = largest_connected_component(Graph(8, k4a + k4b))
        assert sub.n == 4
        np.testing.assert_array_equal(ids, [0, 1, 2, 3])

    def test_relabeling_preserves_structure(self):
        edges = [(9, 3), (3, 7), (7, 9), (1, 2)]
        sub, ids = largest_connected_component(Graph(10, edges))
        assert sub.n == 3 and sub.m == 3
        np.testing.assert_array_equal(ids, [3, 7, 9])
        sub.validate()

    def test_isolated_vertices_excluded(self):
        sub, ids = largest_connected_component(Graph(4, [(1, 2)]))
        assert sub.n == 2
        np.testing.assert_array_equal(ids, [1, 2])
