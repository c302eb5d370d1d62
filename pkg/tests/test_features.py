import itertools

import numpy as np
import pytest

from girgex.features import (
    FEATURE_KEYS,
    betweenness_centrality,
    closeness_centrality,
    diameter_and_effective_diameter,
    extract_feature_vector,
    katz_centrality,
    kcore_numbers,
    largest_connected_component,
    local_clustering_coefficients,
)
from girgex.graphs import Graph
from girgex.weights import PowerLawFit


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def star(n):
    return Graph(n, [(0, i) for i in range(1, n)])


# ---------------------------------------------------------------------------
# brute-force oracles (independent of the fast implementations)
# ---------------------------------------------------------------------------


def floyd_distances(g: Graph):
    n = g.n
    dist = np.full((n, n), 10**9, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    for u, v in g.edges:
        dist[u, v] = dist[v, u] = 1
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return dist


def brute_betweenness(g: Graph):
    n = g.n
    dist = floyd_distances(g)
    # shortest-path counts from adjacency powers: walks of length dist are paths
    a = np.zeros((n, n), dtype=object)
    for u, v in g.edges:
        a[u, v] = a[v, u] = 1
    powers = [np.eye(n, dtype=object)]
    dmax = int(dist.max())
    for _ in range(dmax):
        powers.append(powers[-1] @ a)
    sigma = np.zeros((n, n), dtype=object)
    for s in range(n):
        for t in range(n):
            sigma[s, t] = powers[dist[s, t]][s, t]
    bc = np.zeros(n, dtype=float)
    for s in range(n):
        for t in range(s + 1, n):
            for v in range(n):
                if v in (s, t):
                    continue
                if dist[s, v] + dist[v, t] == dist[s, t]:
                    bc[v] += (sigma[s, v] * sigma[v, t]) / sigma[s, t]
    return bc


def brute_closeness(g: Graph):
    dist = floyd_distances(g)
    return dist.sum(axis=1) / (g.n - 1)


def brute_kcore(g: Graph):
    n = g.n
    core = np.zeros(n, dtype=np.int64)
    for k in range(1, n + 1):
        alive = set(range(n))
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                deg = sum(1 for u in g.neighbors(v) if u in alive)
                if deg < k:
                    alive.discard(v)
                    changed = True
        for v in alive:
            core[v] = k
        if not alive:
            break
    return core


def brute_diam_effdiam(g: Graph):
    dist = floyd_distances(g)
    iu = np.triu_indices(g.n, 1)
    pair_d = dist[iu]
    diam = int(pair_d.max())
    total = pair_d.size
    for h in range(1, diam + 1):
        if np.sum(pair_d <= h) >= 0.9 * total:
            return diam, h
    return diam, diam


def brute_clustering(g: Graph):
    n = g.n
    out = np.zeros(n)
    for v in range(n):
        nb = list(g.neighbors(v))
        if len(nb) < 2:
            continue
        links = sum(1 for a, b in itertools.combinations(nb, 2) if g.has_edge(a, b))
        out[v] = links / (len(nb) * (len(nb) - 1) / 2)
    return out


def brute_katz(g: Graph):
    n = g.n
    a = np.zeros((n, n))
    for u, v in g.edges:
        a[u, v] = a[v, u] = 1
    lam = float(np.max(np.abs(np.linalg.eigvalsh(a))))
    att = 0.9 / lam
    # x = att*A*(x + 1)  =>  (I - att*A) x = att*A*1
    return np.linalg.solve(np.eye(n) - att * a, att * (a @ np.ones(n)))


def random_connected_graph(rng, n_max=50, n_min=3):
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        p = float(rng.uniform(1.2, 3.0)) * np.log(max(n, 2)) / max(n, 2)
        iu = np.triu_indices(n, 1)
        mask = rng.random(iu[0].size) < min(p, 1.0)
        g = Graph(n, np.column_stack([iu[0][mask], iu[1][mask]]))
        lcc, _ = largest_connected_component(g)
        if lcc.n == n:
            return g


# ---------------------------------------------------------------------------


class TestClustering:
    def test_complete(self):
        np.testing.assert_allclose(local_clustering_coefficients(complete(4)), 1.0)

    def test_star_center(self):
        assert local_clustering_coefficients(star(5))[0] == 0.0

    def test_cycle_triangle_free(self):
        np.testing.assert_allclose(local_clustering_coefficients(cycle(5)), 0.0)

    def test_degree_one_is_zero(self):
        g = Graph(3, [(0, 1), (1, 2)])
        c = local_clustering_coefficients(g)
        assert c[0] == 0.0 and c[2] == 0.0


class TestKCore:
    def test_cycle(self):
        np.testing.assert_array_equal(kcore_numbers(cycle(6)), 2)

    def test_complete(self):
        np.testing.assert_array_equal(kcore_numbers(complete(5)), 4)

    def test_path(self):
        np.testing.assert_array_equal(kcore_numbers(path(4)), 1)


class TestBetweenness:
    def test_star(self):
        bc = betweenness_centrality(star(5))
        assert bc[0] == pytest.approx(6.0)
        np.testing.assert_allclose(bc[1:], 0.0)

    def test_complete(self):
        np.testing.assert_allclose(betweenness_centrality(complete(6)), 0.0)

    def test_path_middle(self):
        assert betweenness_centrality(path(3))[1] == pytest.approx(1.0)


class TestCloseness:
    def test_complete(self):
        np.testing.assert_allclose(closeness_centrality(complete(5)), 1.0)

    def test_star(self):
        c = closeness_centrality(star(5))
        assert c[0] == pytest.approx(1.0)
        np.testing.assert_allclose(c[1:], 1.75)

    def test_path_endpoints(self):
        c = closeness_centrality(path(3))
        assert c[0] == pytest.approx(1.5)
        assert c[2] == pytest.approx(1.5)


class TestKatz:
    def test_vertex_transitive_equal(self):
        x = katz_centrality(cycle(6))
        np.testing.assert_allclose(x, x[0], atol=1e-6)

    def test_k2_geometric_series(self):
        x = katz_centrality(complete(2))
        np.testing.assert_allclose(x, 0.9 / 0.1, rtol=1e-6)

    def test_star_center_dominates(self):
        x = katz_centrality(star(6))
        assert x[0] > x[1]

    def test_automorphic_symmetry(self):
        # complete bipartite K_{2,3}: two orbits
        g = Graph(5, [(u, v) for u in range(2) for v in range(2, 5)])
        x = katz_centrality(g)
        assert abs(x[0] - x[1]) < 1e-6
        assert np.ptp(x[2:]) < 1e-6

    def test_matches_linear_solve(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g = random_connected_graph(rng, n_max=25)
            np.testing.assert_allclose(katz_centrality(g), brute_katz(g), atol=1e-5)


class TestDiameter:
    def test_p10(self):
        assert diameter_and_effective_diameter(path(10)) == (9, 7)

    def test_complete(self):
        assert diameter_and_effective_diameter(complete(7)) == (1, 1)

    def test_c6(self):
        diam, eff = diameter_and_effective_diameter(cycle(6))
        assert diam == 3

    def test_eff_le_diam(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            g = random_connected_graph(rng, n_max=30)
            diam, eff = diameter_and_effective_diameter(g)
            assert 1 <= eff <= diam

    def test_disconnected_rejected(self):
        with pytest.raises(ValueError, match="connected"):
            diameter_and_effective_diameter(Graph(4, [(0, 1), (2, 3)]))


class TestBruteForceAgreement:
    """Spot-check against independent oracles; the exhaustive battery and the
    100-random-graph pass live in the acceptance suite."""

    def test_small_family_battery(self):
        graphs = [path(5), cycle(7), complete(5), star(8), path(2)]
        graphs.append(Graph(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)]))
        for g in graphs:
            np.testing.assert_allclose(
                betweenness_centrality(g), brute_betweenness(g), atol=1e-9
            )
            np.testing.assert_allclose(closeness_centrality(g), brute_closeness(g))
            np.testing.assert_array_equal(kcore_numbers(g), brute_kcore(g))
            assert diameter_and_effective_diameter(g) == brute_diam_effdiam(g)
            np.testing.assert_allclose(
                local_clustering_coefficients(g), brute_clustering(g), atol=1e-12
            )

    def test_random_graphs(self):
        rng = np.random.default_rng(7)
        for _ in range(15):
            g = random_connected_graph(rng, n_max=40)
            np.testing.assert_allclose(
                betweenness_centrality(g), brute_betweenness(g), atol=1e-9
            )
            np.testing.assert_allclose(closeness_centrality(g), brute_closeness(g))
            np.testing.assert_array_equal(kcore_numbers(g), brute_kcore(g))
            assert diameter_and_effective_diameter(g) == brute_diam_effdiam(g)


DUMMY_FIT = PowerLawFit(tau=2.5, x_min=1.0, ks_distance=0.1, tail_size=10)


class TestExtract:
    def test_k4(self):
        fv = extract_feature_vector(complete(4), DUMMY_FIT)
        assert fv.values["n"] == 4.0
        assert fv.values["m"] == 6.0
        assert fv.values["diam"] == 1.0
        assert fv.values["eff-diam"] == 1.0
        assert fv.values["LCC_mean"] == pytest.approx(1.0)
        assert fv.values["degree_mean"] == pytest.approx(3.0)
        assert fv.values["tau"] == 2.5

    def test_c5(self):
        fv = extract_feature_vector(cycle(5), DUMMY_FIT)
        assert fv.values["degree_std"] == 0.0
        assert fv.values["LCC_mean"] == 0.0

    def test_degree_mean_handshake(self):
        rng = np.random.default_rng(11)
        g = random_connected_graph(rng, n_max=30)
        fv = extract_feature_vector(g, DUMMY_FIT)
        assert fv.values["degree_mean"] == pytest.approx(2 * g.m / g.n)

    def test_all_keys_present(self):
        fv = extract_feature_vector(complete(4), DUMMY_FIT)
        assert set(fv.values) == set(FEATURE_KEYS)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(13)
        g = random_connected_graph(rng, n_max=25)
        perm = rng.permutation(g.n)
        relabeled = Graph(g.n, np.column_stack([perm[g.edges[:, 0]], perm[g.edges[:, 1]]]))
        a = extract_feature_vector(g, DUMMY_FIT)
        b = extract_feature_vector(relabeled, DUMMY_FIT)
        for key in FEATURE_KEYS:
            assert a.values[key] == pytest.approx(b.values[key], abs=1e-9), key
