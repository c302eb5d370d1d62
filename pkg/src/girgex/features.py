"""Graph features: single values plus node-distribution summaries.

All features are meant to be computed on a largest connected component.
Closeness here is the plain average distance to the other vertices, not the
more common reciprocal convention. Betweenness counts each unordered pair
once and is unnormalized. Local clustering of degree-<=1 vertices is 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphs import Graph, largest_connected_component
from .weights import PowerLawFit

logger = logging.getLogger(__name__)

__all__ = [
    "FeatureVector",
    "FEATURE_KEYS",
    "DISTRIBUTION_KEYS",
    "SUMMARY_KEYS",
    "KatzConvergenceError",
    "largest_connected_component",
    "local_clustering_coefficients",
    "kcore_numbers",
    "betweenness_centrality",
    "closeness_centrality",
    "katz_centrality",
    "diameter_and_effective_diameter",
    "extract_feature_vector",
]

DISTRIBUTION_KEYS = ["degree", "LCC", "k-core", "betw", "close", "Katz"]
SUMMARY_KEYS = ["mean", "median", "q1", "q3", "std"]
FEATURE_KEYS = ["n", "m", "tau", "diam", "eff-diam"] + [
    f"{d}_{s}" for d in DISTRIBUTION_KEYS for s in SUMMARY_KEYS
]

KATZ_DAMPING = 0.9
EXACT_HISTOGRAM_LIMIT = 20_000
EFFECTIVE_DIAMETER_QUANTILE = 0.9
SAMPLED_SOURCES = 1_000


class KatzConvergenceError(RuntimeError):
    """Katz fixed-point iteration failed to converge."""


@dataclass
class FeatureVector:
    """Named feature values; undefined entries are listed, not stored."""

    values: dict[str, float]
    undefined: frozenset = field(default_factory=frozenset)


def _csr(graph: Graph):
    indptr, indices = graph.adjacency()
    return indptr, indices


def _require_connected(dist: np.ndarray):
    if np.any(dist < 0):
        raise ValueError("graph is not connected")


def _bfs(indptr, indices, source: int, n: int) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        nbr = _expand(indptr, indices, frontier)
        nbr = nbr[dist[nbr] < 0]
        if nbr.size == 0:
            break
        frontier = np.unique(nbr)
        level += 1
        dist[frontier] = level
    return dist


def _expand(indptr, indices, frontier):
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    rep = np.repeat(np.arange(frontier.size), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    return indices[starts[rep] + (np.arange(total) - offsets[rep])]


def _brandes_source(indptr, indices, source: int, n: int):
    """One Brandes sweep: distances, path counts, and dependency vector."""
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n, dtype=np.float64)
    dist[source] = 0
    sigma[source] = 1.0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    level_edges = []
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        rep = np.repeat(np.arange(frontier.size), counts)
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
        w = indices[starts[rep] + (np.arange(total) - offsets[rep])]
        v = frontier[rep]
        new = w[dist[w] < 0]
        if new.size:
            nxt = np.unique(new)
            dist[nxt] = level + 1
        else:
            nxt = np.empty(0, dtype=np.int64)
        tree = dist[w] == level + 1
        vt, wt = v[tree], w[tree]
        if vt.size:
            np.add.at(sigma, wt, sigma[vt])
            level_edges.append((vt, wt))
        frontier = nxt
        level += 1
    delta = np.zeros(n, dtype=np.float64)
    for vt, wt in reversed(level_edges):
        np.add.at(delta, vt, sigma[vt] / sigma[wt] * (1.0 + delta[wt]))
    return dist, delta


def _sweep(graph: Graph, want_betweenness: bool, want_histogram: bool):
    """All-sources BFS pass: closeness sums, betweenness, distance histogram."""
    n = graph.n
    indptr, indices = _csr(graph)
    closeness_sums = np.zeros(n, dtype=np.float64)
    betweenness = np.zeros(n, dtype=np.float64) if want_betweenness else None
    hist = np.zeros(1, dtype=np.int64)
    diameter = 0
    for s in range(n):
        if want_betweenness:
            dist, delta = _brandes_source(indptr, indices, s, n)
            betweenness += delta
            betweenness[s] -= delta[s]
        else:
            dist = _bfs(indptr, indices, s, n)
        _require_connected(dist)
        closeness_sums[s] = dist.sum()
        dmax = int(dist.max())
        diameter = max(diameter, dmax)
        if want_histogram:
            if dmax + 1 > hist.size:
                hist = np.concatenate([hist, np.zeros(dmax + 1 - hist.size, dtype=np.int64)])
            hist[: dmax + 1] += np.bincount(dist, minlength=dmax + 1)
    if want_betweenness:
        betweenness /= 2.0  # unordered pairs once
    return closeness_sums, betweenness, hist, diameter


def local_clustering_coefficients(graph: Graph) -> np.ndarray:
    """Fraction of connected neighbor pairs per vertex; 0 for degree <= 1."""
    n = graph.n
    deg = graph.degrees().astype(np.float64)
    if graph.m == 0:
        return np.zeros(n)
    indptr, indices = _csr(graph)
    a = sp.csr_matrix((np.ones(indices.size), indices, indptr), shape=(n, n))
    triangles = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    pairs = deg * (deg - 1.0) / 2.0
    out = np.zeros(n)
    mask = deg >= 2
    out[mask] = triangles[mask] / pairs[mask]
    return out


def kcore_numbers(graph: Graph) -> np.ndarray:
    """Largest k such that the vertex survives in the k-core; bucket peeling."""
    n = graph.n
    deg = graph.degrees().astype(np.int64).copy()
    indptr, indices = _csr(graph)
    md = int(deg.max()) if n else 0
    bin_start = np.zeros(md + 2, dtype=np.int64)
    np.add.at(bin_start, deg + 1, 1)
    bin_start = np.cumsum(bin_start)
    pos = np.empty(n, dtype=np.int64)
    vert = np.empty(n, dtype=np.int64)
    fill = bin_start[:-1].copy()
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    bin_ptr = bin_start[:-1].copy()
    core = deg.copy()
    for i in range(n):
        v = vert[i]
        for u in indices[indptr[v] : indptr[v + 1]]:
            if core[u] > core[v]:
                du = core[u]
                pu = pos[u]
                pw = bin_ptr[du]
                w = vert[pw]
                if u != w:
                    vert[pu], vert[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bin_ptr[du] += 1
                core[u] -= 1
    return core


def betweenness_centrality(graph: Graph) -> np.ndarray:
    """Brandes accumulation; unordered pairs counted once, no normalization."""
    _, bc, _, _ = _sweep(graph, want_betweenness=True, want_histogram=False)
    return bc


def closeness_centrality(graph: Graph) -> np.ndarray:
    """Average distance to every other vertex (not the reciprocal)."""
    if graph.n < 2:
        raise ValueError("closeness needs at least 2 vertices")
    sums, _, _, _ = _sweep(graph, want_betweenness=False, want_histogram=False)
    return sums / (graph.n - 1)


def _spectral_radius(a: sp.csr_matrix, n: int) -> float:
    """Power iteration on A + I (the shift kills bipartite oscillation)."""
    x = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(100):
        y = a @ x + x
        new_lam = float(np.linalg.norm(y))
        if new_lam == 0.0:
            return 0.0
        x = y / new_lam
        if abs(new_lam - lam) <= 1e-8 * new_lam:
            lam = new_lam
            break
        lam = new_lam
    return lam - 1.0


def katz_centrality(graph: Graph) -> np.ndarray:
    """Attenuated walk counts: x = sum_k a^k A^k 1 with a = 0.9 / lambda_max."""
    n = graph.n
    indptr, indices = _csr(graph)
    a = sp.csr_matrix((np.ones(indices.size), indices, indptr), shape=(n, n))
    lam = _spectral_radius(a, n)
    if lam <= 0:
        return np.zeros(n)  # edgeless: no walks at all
    att = KATZ_DAMPING / lam
    x = np.zeros(n)
    for _ in range(1000):
        x_new = att * (a @ (x + 1.0))
        gap = float(np.max(np.abs(x_new - x)))
        scale = float(np.max(np.abs(x_new)))
        x = x_new
        if gap <= 1e-8 * max(scale, 1.0):
            return x
    raise KatzConvergenceError("Katz fixed point did not converge in 1000 iterations")


def _ifub_diameter(graph: Graph, indptr, indices) -> int:
    """Exact diameter: double sweep, then BFS down the level structure."""
    n = graph.n
    s0 = int(np.argmax(graph.degrees()))
    d0 = _bfs(indptr, indices, s0, n)
    _require_connected(d0)
    a = int(np.argmax(d0))
    da = _bfs(indptr, indices, a, n)
    b = int(np.argmax(da))
    lb = int(da[b])
    db = _bfs(indptr, indices, b, n)
    on_path = np.flatnonzero((da + db == lb) & (da == lb // 2))
    r = int(on_path[0]) if on_path.size else a
    dr = _bfs(indptr, indices, r, n)
    best = lb
    order = np.argsort(dr)[::-1]
    for v in order:
        if best >= 2 * (int(dr[v])):
            break
        ecc = int(_bfs(indptr, indices, int(v), n).max())
        best = max(best, ecc)
    return best


def diameter_and_effective_diameter(graph: Graph) -> tuple[int, int]:
    """Exact diameter plus the smallest h covering 90% of unordered pairs.

    Uses the exact distance histogram up to EXACT_HISTOGRAM_LIMIT vertices;
    beyond that the effective diameter comes from sampled BFS sources and is
    flagged approximate in the log.
    """
    n = graph.n
    if n == 1:
        return 0, 0
    indptr, indices = _csr(graph)
    if n <= EXACT_HISTOGRAM_LIMIT:
        _, _, hist, diameter = _sweep(graph, want_betweenness=False, want_histogram=True)
        pair_counts = hist[1:] / 2.0  # unordered pairs at distance >= 1
    else:
        diameter = _ifub_diameter(graph, indptr, indices)
        logger.warning(
            "effective diameter approximated from %d sampled sources (n=%d)",
            SAMPLED_SOURCES,
            n,
        )
        rng = np.random.default_rng(0)
        sources = rng.choice(n, size=SAMPLED_SOURCES, replace=False)
        hist = np.zeros(diameter + 1, dtype=np.int64)
        for s in sources:
            dist = _bfs(indptr, indices, int(s), n)
            _require_connected(dist)
            hist[: dist.max() + 1] += np.bincount(dist, minlength=int(dist.max()) + 1)
        pair_counts = hist[1:].astype(float)
    total = pair_counts.sum()
    cumulative = np.cumsum(pair_counts)
    eff = int(np.searchsorted(cumulative, EFFECTIVE_DIAMETER_QUANTILE * total)) + 1
    return int(diameter), min(eff, int(diameter))


def _summaries(values: np.ndarray) -> dict[str, float]:
    q1, med, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    return {
        "mean": float(values.mean()),
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "std": float(values.std()),
    }


def extract_feature_vector(graph: Graph, tau_fit: PowerLawFit) -> FeatureVector:
    """All single-value features plus the five summaries per distribution.

    The graph must already be a largest connected component. A Katz
    convergence failure flags the Katz summaries undefined instead of
    raising.
    """
    values: dict[str, float] = {}
    undefined: set[str] = set()
    values["n"] = float(graph.n)
    values["m"] = float(graph.m)
    values["tau"] = float(tau_fit.tau)
    if graph.n == 1:
        diam, eff = 0, 0
        closeness = np.zeros(1)
        betw = np.zeros(1)
    else:
        sums, betw, hist, diam = _sweep(graph, want_betweenness=True, want_histogram=True)
        closeness = sums / (graph.n - 1)
        pair_counts = hist[1:] / 2.0
        cumulative = np.cumsum(pair_counts)
        eff = int(np.searchsorted(cumulative, EFFECTIVE_DIAMETER_QUANTILE * pair_counts.sum())) + 1
        eff = min(eff, diam)
    values["diam"] = float(diam)
    values["eff-diam"] = float(eff)

    distributions = {
        "degree": graph.degrees().astype(float),
        "LCC": local_clustering_coefficients(graph),
        "k-core": kcore_numbers(graph).astype(float),
        "betw": betw,
        "close": closeness,
    }
    try:
        distributions["Katz"] = katz_centrality(graph)
    except KatzConvergenceError:
        logger.warning("Katz centrality did not converge; flagging undefined")
        for s in SUMMARY_KEYS:
            undefined.add(f"Katz_{s}")
    for name, vals in distributions.items():
        for s, v in _summaries(vals).items():
            values[f"{name}_{s}"] = v
    for key in undefined:
        values[key] = float("nan")
    return FeatureVector(values=values, undefined=frozenset(undefined))
