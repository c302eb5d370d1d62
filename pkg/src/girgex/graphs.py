"""Simple undirected graphs with vertex ids 0..n-1.

Edges are held as a canonical (m, 2) int array with u < v, sorted
lexicographically and deduplicated. Adjacency (CSR with sorted neighbor
lists) is built lazily and cached.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Graph", "largest_connected_component"]


class Graph:
    __slots__ = ("n", "_edges", "_indptr", "_indices", "_degrees")

    def __init__(self, n: int, edges=None, canonical: bool = False):
        """Build a graph on n vertices from an iterable/array of (u, v) pairs.

        Self-loops and duplicate edges are dropped unless the caller vouches
        for already-canonical input with canonical=True.
        """
        if n < 0:
            raise ValueError("n must be >= 0")
        self.n = int(n)
        if edges is None:
            edges = np.empty((0, 2), dtype=np.int64)
        arr = np.asarray(edges, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be an (m, 2) array")
        if not canonical:
            arr = canonical_edges(arr)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        self._edges = arr
        self._indptr = None
        self._indices = None
        self._degrees = None

    @property
    def m(self) -> int:
        return self._edges.shape[0]

    @property
    def edges(self) -> np.ndarray:
        """Canonical (m, 2) edge array, u < v, lexicographically sorted."""
        return self._edges

    def _build_adjacency(self):
        e = self._edges
        both = np.concatenate([e[:, 0], e[:, 1]])
        rev = np.concatenate([e[:, 1], e[:, 0]])
        deg = np.bincount(both, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        order = np.lexsort((rev, both))
        self._indices = rev[order]
        self._indptr = indptr
        self._degrees = deg

    def adjacency(self):
        """(indptr, indices) CSR arrays; neighbor lists sorted ascending."""
        if self._indptr is None:
            self._build_adjacency()
        return self._indptr, self._indices

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._build_adjacency()
        return self._degrees

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self.adjacency()
        return indices[indptr[v] : indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return i < nb.size and nb[i] == v

    def validate(self) -> None:
        """Assert simplicity invariants; raises on violation."""
        e = self._edges
        if e.size:
            if np.any(e[:, 0] >= e[:, 1]):
                raise AssertionError("self-loop or non-canonical edge order")
            keys = e[:, 0] * self.n + e[:, 1]
            if np.any(np.diff(keys) <= 0):
                raise AssertionError("duplicate or unsorted edges")
        if int(self.degrees().sum()) != 2 * self.m:
            raise AssertionError("degree sum does not match edge count")

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self._edges, other._edges)
        )

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def canonical_edges(arr: np.ndarray) -> np.ndarray:
    """Sort endpoints within rows, drop self-loops, sort rows, deduplicate."""
    arr = np.asarray(arr, dtype=np.int64).reshape(-1, 2)
    u = np.minimum(arr[:, 0], arr[:, 1])
    v = np.maximum(arr[:, 0], arr[:, 1])
    keep = u != v
    u, v = u[keep], v[keep]
    if u.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((v, u))
    u, v = u[order], v[order]
    dup = np.concatenate([[False], (u[1:] == u[:-1]) & (v[1:] == v[:-1])])
    return np.column_stack([u[~dup], v[~dup]])


def connected_components(graph: Graph) -> np.ndarray:
    """Component label per vertex; labels increase with the smallest member id."""
    indptr, indices = graph.adjacency()
    labels = np.full(graph.n, -1, dtype=np.int64)
    label = 0
    for s in range(graph.n):
        if labels[s] >= 0:
            continue
        labels[s] = label
        frontier = np.array([s], dtype=np.int64)
        while frontier.size:
            nbr = _gather_neighbors(indptr, indices, frontier)
            nbr = nbr[labels[nbr] < 0]
            if nbr.size == 0:
                break
            nbr = np.unique(nbr)
            labels[nbr] = label
            frontier = nbr
        label += 1
    return labels


def _gather_neighbors(indptr, indices, frontier) -> np.ndarray:
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    rep = np.repeat(np.arange(frontier.size), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    idx = starts[rep] + (np.arange(total) - offsets[rep])
    return indices[idx]


def largest_connected_component(graph: Graph) -> tuple[Graph, np.ndarray]:
    """Vertex-induced subgraph on the largest component, relabeled 0..n'-1.

    Ties break toward the component containing the smallest original vertex
    id. Returns (subgraph, original_ids) where original_ids[new] = old; the
    relabeling preserves the original id order.
    """
    if graph.n == 0:
        raise ValueError("empty graph has no components")
    labels = connected_components(graph)
    sizes = np.bincount(labels)
    best = int(np.argmax(sizes))  # argmax picks the lowest label on ties
    keep = np.flatnonzero(labels == best)
    remap = np.full(graph.n, -1, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    e = graph.edges
    if e.size:
        mask = labels[e[:, 0]] == best
        sub = remap[e[mask]]
    else:
        sub = np.empty((0, 2), dtype=np.int64)
    return Graph(keep.size, sub, canonical=True), keep
