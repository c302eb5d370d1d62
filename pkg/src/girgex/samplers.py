"""Graph generators: GIRG samplers plus Erdos-Renyi, Barabasi-Albert, Chung-Lu.

Every GIRG sampler realizes the same connection law: vertices carry weights
w_v (sum W) and uniform positions on the torus/cube [-1/2, 1/2]^d, and each
pair {u, v} is independently an edge with probability

    p_uv = min{ 1, c * ((w_u * w_v / W) / Vol(dist(x_u, x_v)))^alpha }

where Vol is the (torus-measure) ball volume of the chosen distance spec and
dist the spec's distance under the chosen topology. The quadratic-time naive
sampler is the distributional reference; the cell-grid engine reproduces the
identical distribution in expected near-linear time for pure max-norm blocks,
the argmin combination extends it to outer-min specs (MCD in particular) in
O(d n), and the cube variant thins a torus sample edge by edge.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import (
    DistanceSpec,
    Topology,
    ball_volume,
    coordinate_distance,
    distance_from_coordinate_distances,
    is_pure,
    leaf_indices,
    max_norm_spec,
    mcd_spec,
    min_blocks,
    spec_dimension,
    validate_spec,
)
from .graphs import Graph
from .weights import WeightSequence, sample_power_law_weights

logger = logging.getLogger(__name__)

__all__ = [
    "GirgParams",
    "EmbeddedGraph",
    "connection_probability",
    "sample_girg_naive",
    "sample_tgirg_fast",
    "couple_to_cube",
    "sample_mcd_girg",
    "sample_boolean_girg",
    "sample_erdos_renyi",
    "sample_barabasi_albert",
    "sample_chung_lu",
]

MAX_FAST_DIMENSION = 7

# bucket pairs with at most this many candidate pairs skip the grid and get
# one vectorized batch of exact coins; purely a constant-factor knob
EXHAUSTIVE_PAIR_CUTOFF = 256


@dataclass(frozen=True)
class GirgParams:
    """Full GIRG parameterization: geometry plus connection-law constants."""

    d: int
    tau: float
    alpha: float
    c: float
    topology: Topology
    spec: DistanceSpec

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not (2.0 < self.tau < 3.0):
            raise ValueError("tau must lie in (2, 3)")
        if self.alpha <= 1.0:
            raise ValueError("alpha must exceed 1")
        if self.c <= 0.0:
            raise ValueError("c must be positive")
        validate_spec(self.spec, self.d)


@dataclass(frozen=True)
class EmbeddedGraph:
    """A sampled graph together with the positions and weights that made it."""

    graph: Graph
    positions: np.ndarray  # (n, d)
    weights: WeightSequence

    def __post_init__(self):
        if self.positions.shape[0] != self.graph.n or len(self.weights) != self.graph.n:
            raise ValueError("positions and weights must have length n")


def connection_probability(
    params: GirgParams, w_u: float, w_v: float, W: float, distance: float
) -> float:
    """Edge probability of one pair; distance zero (volume zero) gives 1."""
    if w_u <= 0 or w_v <= 0:
        raise ValueError("weights must be positive")
    if W < w_u + w_v:
        raise ValueError("W must be at least w_u + w_v")
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    vol = ball_volume(params.spec, distance)
    if vol == 0.0:
        return 1.0
    return float(min(1.0, params.c * ((w_u * w_v / W) / vol) ** params.alpha))


def _pair_probabilities(c, alpha, w_products_over_W, volumes):
    """Vectorized connection law; volume zero maps to probability one."""
    vol = np.asarray(volumes, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.asarray(w_products_over_W, dtype=float) / vol
        p = np.minimum(1.0, c * ratio**alpha)
    return np.where(vol == 0.0, 1.0, p)


def _coord_dists(pos_u, pos_v, topology: Topology) -> np.ndarray:
    diff = np.abs(pos_u - pos_v)
    if topology is Topology.TORUS:
        diff = np.minimum(diff, 1.0 - diff)
    return diff


def _draw_positions(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-0.5, 0.5, size=(n, d))


def _check_positions(positions, n, d) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)
    if pos.shape != (n, d):
        raise ValueError(f"positions must have shape ({n}, {d})")
    if np.any(pos < -0.5) or np.any(pos > 0.5):
        raise ValueError("positions must lie in [-1/2, 1/2]")
    return pos


# ---------------------------------------------------------------------------
# Naive reference sampler
# ---------------------------------------------------------------------------


def sample_girg_naive(
    params: GirgParams,
    weights: WeightSequence,
    rng: np.random.Generator,
    positions=None,
) -> EmbeddedGraph:
    """Quadratic pair loop evaluating the connection law exactly.

    The distributional oracle for every fast sampler. Positions are drawn
    uniformly unless supplied.
    """
    n = len(weights)
    if n < 2:
        raise ValueError("need at least 2 vertices")
    if positions is None:
        pos = _draw_positions(n, params.d, rng)
    else:
        pos = _check_positions(positions, n, params.d)
    w = weights.weights
    W = weights.total
    rows = []
    for u in range(n - 1):
        vs = np.arange(u + 1, n)
        cd = _coord_dists(pos[u], pos[vs], params.topology)
        dist = distance_from_coordinate_distances(params.spec, cd)
        vol = ball_volume(params.spec, dist)
        p = _pair_probabilities(params.c, params.alpha, w[u] * w[vs] / W, vol)
        hit = vs[rng.random(vs.size) < p]
        if hit.size:
            rows.append(np.column_stack([np.full(hit.size, u), hit]))
    edges = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return EmbeddedGraph(Graph(n, edges, canonical=True), pos, weights)


# ---------------------------------------------------------------------------
# Cell-grid engine (torus, max-norm geometry on a block of coordinates)
# ---------------------------------------------------------------------------


def _ragged_cross(u_starts, u_counts, u_pool, v_starts, v_counts, v_pool):
    """All cross pairs for parallel ragged ranges, fully vectorized."""
    sizes = (u_counts * v_counts).astype(np.int64)
    total = int(sizes.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    rep = np.repeat(np.arange(sizes.size), sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    r = np.arange(total) - offsets[rep]
    vc = v_counts[rep]
    u = u_pool[u_starts[rep] + r // vc]
    v = v_pool[v_starts[rep] + r % vc]
    return u, v


def _sample_without_replacement(rng: np.random.Generator, n_total: int, k: int):
    """Uniform k-subset of range(n_total); Floyd's algorithm for sparse picks."""
    if k >= n_total:
        return np.arange(n_total, dtype=np.int64)
    if k > n_total // 8:
        return rng.permutation(n_total)[:k].astype(np.int64)
    chosen = set()
    out = np.empty(k, dtype=np.int64)
    i = 0
    for j in range(n_total - k, n_total):
        t = int(rng.integers(0, j + 1))
        if t in chosen:
            t = j
        chosen.add(t)
        out[i] = t
        i += 1
    return out


_OFFSET_CACHE: dict = {}


def _offset_table(k: int, offs: tuple) -> np.ndarray:
    key = (k, offs)
    if key not in _OFFSET_CACHE:
        _OFFSET_CACHE[key] = np.array(list(itertools.product(offs, repeat=k)), dtype=np.int64)
    return _OFFSET_CACHE[key]


class _CellGrid:
    """Hierarchical torus grid over one coordinate block, keyed by weight bucket."""

    def __init__(self, pos_block: np.ndarray, members: list[np.ndarray]):
        self.pos = pos_block
        self.k = pos_block.shape[1]
        self.members = members
        self._codes = {}
        self._tables = {}

    def codes_at(self, level: int) -> np.ndarray:
        if level not in self._codes:
            side = 1 << level
            ax = ((self.pos + 0.5) * side).astype(np.int64)
            np.clip(ax, 0, side - 1, out=ax)
            code = ax[:, 0].copy()
            for a in range(1, self.k):
                code = (code << level) | ax[:, a]
            self._codes[level] = code
        return self._codes[level]

    def table(self, bucket: int, level: int):
        """(cell codes sorted unique, start offsets, counts, vertex pool)."""
        key = (bucket, level)
        if key not in self._tables:
            ids = self.members[bucket]
            cd = self.codes_at(level)[ids]
            order = np.argsort(cd, kind="stable")
            ids_sorted = ids[order]
            cd_sorted = cd[order]
            cells, starts = np.unique(cd_sorted, return_index=True)
            counts = np.diff(np.append(starts, ids_sorted.size))
            self._tables[key] = (cells, starts, counts, ids_sorted)
        return self._tables[key]

    def decompose(self, codes: np.ndarray, level: int) -> np.ndarray:
        """Axis indices, shape (len(codes), k)."""
        mask = (1 << level) - 1
        out = np.empty((codes.size, self.k), dtype=np.int64)
        for a in range(self.k):
            out[:, a] = (codes >> (level * (self.k - 1 - a))) & mask
        return out

    def pack(self, axes: np.ndarray, level: int) -> np.ndarray:
        code = axes[..., 0].copy()
        for a in range(1, self.k):
            code = (code << level) | axes[..., a]
        return code

    def neighbor_codes(self, codes: np.ndarray, level: int) -> np.ndarray:
        """Unique neighbor cell codes (incl. self), shape (len(codes), n_off)."""
        if level == 0:
            return codes[:, None].copy()
        side = 1 << level
        offs = _offset_table(self.k, (-1, 0, 1) if side > 2 else (0, 1))
        axes = self.decompose(codes, level)
        shifted = (axes[:, None, :] + offs[None, :, :]) & (side - 1)
        return self.pack(shifted, level)

    def separated_candidates(self, codes: np.ndarray, level: int):
        """Cells that just separated from each code at this level.

        Children of the parents' neighbors that are no longer neighbors of
        the cell itself; returns (cand_codes, min_dists, separated_mask) as
        (len(codes), q) arrays where min_dists lower-bounds the point
        distance between the two cells.
        """
        side = 1 << level
        axes = self.decompose(codes, level)
        parents = axes >> 1
        p_side = side >> 1
        p_offs = _offset_table(self.k, (-1, 0, 1) if p_side > 2 else ((0, 1) if p_side == 2 else (0,)))
        bits = _offset_table(self.k, (0, 1))
        pa = (parents[:, None, :] + p_offs[None, :, :]) & (p_side - 1)  # (C, P, k)
        cand = (pa[:, :, None, :] << 1) | bits[None, None, :, :]  # (C, P, B, k)
        cand = cand.reshape(codes.size, -1, self.k)
        diff = np.abs(cand - axes[:, None, :])
        circ = np.minimum(diff, side - diff)
        is_neighbor = (circ <= 1).all(axis=2)
        gap = np.maximum(circ - 1, 0)
        min_dist = gap.max(axis=2) / side
        return self.pack(cand, level), min_dist, ~is_neighbor


def _grid_sample_edges(pos_block, weights, W, c, alpha, vol_fn, vol_inv, rng):
    """Exact edge sampling for max-norm geometry on a coordinate block.

    Pairs in neighboring cells (at a per-bucket-pair level keyed to the
    probability-saturation radius) get exact coins; separated cell pairs are
    thinned with a binomial count under an upper probability bound and then
    accepted with the exact-to-bound ratio. The output distribution equals
    independent per-pair coins with the exact connection law.
    """
    n, k = pos_block.shape
    w = weights
    w_floor = float(w.min())
    # exact floor(log2(w / w_floor)) via the binary exponent
    bucket = np.frexp(w / w_floor)[1].astype(np.int64) - 1
    nb = int(bucket.max()) + 1
    order = np.argsort(bucket, kind="stable")
    sorted_b = bucket[order]
    lo = np.searchsorted(sorted_b, np.arange(nb))
    hi = np.searchsorted(sorted_b, np.arange(nb) + 1)
    members = [order[lo[b] : hi[b]] for b in range(nb)]
    ubs = w_floor * np.exp2(np.arange(nb) + 1.0)

    grid = _CellGrid(pos_block, members)
    level_cap = max(1, int(math.ceil(math.log2(max(n, 2)) / k)) + 1)
    level_cap = min(level_cap, 62 // k)
    c_root = c ** (1.0 / alpha)

    cand_u, cand_v, cand_bound = [], [], []

    for i in range(nb):
        if members[i].size == 0:
            continue
        for j in range(i, nb):
            if members[j].size == 0:
                continue
            if members[i].size * members[j].size <= EXHAUSTIVE_PAIR_CUTOFF:
                if i == j:
                    iu, iv = np.triu_indices(members[i].size, 1)
                    _push(cand_u, cand_v, cand_bound, members[i][iu], members[i][iv])
                else:
                    u = np.repeat(members[i], members[j].size)
                    v = np.tile(members[j], members[i].size)
                    _push(cand_u, cand_v, cand_bound, u, v)
                continue
            v_sat = min(1.0, c_root * ubs[i] * ubs[j] / W)
            r_sat = vol_inv(v_sat)
            if r_sat >= 0.5:
                level = 0
            else:
                level = min(level_cap, int(math.floor(-math.log2(max(r_sat, 2.0**-62)))))
            _near_pairs(grid, i, j, level, cand_u, cand_v, cand_bound)
            ub_prod = ubs[i] * ubs[j] / W
            # cells can only separate from level 2 on (side 2 wraps everywhere)
            for lev in range(2, level + 1):
                _far_pairs(
                    grid, i, j, lev, ub_prod, c, alpha, vol_fn, rng, cand_u, cand_v, cand_bound
                )

    if not cand_u:
        return np.empty((0, 2), dtype=np.int64)
    u = np.concatenate(cand_u)
    v = np.concatenate(cand_v)
    bound = np.concatenate(cand_bound)
    cd = _coord_dists(pos_block[u], pos_block[v], Topology.TORUS)
    dist = cd.max(axis=1)
    p = _pair_probabilities(c, alpha, w[u] * w[v] / W, vol_fn(dist))
    keep = rng.random(u.size) * bound < p
    return np.column_stack([u[keep], v[keep]])


def _near_pairs(grid, i, j, level, cand_u, cand_v, cand_bound):
    cells_i, starts_i, counts_i, pool_i = grid.table(i, level)
    cells_j, starts_j, counts_j, pool_j = grid.table(j, level)
    if i != j and cells_j.size < cells_i.size:  # enumerate from the sparser side
        cells_i, starts_i, counts_i, pool_i, cells_j, starts_j, counts_j, pool_j = (
            cells_j, starts_j, counts_j, pool_j, cells_i, starts_i, counts_i, pool_i,
        )
    nbr = grid.neighbor_codes(cells_i, level)  # (Ci, q)
    pos = np.searchsorted(cells_j, nbr)
    pos[pos == cells_j.size] = 0
    found = cells_j[pos] == nbr
    ai, slot = np.nonzero(found)
    bj = pos[ai, slot]
    if i == j:
        same = cells_j[bj] == cells_i[ai]
        ordered = cells_j[bj] > cells_i[ai]
        # distinct neighbor cells once each
        a2, b2 = ai[ordered], bj[ordered]
        u, v = _ragged_cross(
            starts_i[a2], counts_i[a2], pool_i, starts_j[b2], counts_j[b2], pool_j
        )
        _push(cand_u, cand_v, cand_bound, u, v)
        # within-cell pairs
        a3 = ai[same]
        u, v = _ragged_cross(
            starts_i[a3], counts_i[a3], pool_i, starts_i[a3], counts_i[a3], pool_i
        )
        mask = u < v
        _push(cand_u, cand_v, cand_bound, u[mask], v[mask])
    else:
        u, v = _ragged_cross(starts_i[ai], counts_i[ai], pool_i, starts_j[bj], counts_j[bj], pool_j)
        _push(cand_u, cand_v, cand_bound, u, v)


def _far_pairs(grid, i, j, level, ub_prod, c, alpha, vol_fn, rng, cand_u, cand_v, cand_bound):
    cells_i, starts_i, counts_i, pool_i = grid.table(i, level)
    cells_j, starts_j, counts_j, pool_j = grid.table(j, level)
    if i != j and cells_j.size < cells_i.size:  # enumerate from the sparser side
        cells_i, starts_i, counts_i, pool_i, cells_j, starts_j, counts_j, pool_j = (
            cells_j, starts_j, counts_j, pool_j, cells_i, starts_i, counts_i, pool_i,
        )
    cand, min_dist, separated = grid.separated_candidates(cells_i, level)
    pos = np.searchsorted(cells_j, cand)
    pos[pos == cells_j.size] = 0
    found = (cells_j[pos] == cand) & separated
    if i == j:
        found &= cand > cells_i[:, None]
    ai, slot = np.nonzero(found)
    if ai.size == 0:
        return
    bj = pos[ai, slot]
    bound = np.minimum(1.0, c * (ub_prod / vol_fn(min_dist[ai, slot])) ** alpha)
    na = counts_i[ai]
    nbv = counts_j[bj]
    totals = na * nbv
    draws = rng.binomial(totals, bound)
    hit = np.flatnonzero(draws)
    if hit.size == 0:
        return
    # single picks dominate by design (O(1) expected candidates per cell pair)
    singles = hit[draws[hit] == 1]
    sel_t, sel_idx = [], []
    if singles.size:
        sel_t.append(singles)
        sel_idx.append(rng.integers(0, totals[singles]))
    for t in hit[draws[hit] > 1]:
        idx = _sample_without_replacement(rng, int(totals[t]), int(draws[t]))
        sel_t.append(np.full(idx.size, t))
        sel_idx.append(idx)
    t_arr = np.concatenate(sel_t)
    idx_arr = np.concatenate(sel_idx)
    cand_u.append(pool_i[starts_i[ai[t_arr]] + idx_arr // nbv[t_arr]])
    cand_v.append(pool_j[starts_j[bj[t_arr]] + idx_arr % nbv[t_arr]])
    cand_bound.append(bound[t_arr])


def _push(cand_u, cand_v, cand_bound, u, v, bound: float = 1.0):
    if u.size == 0:
        return
    cand_u.append(u)
    cand_v.append(v)
    cand_bound.append(np.full(u.size, bound))


# ---------------------------------------------------------------------------
# Public GIRG samplers
# ---------------------------------------------------------------------------


def _vol_inv_from_fn(vol_fn):
    """Approximate monotone inverse on a geometric radius grid.

    Returns a grid radius whose volume is at least the target, so it never
    underestimates the saturation radius; the level choice it feeds is a
    performance knob, not a correctness one.
    """
    rs = (0.5 * np.exp2(-np.arange(641) / 16.0))[::-1].copy()
    vols = np.asarray(vol_fn(rs), dtype=float)

    def inv(target: float) -> float:
        i = int(np.searchsorted(vols, target, side="left"))
        if i >= rs.size:
            return 0.5
        return float(rs[i])

    return inv


def sample_tgirg_fast(
    params: GirgParams,
    weights: WeightSequence,
    rng: np.random.Generator,
    positions=None,
) -> EmbeddedGraph:
    """Cell-grid sampler for max-norm torus GIRGs; same law as the naive one.

    Expected runtime O(n + m) at fixed d; the grid constants grow
    exponentially with d, so d is capped at 7.
    """
    if params.topology is not Topology.TORUS:
        raise ValueError("fast sampler requires the torus topology")
    if not is_pure(params.spec, "max"):
        raise ValueError("fast sampler requires a pure max-norm spec")
    if params.d > MAX_FAST_DIMENSION:
        raise ValueError(f"fast sampler supports d <= {MAX_FAST_DIMENSION}")
    n = len(weights)
    if n < 2:
        raise ValueError("need at least 2 vertices")
    if positions is None:
        pos = _draw_positions(n, params.d, rng)
    else:
        pos = _check_positions(positions, n, params.d)
    d = params.d

    def vol(r):
        return np.minimum(1.0, (2.0 * r) ** d)

    def vol_inv(t):
        return 0.5 * min(1.0, t) ** (1.0 / d)

    edges = _grid_sample_edges(
        pos, weights.weights, weights.total, params.c, params.alpha, vol, vol_inv, rng
    )
    return EmbeddedGraph(Graph(n, edges), pos, weights)


def couple_to_cube(
    embedded: EmbeddedGraph, params: GirgParams, rng: np.random.Generator
) -> Graph:
    """Thin a torus sample into a cube sample, edge by edge.

    For each torus edge the cube-to-torus probability ratio (cube distances
    are never smaller, so the ratio is at most one) decides survival; the
    result has exactly the cube law conditioned on the shared positions and
    weights. Only deletions happen.
    """
    g = embedded.graph
    if g.m == 0:
        return Graph(g.n)
    e = g.edges
    pos_u, pos_v = embedded.positions[e[:, 0]], embedded.positions[e[:, 1]]
    w = embedded.weights.weights
    wprod = w[e[:, 0]] * w[e[:, 1]] / embedded.weights.total

    d_torus = distance_from_coordinate_distances(
        params.spec, _coord_dists(pos_u, pos_v, Topology.TORUS)
    )
    d_cube = distance_from_coordinate_distances(
        params.spec, _coord_dists(pos_u, pos_v, Topology.CUBE)
    )
    p_t = _pair_probabilities(params.c, params.alpha, wprod, ball_volume(params.spec, d_torus))
    p_c = _pair_probabilities(params.c, params.alpha, wprod, ball_volume(params.spec, d_cube))
    if np.any(p_t == 0.0):
        raise ValueError("torus edge with probability zero; corrupted input")
    keep = rng.random(e.shape[0]) <= p_c / p_t
    return Graph(g.n, e[keep], canonical=True)


def _block_runs(params: GirgParams, weights, pos, blocks, rng) -> np.ndarray:
    """Sample one grid run per outer-min block and keep argmin-block edges."""

    def full_vol(r):
        return ball_volume(params.spec, r)

    vol_inv = _vol_inv_from_fn(full_vol)
    block_coords = [sorted(leaf_indices(b)) for b in blocks]
    run_edges = []
    for coords in block_coords:
        sub = np.ascontiguousarray(pos[:, coords])
        run_edges.append(
            _grid_sample_edges(
                sub, weights.weights, weights.total, params.c, params.alpha, full_vol, vol_inv, rng
            )
        )
    if len(blocks) == 1:
        return run_edges[0]
    kept = []
    for t, edges in enumerate(run_edges):
        if edges.shape[0] == 0:
            continue
        dmat = np.empty((edges.shape[0], len(blocks)))
        for b, coords in enumerate(block_coords):
            cd = _coord_dists(
                pos[edges[:, 0]][:, coords], pos[edges[:, 1]][:, coords], Topology.TORUS
            )
            dmat[:, b] = cd.max(axis=1)
        sel = np.argmin(dmat, axis=1) == t  # argmin breaks ties toward low index
        kept.append(edges[sel])
    if not kept:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(kept)


def sample_mcd_girg(
    n: int,
    d: int,
    c: float,
    tau: float,
    alpha: float,
    rng: np.random.Generator,
    weights: WeightSequence | None = None,
    positions=None,
) -> EmbeddedGraph:
    """Minimum-component-distance GIRG on the torus in O(d n) expected time.

    Runs one one-dimensional grid sampler per coordinate, each evaluating the
    connection law with the d-dimensional MCD ball volume at its scalar
    coordinate distance, and keeps an edge only from the coordinate achieving
    the smallest distance (ties to the lowest index). Per pair this is
    exactly one coin with the MCD connection law.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if weights is None:
        weights = sample_power_law_weights(n, tau, 1.0, rng)
    if len(weights) != n:
        raise ValueError("weights length must equal n")
    params = GirgParams(d=d, tau=tau, alpha=alpha, c=c, topology=Topology.TORUS, spec=mcd_spec(d))
    if positions is None:
        pos = _draw_positions(n, d, rng)
    else:
        pos = _check_positions(positions, n, d)
    edges = _block_runs(params, weights, pos, min_blocks(params.spec), rng)
    return EmbeddedGraph(Graph(n, edges), pos, weights)


def sample_boolean_girg(
    params: GirgParams,
    weights: WeightSequence,
    rng: np.random.Generator,
    positions=None,
) -> EmbeddedGraph:
    """Sampler dispatch for arbitrary distance specs.

    Torus with every outer-min block a pure max tree: per-block grid runs
    plus the argmin-block combination (pure max is a single block; pure min
    is the MCD case). Cube topology: sample the torus variant and thin it via
    the coupling. Anything with a min below a max has no fast path and falls
    back to the naive sampler with a logged warning.
    """
    n = len(weights)
    if n < 2:
        raise ValueError("need at least 2 vertices")
    if params.topology is Topology.CUBE:
        torus_params = replace(params, topology=Topology.TORUS)
        emb = sample_boolean_girg(torus_params, weights, rng, positions)
        graph = couple_to_cube(emb, params, rng)
        return EmbeddedGraph(graph, emb.positions, weights)

    blocks = min_blocks(params.spec)
    if all(is_pure(b, "max") for b in blocks):
        if positions is None:
            pos = _draw_positions(n, params.d, rng)
        else:
            pos = _check_positions(positions, n, params.d)
        edges = _block_runs(params, weights, pos, blocks, rng)
        return EmbeddedGraph(Graph(n, edges), pos, weights)

    logger.warning(
        "no fast path for spec with min below max; falling back to the quadratic sampler"
    )
    return sample_girg_naive(params, weights, rng, positions)


# ---------------------------------------------------------------------------
# Baseline models
# ---------------------------------------------------------------------------


def sample_erdos_renyi(n: int, p: float, rng: np.random.Generator) -> Graph:
    """G(n, p) via a binomial edge count and a uniform subset of pair slots."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p)) if total else 0
    idx = _sample_without_replacement(rng, total, m)
    u, v = _pair_from_index(idx, n)
    return Graph(n, np.column_stack([u, v]))


def _pair_from_index(idx: np.ndarray, n: int):
    """Decode flat indices of the upper triangle (row-major, u < v)."""
    if idx.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    # row u starts at offset u*n - u*(u+1)/2 - u ... solve by quadratic formula
    idx = idx.astype(np.float64)
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2.0).astype(np.int64)
    start = u * (2 * n - u - 1) // 2
    # floating point can land one row off; correct deterministically
    too_big = start > idx
    u[too_big] -= 1
    start = u * (2 * n - u - 1) // 2
    too_small = idx - start >= (n - 1 - u)
    u[too_small] += 1
    start = u * (2 * n - u - 1) // 2
    v = (idx - start).astype(np.int64) + u + 1
    return u, v


def sample_barabasi_albert(n: int, k: int, rng: np.random.Generator) -> Graph:
    """Preferential attachment from a complete seed graph on k vertices.

    Each new vertex attaches to k distinct existing vertices sampled
    proportionally to current degree, using the repeated-endpoint list with
    duplicate rejection.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if n <= k:
        raise ValueError("n must exceed k")
    endpoints = []
    edges = []
    for u in range(k):
        for v in range(u + 1, k):
            edges.append((u, v))
            endpoints.append(u)
            endpoints.append(v)
    for w in range(k, n):
        targets = set()
        if not endpoints:
            targets.add(0)  # k = 1: the seed vertex has degree zero
        while len(targets) < k:
            t = endpoints[int(rng.integers(0, len(endpoints)))]
            targets.add(t)
        for t in targets:
            edges.append((t, w))
            endpoints.append(t)
            endpoints.append(w)
    return Graph(n, np.asarray(edges, dtype=np.int64))


def sample_chung_lu(weights: WeightSequence, c: float, rng: np.random.Generator) -> Graph:
    """Independent pair coins with probability min(1, c w_u w_v / W)."""
    if c <= 0:
        raise ValueError("c must be positive")
    n = len(weights)
    w = weights.weights
    W = weights.total
    rows = []
    for u in range(n - 1):
        p = np.minimum(1.0, c * w[u] * w[u + 1 :] / W)
        hit = np.flatnonzero(rng.random(n - u - 1) < p) + u + 1
        if hit.size:
            rows.append(np.column_stack([np.full(hit.size, u), hit]))
    edges = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return Graph(n, edges, canonical=True)
