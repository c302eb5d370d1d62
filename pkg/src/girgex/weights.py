"""Power-law weight sequences and power-law tail estimation.

Weights follow a continuous Pareto law: density proportional to w^(-tau) on
[w_min, inf), sampled by inverse CDF. Tail fitting scans every distinct
observed value as a candidate threshold, estimates the exponent by maximum
likelihood on the tail, and keeps the threshold minimizing the
Kolmogorov-Smirnov distance between empirical and fitted tail CDFs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

__all__ = [
    "WeightSequence",
    "PowerLawFit",
    "pareto_quantile",
    "sample_power_law_weights",
    "fit_power_law_tail",
    "degree_replicating_weights",
]

MIN_FIT_VALUES = 50
MIN_TAIL_SIZE = 10


@dataclass(frozen=True)
class WeightSequence:
    """Positive vertex weights plus their cached sum."""

    weights: np.ndarray
    total: float

    @classmethod
    def from_values(cls, values) -> "WeightSequence":
        w = np.asarray(values, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
        return cls(weights=w, total=float(w.sum()))

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True)
class PowerLawFit:
    """Tail fit: exponent, threshold, KS distance on the tail, tail size."""

    tau: float
    x_min: float
    ks_distance: float
    tail_size: int


def pareto_quantile(u, tau: float, w_min: float):
    """Inverse CDF of the Pareto law: u in (0, 1] maps to w_min * u^(-1/(tau-1))."""
    return w_min * np.asarray(u, dtype=float) ** (-1.0 / (tau - 1.0))


def sample_power_law_weights(
    n: int, tau: float, w_min: float = 1.0, rng: np.random.Generator | None = None
) -> WeightSequence:
    """n i.i.d. Pareto(tau) weights on [w_min, inf) via inverse CDF.

    tau must exceed 2 so the mean (tau-1)/(tau-2)*w_min is finite.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if tau <= 2:
        raise ValueError("tau must be > 2 (finite-mean regime)")
    if w_min <= 0:
        raise ValueError("w_min must be positive")
    if rng is None:
        raise ValueError("rng is required")
    u = 1.0 - rng.random(n)  # uniform on (0, 1]
    return WeightSequence.from_values(pareto_quantile(u, tau, w_min))


def fit_power_law_tail(values) -> PowerLawFit:
    """Scan thresholds, fit the exponent by MLE, minimize tail KS distance.

    For threshold x_min with tail {x_i >= x_min} of size m the MLE is
    tau_hat = 1 + m / sum(log(x_i / x_min)); the KS distance is the exact
    supremum gap between the empirical tail CDF and the fitted Pareto CDF.
    Ties in KS break toward the smaller threshold (larger tail).
    """
    x = np.sort(np.asarray(values, dtype=float))
    if x.size < MIN_FIT_VALUES:
        raise ValueError(f"need at least {MIN_FIT_VALUES} values, got {x.size}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise ValueError("values must be positive and finite")
    if x[0] == x[-1]:
        raise ValueError("degenerate input: all values equal")

    n = x.size
    logx = np.log(x)
    suffix_log = np.concatenate([np.cumsum(logx[::-1])[::-1], [0.0]])

    distinct_idx = np.flatnonzero(np.concatenate([[True], x[1:] != x[:-1]]))
    distinct_idx = distinct_idx[n - distinct_idx >= MIN_TAIL_SIZE]
    if distinct_idx.size == 0:
        raise ValueError(f"no candidate threshold with tail size >= {MIN_TAIL_SIZE}")

    # scan in float32 for speed; the winner's KS is recomputed in float64
    best = None  # (ks32, index)
    logx32 = logx.astype(np.float32)
    cols32 = np.arange(n, dtype=np.float32)
    start = 0
    while start < distinct_idx.size:
        # block candidates so the fitted-CDF matrix stays a few MB
        i0 = int(distinct_idx[start])
        block = max(8, int(2_000_000 // (n - i0)))
        ids = distinct_idx[start : start + block]
        start += block

        m = (n - ids).astype(float)
        log_sums = suffix_log[ids] - m * logx[ids]
        ok = log_sums > 0  # tail not concentrated on the threshold value
        ids, m, log_sums = ids[ok], m[ok], log_sums[ok]
        if ids.size == 0:
            continue
        b = (m / log_sums).astype(np.float32)  # tau_hat - 1

        i0 = int(ids[0])
        t = logx32[i0:]
        # G = fitted-complement + upper-empirical - 1 = upper - fitted, built in place
        G = np.subtract(logx32[ids][:, None], t[None, :])
        G *= b[:, None]
        with np.errstate(over="ignore"):  # columns left of the threshold; zeroed below
            np.exp(G, out=G)
        inv_m = (1.0 / m).astype(np.float32)
        shift = ((1.0 - (ids - i0).astype(float)) / m - 1.0).astype(np.float32)
        G += cols32[None, : t.size] * inv_m[:, None]
        G += shift[:, None]
        H = G - inv_m[:, None]  # lower-empirical gap
        np.abs(G, out=G)
        np.abs(H, out=H)
        np.maximum(G, H, out=G)
        for r in range(ids.size):  # zero out columns left of each threshold
            G[r, : ids[r] - i0] = 0.0
        ks_block = G.max(axis=1)

        r = int(np.argmin(ks_block))
        if best is None or ks_block[r] < best[0]:
            best = (float(ks_block[r]), int(ids[r]))

    i = best[1]
    m = n - i
    tau = 1.0 + m / (suffix_log[i] - m * logx[i])
    fitted = 1.0 - np.exp((1.0 - tau) * (logx[i:] - logx[i]))
    upper = np.arange(1, m + 1, dtype=float) / m
    ks = float(np.max(np.maximum(np.abs(upper - fitted), np.abs(upper - 1.0 / m - fitted))))
    return PowerLawFit(tau=float(tau), x_min=float(x[i]), ks_distance=ks, tail_size=int(m))


def degree_replicating_weights(graph: Graph) -> WeightSequence:
    """Use the degree sequence as the weight sequence; total is 2m.

    The graph must have no isolated vertices (run on a connected component).
    """
    deg = graph.degrees()
    if np.any(deg == 0):
        raise ValueError("graph has isolated vertices; extract a component first")
    return WeightSequence.from_values(deg.astype(float))
