"""Feature-matrix reduction: numerical, variation, and correlation cleaning.

A feature matrix holds one row per graph and one column per feature key,
with an explicit mask for undefined cells. Cleaning drops columns: anything
non-finite anywhere, anything with a normalized coefficient of variation
below threshold, and all but the highest-priority member of each group of
rank-correlated columns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "FeatureMatrix",
    "CleaningRecord",
    "numerical_clean",
    "variation_clean",
    "spearman",
    "correlation_group",
]

VARIATION_THRESHOLD = 0.01
CORRELATION_THRESHOLD = 0.99


@dataclass
class FeatureMatrix:
    """Rectangular feature values with row labels, column keys, and a mask."""

    row_labels: list[str]
    columns: list[str]
    values: np.ndarray  # (rows, cols) float
    mask: np.ndarray = None  # True where undefined

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.row_labels), len(self.columns)):
            raise ValueError("values shape must match labels")
        if self.mask is None:
            self.mask = ~np.isfinite(self.values)
        else:
            self.mask = np.asarray(self.mask, dtype=bool) | ~np.isfinite(self.values)

    def select_columns(self, keys: list[str]) -> "FeatureMatrix":
        idx = [self.columns.index(k) for k in keys]
        return FeatureMatrix(
            row_labels=list(self.row_labels),
            columns=list(keys),
            values=self.values[:, idx].copy(),
            mask=self.mask[:, idx].copy(),
        )

    def vstack(self, other: "FeatureMatrix") -> "FeatureMatrix":
        if self.columns != other.columns:
            raise ValueError("column keys differ")
        return FeatureMatrix(
            row_labels=list(self.row_labels) + list(other.row_labels),
            columns=list(self.columns),
            values=np.vstack([self.values, other.values]),
            mask=np.vstack([self.mask, other.mask]),
        )


@dataclass
class CleaningRecord:
    column: str
    rule: str  # numerical | variation | zero-mean | correlation
    value: float
    kept: str = ""  # surviving column, for correlation drops

    def __str__(self):
        extra = f" kept={self.kept}" if self.kept else ""
        return f"column={self.column} rule={self.rule} value={self.value:.6g}{extra}"


def numerical_clean(matrix: FeatureMatrix, report: list | None = None) -> FeatureMatrix:
    """Drop every column with any undefined or non-finite cell."""
    if not matrix.columns:
        raise ValueError("empty matrix")
    bad = matrix.mask.any(axis=0)
    if bad.all():
        raise ValueError("numerical cleaning dropped every column")
    keep = [c for c, b in zip(matrix.columns, bad) if not b]
    for c, b in zip(matrix.columns, bad):
        if b:
            rec = CleaningRecord(c, "numerical", float("nan"))
            logger.info("dropped %s", rec)
            if report is not None:
                report.append(rec)
    return matrix.select_columns(keep)


def variation_clean(
    matrix: FeatureMatrix,
    threshold: float = VARIATION_THRESHOLD,
    report: list | None = None,
) -> FeatureMatrix:
    """Drop columns whose normalized coefficient of variation is below threshold.

    NCV = sample_std / (|mean| * sqrt(rows - 1)); zero-mean columns have no
    NCV and are dropped with a logged reason.
    """
    r = matrix.values.shape[0]
    if r < 2:
        raise ValueError("variation cleaning needs at least 2 rows")
    if matrix.mask.any():
        raise ValueError("run numerical cleaning first")
    keep = []
    for j, col in enumerate(matrix.columns):
        x = matrix.values[:, j]
        mean = x.mean()
        std = x.std(ddof=1)
        if mean == 0.0:
            rec = CleaningRecord(col, "zero-mean", 0.0)
            logger.info("dropped %s (NCV undefined)", rec)
            if report is not None:
                report.append(rec)
            continue
        ncv = std / (abs(mean) * np.sqrt(r - 1))
        if ncv < threshold:
            rec = CleaningRecord(col, "variation", float(ncv))
            logger.info("dropped %s", rec)
            if report is not None:
                report.append(rec)
            continue
        keep.append(col)
    return matrix.select_columns(keep)


def _average_ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    sx = x[order]
    new_run = np.concatenate([[True], sx[1:] != sx[:-1]])
    run_ids = np.cumsum(new_run) - 1
    counts = np.bincount(run_ids)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    avg = starts + (counts + 1) / 2.0  # 1-based average rank per tied run
    ranks = np.empty(x.size)
    ranks[order] = avg[run_ids]
    return ranks


def spearman(xs, ys) -> float:
    """Pearson correlation of average-tie ranks."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size or x.size < 3:
        raise ValueError("need equal lengths >= 3")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    vx = float(np.sum(rx * rx))
    vy = float(np.sum(ry * ry))
    if vx == 0.0 or vy == 0.0:
        raise ValueError("zero rank variance")
    return float(np.sum(rx * ry) / np.sqrt(vx * vy))


def correlation_group(
    matrix: FeatureMatrix,
    priority: list[str],
    threshold: float = CORRELATION_THRESHOLD,
    report: list | None = None,
) -> FeatureMatrix:
    """Keep one feature per connected component of the |rank correlation| graph.

    Components connect columns whose absolute Spearman correlation exceeds
    the threshold (correlation is not transitive; component membership is).
    The survivor is the component's highest-priority feature; column order of
    survivors follows the input order.
    """
    missing = [c for c in matrix.columns if c not in priority]
    if missing:
        raise ValueError(f"priority list does not cover columns: {missing}")
    cols = matrix.columns
    k = len(cols)
    rank = {c: priority.index(c) for c in cols}
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    corr = {}
    for i in range(k):
        for j in range(i + 1, k):
            try:
                rho = spearman(matrix.values[:, i], matrix.values[:, j])
            except ValueError:
                continue  # constant column cannot correlate
            if abs(rho) > threshold:
                corr[(i, j)] = rho
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    keep = set()
    for members in groups.values():
        best = min(members, key=lambda i: rank[cols[i]])
        keep.add(best)
        for i in members:
            if i != best:
                rho = corr.get((min(i, best), max(i, best)), float("nan"))
                rec = CleaningRecord(cols[i], "correlation", float(rho), kept=cols[best])
                logger.info("dropped %s", rec)
                if report is not None:
                    report.append(rec)
    return matrix.select_columns([c for i, c in enumerate(cols) if i in keep])
