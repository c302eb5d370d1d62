"""Boolean distance functions on the unit hypercube and their ball volumes.

Points live in [-1/2, 1/2]^d. A distance spec is a binary tree whose leaves
are coordinate indices and whose inner nodes combine the two child distances
with min or max. Evaluating the tree on the vector of per-coordinate absolute
differences (with or without torus wraparound) yields the distance between
two points. The all-max tree is the usual max-norm; the all-min tree is the
minimum-component distance (MCD); mixed trees are non-metric in general.

Specs are written in a tiny DSL:

    expr := "x" INT | "min(" expr "," expr ")" | "max(" expr "," expr ")"

with 0-based coordinate indices, whitespace-insensitive. Every coordinate
0..d-1 must appear exactly once.

Ball volumes are always the translation-invariant measure on the torus,
regardless of which topology supplies the distances; volumes at radii past
the torus scale clamp to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

__all__ = [
    "Topology",
    "Leaf",
    "Combine",
    "DistanceSpec",
    "DistanceSpecError",
    "parse_distance_spec",
    "spec_to_string",
    "spec_dimension",
    "leaf_indices",
    "validate_spec",
    "max_norm_spec",
    "mcd_spec",
    "min_blocks",
    "is_pure",
    "coordinate_distance",
    "boolean_distance",
    "distance_from_coordinate_distances",
    "ball_volume",
    "sample_position",
]


class Topology(Enum):
    """Ground-space topology: wraparound torus or plain cube."""

    TORUS = "torus"
    CUBE = "cube"


@dataclass(frozen=True)
class Leaf:
    """A single coordinate; distance is the per-coordinate distance."""

    index: int


@dataclass(frozen=True)
class Combine:
    """min or max of the two child distances."""

    op: str  # "min" | "max"
    left: "DistanceSpec"
    right: "DistanceSpec"

    def __post_init__(self):
        if self.op not in ("min", "max"):
            raise ValueError(f"op must be 'min' or 'max', got {self.op!r}")


DistanceSpec = Union[Leaf, Combine]


class DistanceSpecError(ValueError):
    """Raised for DSL syntax errors and coordinate-partition violations."""


def leaf_indices(spec: DistanceSpec) -> list[int]:
    """All leaf coordinate indices in left-to-right order."""
    if isinstance(spec, Leaf):
        return [spec.index]
    return leaf_indices(spec.left) + leaf_indices(spec.right)


def spec_dimension(spec: DistanceSpec) -> int:
    return len(leaf_indices(spec))


def validate_spec(spec: DistanceSpec, d: int) -> None:
    """Check that the leaves partition {0, ..., d-1}, each index exactly once."""
    seen = leaf_indices(spec)
    problems = []
    out_of_range = sorted({i for i in seen if i < 0 or i >= d})
    for i in out_of_range:
        problems.append(f"coordinate {i} out of range for d={d}")
    counts = {}
    for i in seen:
        counts[i] = counts.get(i, 0) + 1
    repeated = sorted(i for i, k in counts.items() if k > 1)
    missing = sorted(i for i in range(d) if i not in counts)
    for i in missing:
        problems.append(f"coordinate {i} missing")
    for i in repeated:
        problems.append(f"coordinate {i} repeated")
    if problems:
        raise DistanceSpecError("; ".join(problems))


class _Parser:
    """Recursive-descent parser for the distance DSL."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> DistanceSpecError:
        return DistanceSpecError(f"syntax error at position {self.pos}: {msg}")

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def parse_expr(self) -> DistanceSpec:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise self.error("expected expression, found end of input")
        if self.text.startswith("min(", self.pos) or self.text.startswith("max(", self.pos):
            op = self.text[self.pos : self.pos + 3]
            self.pos += 4
            left = self.parse_expr()
            self.expect(",")
            right = self.parse_expr()
            self.expect(")")
            return Combine(op, left, right)
        if self.text[self.pos] == "x":
            self.pos += 1
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == start:
                raise self.error("expected coordinate index after 'x'")
            return Leaf(int(self.text[start : self.pos]))
        raise self.error(f"expected 'x<i>', 'min(' or 'max(', found {self.text[self.pos]!r}")

    def parse(self) -> DistanceSpec:
        spec = self.parse_expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error(f"unexpected trailing input {self.text[self.pos]!r}")
        return spec


def parse_distance_spec(text: str, d: int) -> DistanceSpec:
    """Parse the DSL and validate the exactly-once coordinate partition for d."""
    spec = _Parser(text).parse()
    validate_spec(spec, d)
    return spec


def spec_to_string(spec: DistanceSpec) -> str:
    if isinstance(spec, Leaf):
        return f"x{spec.index}"
    return f"{spec.op}({spec_to_string(spec.left)}, {spec_to_string(spec.right)})"


def max_norm_spec(d: int) -> DistanceSpec:
    """All-max tree over d coordinates (the max-norm)."""
    return _pure_tree(d, "max")


def mcd_spec(d: int) -> DistanceSpec:
    """All-min tree over d coordinates (minimum-component distance)."""
    return _pure_tree(d, "min")


def _pure_tree(d: int, op: str) -> DistanceSpec:
    if d < 1:
        raise ValueError("d must be >= 1")
    spec: DistanceSpec = Leaf(0)
    for i in range(1, d):
        spec = Combine(op, spec, Leaf(i))
    return spec


def is_pure(spec: DistanceSpec, op: str) -> bool:
    """True if every inner node uses the given op (leaves are trivially pure)."""
    if isinstance(spec, Leaf):
        return True
    return spec.op == op and is_pure(spec.left, op) and is_pure(spec.right, op)


def min_blocks(spec: DistanceSpec) -> list[DistanceSpec]:
    """Flatten the outer-min chain: subtrees whose roots are not min nodes.

    The full distance equals the min of the block distances; a spec whose
    root is max (or a leaf) is a single block.
    """
    if isinstance(spec, Combine) and spec.op == "min":
        return min_blocks(spec.left) + min_blocks(spec.right)
    return [spec]


def coordinate_distance(a, b, topology: Topology):
    """Per-coordinate distance; wraps around under the torus topology.

    Accepts scalars or numpy arrays.
    """
    diff = np.abs(np.asarray(a) - np.asarray(b))
    if topology is Topology.TORUS:
        diff = np.minimum(diff, 1.0 - diff)
    if diff.ndim == 0:
        return float(diff)
    return diff


def distance_from_coordinate_distances(spec: DistanceSpec, coord_dists) -> np.ndarray:
    """Evaluate the spec tree given per-coordinate distances.

    coord_dists has the coordinate axis last: shape (..., d).
    """
    coord_dists = np.asarray(coord_dists)

    def rec(node):
        if isinstance(node, Leaf):
            return coord_dists[..., node.index]
        l, r = rec(node.left), rec(node.right)
        return np.minimum(l, r) if node.op == "min" else np.maximum(l, r)

    return rec(spec)


def boolean_distance(spec: DistanceSpec, topology: Topology, x, y) -> float:
    """Distance between two points under the given spec and topology."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = spec_dimension(spec)
    if x.shape != (d,) or y.shape != (d,):
        raise ValueError(f"points must have dimension {d}, got {x.shape} and {y.shape}")
    diffs = coordinate_distance(x, y, topology)
    return float(distance_from_coordinate_distances(spec, diffs))


def ball_volume(spec: DistanceSpec, r):
    """Torus measure of the ball {x : dist(x, 0) <= r}, clamped to [0, 1].

    Leaf: min(1, 2r). max combines independent coordinate blocks, so volumes
    multiply; min uses inclusion-exclusion. Accepts scalars or arrays in r.
    Monotone nondecreasing in r.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValueError("radius must be nonnegative")

    def rec(node):
        if isinstance(node, Leaf):
            return np.minimum(1.0, 2.0 * arr)
        vl, vr = rec(node.left), rec(node.right)
        if node.op == "max":
            return vl * vr
        return vl + vr - vl * vr

    vol = rec(spec)
    if np.ndim(r) == 0:
        return float(vol)
    return vol


def sample_position(d: int, rng: np.random.Generator) -> np.ndarray:
    """One point with i.i.d. uniform coordinates on [-1/2, 1/2]."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return rng.uniform(-0.5, 0.5, size=d)
