from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import InvalidGraphException

# Sorted, duplicate-free tuple of vertex indices.
VertexSet = Tuple[int, ...]


class MetricStatus(str, Enum):
    """Outcome of the last triangle-inequality scan on a graph."""

    UNCHECKED = "unchecked"
    METRIC = "metric"
    VIOLATIONS_FOUND = "violations_found"


@dataclass(eq=False)
class MetricGraph:
    """
    Complete symmetric weighted graph over vertices 0..n-1.

    The weight matrix is copied to float64 and frozen on construction.
    `np.inf` is accepted for absent edges so that incomplete graphs can be
    represented; every generator and parser in the toolkit produces complete
    graphs. `origin` maps vertices back to a parent graph when the graph is
    an induced subgraph.
    """

    weights: np.ndarray
    labels: Optional[List[str]] = None
    origin: Optional[Tuple[int, ...]] = None
    metric_checked: MetricStatus = MetricStatus.UNCHECKED
    is_integral: bool = field(init=False, default=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise InvalidGraphException(
                f"weights must be a non-empty square matrix, got shape {w.shape}"
            )
        if np.isnan(w).any():
            raise InvalidGraphException("weights contain NaN")
        if not np.array_equal(w, w.T):
            a, b = np.argwhere(w != w.T)[0]
            raise InvalidGraphException(
                f"asymmetric weights: w({a},{b})={w[a, b]} but w({b},{a})={w[b, a]}"
            )
        if np.any(np.diag(w) != 0):
            raise InvalidGraphException("diagonal weights must be zero")
        if np.any(w < 0):
            raise InvalidGraphException("weights must be non-negative")
        if self.labels is not None and len(self.labels) != w.shape[0]:
            raise InvalidGraphException(
                f"{len(self.labels)} labels given for {w.shape[0]} vertices"
            )
        w.flags.writeable = False
        self.weights = w
        finite = np.isfinite(w)
        self.is_integral = bool(finite.all() and np.all(w == np.round(w)))

    @property
    def vertex_count(self) -> int:
        return self.weights.shape[0]

    @property
    def max_weight(self) -> float:
        finite = self.weights[np.isfinite(self.weights)]
        return float(finite.max()) if finite.size else 0.0

    def weight(self, a: int, b: int) -> float:
        return float(self.weights[a, b])

    def label(self, vertex: int) -> str:
        if self.labels is not None:
            return self.labels[vertex]
        return str(vertex + 1)


def vertex_set(
    members: Iterable[int],
    vertex_count: Optional[int] = None,
    allow_empty: bool = False,
) -> VertexSet:
    """Builds a VertexSet, validating indices against `vertex_count` when given."""
    result = tuple(sorted(set(int(v) for v in members)))
    if not result and not allow_empty:
        raise InvalidGraphException("vertex set must not be empty")
    if vertex_count is not None and result:
        if result[0] < 0 or result[-1] >= vertex_count:
            raise InvalidGraphException(
                f"vertex set {list(result)} has indices outside [0, {vertex_count})"
            )
    return result


def complement(members: Sequence[int], vertex_count: int) -> VertexSet:
    inside = set(members)
    return tuple(v for v in range(vertex_count) if v not in inside)
