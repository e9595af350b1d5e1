import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import InvalidGraphException
from app.models.graph import MetricGraph, MetricStatus, vertex_set

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]
Triple = Tuple[int, int, int]


def default_tolerance(graph: MetricGraph) -> float:
    """Triangle-inequality slack scaled to the instance: METRIC_REL_TOL x max weight."""
    return settings.METRIC_REL_TOL * graph.max_weight


def check_metric(graph: MetricGraph, tol: Optional[float] = None) -> List[Triple]:
    """
    Scans every ordered triple and returns those with w(a,c) > w(a,b) + w(b,c) + tol.

    Reports rather than rejects: rounded TSPLIB distances are allowed to break
    the inequality by rounding. The result is recorded on `graph.metric_checked`.
    """
    if tol is None:
        tol = default_tolerance(graph)
    if tol < 0:
        raise InvalidGraphException(f"tolerance must be non-negative, got {tol}")

    w = graph.weights
    n = graph.vertex_count
    violations: List[Triple] = []
    for b in range(n):
        # Broadcast the two-hop cost through b against every direct edge (a, c).
        detour = w[:, b][:, None] + w[b, :][None, :]
        bad = w > detour + tol
        bad[b, :] = False
        bad[:, b] = False
        for a, c in np.argwhere(bad):
            violations.append((int(a), b, int(c)))

    violations.sort()
    graph.metric_checked = (
        MetricStatus.METRIC if not violations else MetricStatus.VIOLATIONS_FOUND
    )
    if violations:
        logger.debug(f"check_metric: {len(violations)} violating triples (tol={tol})")
    return violations


def is_metric(graph: MetricGraph) -> bool:
    """Runs check_metric once per graph and answers from the recorded status afterwards."""
    if graph.metric_checked == MetricStatus.UNCHECKED:
        check_metric(graph)
    return graph.metric_checked == MetricStatus.METRIC


def induced_subgraph(graph: MetricGraph, subset: Sequence[int]) -> MetricGraph:
    """
    Restricts the graph to `subset`, re-indexing its members to 0..k-1.

    The returned graph's `origin` maps each new index back to the vertex it
    came from in the original graph (composing through nested extractions).
    """
    if len(subset) == 0:
        raise InvalidGraphException("empty induced subgraph")
    members = vertex_set(subset, graph.vertex_count)
    index = np.array(members, dtype=np.int64)
    weights = graph.weights[np.ix_(index, index)]
    labels = [graph.label(v) for v in members] if graph.labels is not None else None
    if graph.origin is not None:
        origin = tuple(graph.origin[v] for v in members)
    else:
        origin = members
    sub = MetricGraph(weights=weights, labels=labels, origin=origin)
    # Metricity is inherited by every induced subgraph.
    if graph.metric_checked == MetricStatus.METRIC:
        sub.metric_checked = MetricStatus.METRIC
    return sub


def minimum_spanning_tree(graph: MetricGraph) -> List[Edge]:
    """
    Prim's algorithm over the dense weight matrix in O(n^2).

    Grows from vertex 0. Among equally cheap candidates the smallest vertex
    index joins first, and a vertex keeps its earliest-found attachment when a
    later one only ties, so the tree is deterministic. Edges come out in the
    order their far endpoint joined, as (min index, max index, weight).
    """
    n = graph.vertex_count
    w = graph.weights
    in_tree = np.zeros(n, dtype=bool)
    key = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    key[0] = 0.0
    edges: List[Edge] = []

    for _ in range(n):
        candidates = np.where(in_tree, np.inf, key)
        u = int(np.argmin(candidates))
        if not np.isfinite(candidates[u]):
            raise InvalidGraphException("graph is disconnected; no spanning tree exists")
        in_tree[u] = True
        if parent[u] >= 0:
            p = int(parent[u])
            edges.append((min(p, u), max(p, u), float(w[p, u])))
        improved = (~in_tree) & (w[u] < key)
        key[improved] = w[u][improved]
        parent[improved] = u

    return edges


def tree_weight(edges: Sequence[Edge]) -> float:
    return float(sum(weight for _, _, weight in edges))
