import logging
import math
from fractions import Fraction
from typing import List, Sequence, Tuple

import networkx as nx
import numpy as np

from app.core.config import settings
from app.core.exceptions import (ClusterMetricsException,
                                 GammaThresholdException,
                                 OracleSizeCapException)
from app.models.cluster import ClusterMetrics, ClusterTree, canonical_key
from app.models.graph import MetricGraph, VertexSet, complement, vertex_set
from app.services.graph_core import Edge, induced_subgraph, minimum_spanning_tree

logger = logging.getLogger(__name__)


def _ratio(alpha: float, beta: float) -> float:
    if beta == 0:
        return math.inf if alpha > 0 else math.nan
    return alpha / beta


def meets_threshold(alpha: float, beta: float, gamma: float, integral: bool) -> bool:
    """
    Decides alpha / beta >= gamma.

    Integer weights are compared exactly, reading gamma as the decimal it was
    written as (1.000001 is 1000001/1000000). Other weights use a float
    comparison with relative slack GAMMA_REL_TOL.
    """
    if beta == 0:
        return alpha > 0
    if integral and math.isfinite(alpha) and math.isfinite(beta):
        threshold = Fraction(str(gamma))
        return int(alpha) * threshold.denominator >= threshold.numerator * int(beta)
    return alpha >= gamma * beta * (1.0 - settings.GAMMA_REL_TOL)


def cluster_metrics(graph: MetricGraph, subset: Sequence[int]) -> ClusterMetrics:
    """
    Alpha is the cheapest edge with exactly one endpoint in the subset, beta the
    costliest edge with both endpoints inside, gamma their ratio.
    """
    members = vertex_set(subset, graph.vertex_count)
    if len(members) < 2:
        raise ClusterMetricsException("beta undefined (empty intra-edge set)")
    outside = complement(members, graph.vertex_count)
    if not outside:
        raise ClusterMetricsException("alpha undefined (no outside vertex)")
    inside = np.array(members)
    rest = np.array(outside)
    beta = float(graph.weights[np.ix_(inside, inside)].max())
    alpha = float(graph.weights[np.ix_(inside, rest)].min())
    return ClusterMetrics(alpha=alpha, beta=beta, gamma=_ratio(alpha, beta))


def _is_clique(graph: MetricGraph) -> bool:
    return bool(np.isfinite(graph.weights).all())


def _split(vertices: Sequence[int], edges: Sequence[Edge]) -> List[VertexSet]:
    forest = nx.Graph()
    forest.add_nodes_from(vertices)
    forest.add_edges_from((a, b) for a, b, _ in edges)
    return [tuple(sorted(component)) for component in nx.connected_components(forest)]


def gamma_clustering(graph: MetricGraph, gamma: float) -> ClusterTree:
    """
    Finds the optimal clustering at threshold `gamma` by peeling the minimum
    spanning tree.

    Trees wait on a stack, starting with the MST. Each popped tree loses every
    edge of its maximal weight alpha (ties included); each remaining component
    of two or more vertices is tested on its induced graph with
    gamma' = alpha / beta and pushed back for further splitting.
    """
    if gamma <= 1:
        raise GammaThresholdException()

    n = graph.vertex_count
    stack: List[Tuple[VertexSet, List[Edge]]] = [
        (tuple(range(n)), minimum_spanning_tree(graph))
    ]
    found: List[Tuple[VertexSet, ClusterMetrics]] = []

    while stack:
        vertices, edges = stack.pop()
        if not edges:
            continue
        alpha = max(weight for _, _, weight in edges)
        kept = [edge for edge in edges if edge[2] != alpha]
        for component in _split(vertices, kept):
            if len(component) < 2:
                continue
            sub = induced_subgraph(graph, component)
            beta = sub.max_weight
            if _is_clique(sub) and meets_threshold(alpha, beta, gamma, graph.is_integral):
                found.append(
                    (component, ClusterMetrics(alpha=alpha, beta=beta, gamma=_ratio(alpha, beta)))
                )
            members = set(component)
            stack.append((component, [edge for edge in kept if edge[0] in members]))

    tree = ClusterTree.build(n, gamma, found)
    logger.info(f"gamma_clustering: {len(tree)} clusters at gamma={gamma} on {n} vertices")
    return tree


def brute_force_clusters(graph: MetricGraph, gamma: float) -> List[VertexSet]:
    """Checks every proper subset of two or more vertices directly (oracle, small graphs only)."""
    if gamma <= 1:
        raise GammaThresholdException()
    n = graph.vertex_count
    if n > settings.ORACLE_MAX_VERTICES:
        raise OracleSizeCapException(
            f"oracle size cap: {n} vertices exceeds {settings.ORACLE_MAX_VERTICES}"
        )

    weights = graph.weights
    clusters: List[VertexSet] = []
    for mask in range(1, (1 << n) - 1):
        members = [v for v in range(n) if mask >> v & 1]
        if len(members) < 2:
            continue
        outside = [v for v in range(n) if not mask >> v & 1]
        beta = float(weights[np.ix_(members, members)].max())
        alpha = float(weights[np.ix_(members, outside)].min())
        if meets_threshold(alpha, beta, gamma, graph.is_integral):
            clusters.append(tuple(members))
    clusters.sort(key=canonical_key)
    return clusters


def verify_clustering(graph: MetricGraph, tree: ClusterTree) -> List[str]:
    """Recomputes every cluster's metrics and reports each broken tree invariant."""
    violations: List[str] = []
    n = graph.vertex_count
    if tree.vertex_count != n:
        violations.append(
            f"size: tree is over {tree.vertex_count} vertices, graph has {n}"
        )
    if tree.gamma_threshold <= 1:
        violations.append(f"threshold: gamma threshold {tree.gamma_threshold} is not above 1")

    sets = [frozenset(cluster.vertices) for cluster in tree.clusters]
    for i, cluster in enumerate(tree.clusters):
        members = cluster.vertices
        if not 2 <= len(members) <= n - 1:
            violations.append(f"size: cluster {i} has {len(members)} vertices")
            continue
        if members[0] < 0 or members[-1] >= n:
            violations.append(f"size: cluster {i} has out-of-range vertices")
            continue
        metrics = cluster_metrics(graph, members)
        if not meets_threshold(metrics.alpha, metrics.beta, tree.gamma_threshold, graph.is_integral):
            violations.append(
                f"threshold: cluster {i} has gamma {metrics.gamma:.9g} "
                f"below {tree.gamma_threshold}"
            )
        if (metrics.alpha, metrics.beta) != (cluster.metrics.alpha, cluster.metrics.beta):
            violations.append(
                f"metrics: cluster {i} stores alpha={cluster.metrics.alpha}, "
                f"beta={cluster.metrics.beta}; recomputed {metrics.alpha}, {metrics.beta}"
            )
        expected_parent = None
        for j, other in enumerate(sets):
            if sets[i] < other and (
                expected_parent is None or len(other) < len(sets[expected_parent])
            ):
                expected_parent = j
        if cluster.parent != expected_parent:
            violations.append(
                f"parent: cluster {i} links to {cluster.parent}, smallest superset is {expected_parent}"
            )

    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            a, b = sets[i], sets[j]
            if a == b:
                violations.append(f"laminarity: clusters {i} and {j} are identical")
            elif a & b and not (a < b or b < a):
                violations.append(f"laminarity: clusters {i} and {j} overlap without nesting")
    return violations
