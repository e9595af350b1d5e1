import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from app.core.exceptions import InvalidGraphException, NestedClusteringException
from app.models.cluster import ClusterTree
from app.models.graph import MetricGraph, VertexSet, vertex_set
from app.models.tour import ModifiedGraph, Tour, TourKind
from app.schemas.report import DeformReport
from app.services.graph_core import induced_subgraph, is_metric, minimum_spanning_tree

logger = logging.getLogger(__name__)

Clustering = Union[ClusterTree, Sequence[Sequence[int]]]


def _validate(graph: MetricGraph, tour: Tour) -> None:
    n = graph.vertex_count
    if min(tour.order) < 0 or max(tour.order) >= n:
        raise InvalidGraphException(f"tour visits vertices outside 0..{n - 1}")


def cluster_sets(clustering: Clustering) -> List[Set[int]]:
    if isinstance(clustering, ClusterTree):
        return [set(members) for members in clustering.vertex_sets()]
    return [set(members) for members in clustering]


def tour_cost(graph: MetricGraph, tour: Tour) -> float:
    """Sum of consecutive edge weights, closing edge included for cycles."""
    _validate(graph, tour)
    order = np.array(tour.order, dtype=np.int64)
    if len(order) < 2:
        return 0.0
    heads = order if tour.is_cycle else order[:-1]
    tails = np.roll(order, -1) if tour.is_cycle else order[1:]
    return float(graph.weights[heads, tails].sum())


def is_consecutive(tour: Tour, cluster: Iterable[int]) -> bool:
    members = set(cluster)
    inside = [v in members for v in tour.order]
    count = sum(inside)
    if count <= 1 or count == len(inside):
        return True
    if tour.is_cycle:
        # A cyclic block has exactly one place where a member is followed by a non-member.
        exits = sum(
            1 for i in range(len(inside)) if inside[i] and not inside[(i + 1) % len(inside)]
        )
        return exits == 1
    positions = [i for i, flag in enumerate(inside) if flag]
    return positions[-1] - positions[0] + 1 == count


def _gather(order: Sequence[int], members: Set[int]) -> List[int]:
    """Moves every member to the position of the first one, keeping both relative orders."""
    first = next((i for i, v in enumerate(order) if v in members), None)
    if first is None:
        return list(order)
    head = list(order[:first])
    tail = order[first:]
    return head + [v for v in tail if v in members] + [v for v in tail if v not in members]


def deform(tour: Tour, cluster: Iterable[int]) -> Tour:
    """
    Reorders `tour` so that the cluster is visited as one block.

    Members are pulled forward to the first member's position; everything
    else keeps its relative order. A cycle is first rotated to start at its
    first non-member. A tour that already visits the cluster consecutively is
    returned unchanged.
    """
    members = set(cluster)
    if is_consecutive(tour, members):
        return tour
    order = list(tour.order)
    if tour.is_cycle:
        start = next(i for i, v in enumerate(order) if v not in members)
        order = order[start:] + order[:start]
    return tour.with_order(_gather(order, members))


def inter_set_edges(tour: Tour, cluster: Iterable[int]) -> int:
    members = set(cluster)
    return sum(1 for a, b in tour.edges() if (a in members) != (b in members))


def deform_report(
    graph: MetricGraph, tour: Tour, cluster: Sequence[int]
) -> Tuple[Tour, DeformReport]:
    """
    Runs deform and reports the cost change against the allowed increase
    (2n + 1) * beta, where the input crosses the cluster boundary 2(n + 1) times.
    The bound is only claimed on metric graphs for clusters with gamma > 1.
    """
    members = vertex_set(cluster, graph.vertex_count)
    crossings = inter_set_edges(tour, members)
    extra_visits = max(math.ceil(crossings / 2) - 1, 0)

    beta = 0.0
    applicable = is_metric(graph)
    if len(members) >= 2:
        index = np.array(members)
        beta = float(graph.weights[np.ix_(index, index)].max())
        if len(members) < graph.vertex_count:
            outside = np.setdiff1d(np.arange(graph.vertex_count), index)
            alpha = float(graph.weights[np.ix_(index, outside)].min())
            applicable = applicable and alpha > beta

    result = deform(tour, members)
    report = DeformReport(
        input_cost=tour_cost(graph, tour),
        output_cost=tour_cost(graph, result),
        extra_visits=extra_visits,
        bound=(2 * extra_visits + 1) * beta,
        bound_applicable=applicable,
    )
    return result, report


def _cycle_cut(order: Sequence[int], clusters: List[Set[int]]) -> int:
    for i in range(len(order)):
        a, b = order[i - 1], order[i]
        if not any(a in members and b in members for members in clusters):
            return i
    return 0


def deform_all(
    tour: Tour, clustering: Clustering, order: Optional[Sequence[int]] = None
) -> Tour:
    """
    Deforms the tour for every cluster so the result is feasible for the whole
    clustering.

    `order` permutes the clusters; the outcome does not depend on it. Cycles
    are cut once between two neighbours sharing no cluster, the open path is
    deformed cluster by cluster, and the result is rotated back to begin with
    the tour's original first vertex.
    """
    clusters = cluster_sets(clustering)
    if order is None:
        order = range(len(clusters))
    sequence = list(tour.order)
    cut = _cycle_cut(sequence, clusters) if tour.is_cycle else 0
    sequence = sequence[cut:] + sequence[:cut]
    for index in order:
        members = clusters[index]
        path = Tour.path(sequence)
        if not is_consecutive(path, members):
            sequence = _gather(sequence, members)
    if tour.is_cycle:
        start = sequence.index(tour.order[0])
        sequence = sequence[start:] + sequence[:start]
    return tour.with_order(sequence)


def is_feasible(tour: Tour, clustering: Clustering) -> bool:
    return all(is_consecutive(tour, members) for members in cluster_sets(clustering))


def modified_cost(mg: ModifiedGraph, tour: Tour) -> float:
    """
    Tour cost on the surcharged graph: an edge between vertices of different
    clusters costs its weight plus surcharge_factor * max(beta_i, beta_j).
    """
    if mg.clustering.is_nested:
        raise NestedClusteringException()
    _validate(mg.base, tour)
    owner: Dict[int, int] = mg.clustering.innermost()
    betas = [cluster.metrics.beta for cluster in mg.clustering.clusters]

    total = 0.0
    for a, b in tour.edges():
        total += mg.base.weights[a, b]
        cluster_a, cluster_b = owner.get(a), owner.get(b)
        if cluster_a != cluster_b:
            beta_a = betas[cluster_a] if cluster_a is not None else 0.0
            beta_b = betas[cluster_b] if cluster_b is not None else 0.0
            total += mg.surcharge_factor * max(beta_a, beta_b)
    return float(total)


def mst_doubling_tour(
    graph: MetricGraph, vertices: Sequence[int], clustering: Optional[Clustering] = None
) -> Tour:
    """
    Doubles the minimum spanning tree of the chosen vertices, walks it as an
    Euler tour from its first vertex and keeps each vertex's first
    appearance. Costs at most twice the MST weight on metric graphs.

    Children are walked in ascending order. With a clustering, a vertex's
    children are walked by how many of the vertex's clusters their subtree
    leaves, fewest first, so a cluster whose tree is left through a single
    branch is finished before that branch is taken.
    """
    members = vertex_set(vertices, graph.vertex_count)
    if len(members) <= 2:
        return Tour.cycle(members)
    sub = induced_subgraph(graph, members)
    adjacency: Dict[int, List[int]] = {v: [] for v in range(len(members))}
    for a, b, _ in minimum_spanning_tree(sub):
        adjacency[a].append(b)
        adjacency[b].append(a)

    parent = {0: -1}
    order = [0]
    for v in order:
        for u in sorted(adjacency[v]):
            if u not in parent:
                parent[u] = v
                order.append(u)
    children: Dict[int, List[int]] = {v: [] for v in parent}
    for v in order[1:]:
        children[parent[v]].append(v)

    if clustering is not None:
        clusters = [
            {members.index(v) for v in cluster if v in members}
            for cluster in cluster_sets(clustering)
        ]
        subtree: Dict[int, Set[int]] = {}
        for v in reversed(order):
            subtree[v] = {v}.union(*(subtree[u] for u in children[v]))
        for v in order:
            own = [cluster for cluster in clusters if v in cluster]
            children[v].sort(key=lambda u: (sum(1 for c in own if not subtree[u] <= c), u))

    # First appearances of a doubled-tree Euler walk are a DFS preorder.
    preorder: List[int] = []
    stack = [0]
    while stack:
        v = stack.pop()
        preorder.append(v)
        stack.extend(reversed(children[v]))
    return Tour.cycle([members[v] for v in preorder])


def normalize_tour(tour: Tour) -> Tour:
    """
    Canonical form for reporting: cycles start at their smallest vertex and
    run towards the smaller neighbour; paths take the smaller of the two
    reading directions.
    """
    order = list(tour.order)
    if tour.kind == TourKind.OPEN_PATH:
        return tour.with_order(min(order, order[::-1]))
    start = order.index(min(order))
    order = order[start:] + order[:start]
    if len(order) > 2 and order[-1] < order[1]:
        order = [order[0]] + order[:0:-1]
    return tour.with_order(order)
