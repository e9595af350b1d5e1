import logging
import time
from typing import List, Optional, Sequence, Set

import numpy as np

from app.models.graph import MetricGraph
from app.models.tour import Tour
from app.services.tours import is_feasible

logger = logging.getLogger(__name__)

_IMPROVEMENT_EPS = 1e-12


def nearest_neighbor(graph: MetricGraph, start: int) -> List[int]:
    """Greedy construction: always move to the closest unvisited vertex (lowest index on ties)."""
    n = graph.vertex_count
    visited = np.zeros(n, dtype=bool)
    order = [start]
    visited[start] = True
    for _ in range(n - 1):
        row = np.where(visited, np.inf, graph.weights[order[-1]])
        nxt = int(np.argmin(row))
        order.append(nxt)
        visited[nxt] = True
    return order


def two_opt(
    graph: MetricGraph,
    order: List[int],
    clusters: Sequence[Set[int]] = (),
    deadline: Optional[float] = None,
) -> List[int]:
    """
    First-improvement 2-opt on a cycle. A move reverses order[i+1..j]; with
    clusters given, a move is taken only if every cluster stays consecutive.
    Stops at a local optimum or at the deadline.
    """
    w = graph.weights
    n = len(order)
    if n < 4:
        return order
    tour = list(order)
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            if deadline is not None and time.monotonic() > deadline:
                logger.debug("two_opt: deadline reached")
                return tour
            a, b = tour[i], tour[i + 1]
            for j in range(i + 2, n if i > 0 else n - 1):
                c, d = tour[j], tour[(j + 1) % n]
                delta = w[a, c] + w[b, d] - w[a, b] - w[c, d]
                if delta >= -_IMPROVEMENT_EPS:
                    continue
                candidate = tour[:i + 1] + tour[i + 1:j + 1][::-1] + tour[j + 1:]
                if clusters and not is_feasible(Tour.cycle(candidate), clusters):
                    continue
                tour = candidate
                improved = True
                break
            if improved:
                break
    return tour
