import logging
import time
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence

import numpy as np

from app.core.exceptions import InvalidGraphException
from app.models.graph import MetricGraph

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[float, float], None]

ROOT = 0


class EdgeSelection:
    """
    Partial tour grown as a path from vertex 0.

    Each chosen edge leaves one vertex and enters another, so vertex degrees
    stay at most one in each direction, and a path can never close a short
    subtour. For every cluster the edges entering and leaving it are counted;
    a cluster may be left only once, and only after all its members have been
    visited. A cluster holding vertex 0 is the exception: the path may leave
    it early and come back once to finish it, since the closing edge joins
    the two pieces. The edge back to vertex 0 is counted like any other.
    """

    def __init__(self, vertex_count: int, clusters: Sequence[Sequence[int]] = ()):
        self.vertex_count = vertex_count
        self.clusters = [
            frozenset(members)
            for members in clusters
            if 2 <= len(set(members)) < vertex_count
        ]
        self.memberships: List[List[int]] = [[] for _ in range(vertex_count)]
        for index, members in enumerate(self.clusters):
            for v in members:
                if not 0 <= v < vertex_count:
                    raise InvalidGraphException(f"cluster vertex {v} outside 0..{vertex_count - 1}")
                self.memberships[v].append(index)
        self.sizes = [len(members) for members in self.clusters]
        self.rooted = [ROOT in members for members in self.clusters]
        self.visited_in = [0] * len(self.clusters)
        self.crossings_in = [0] * len(self.clusters)
        self.crossings_out = [0] * len(self.clusters)
        self.path: List[int] = [ROOT]
        self.visited = [False] * vertex_count
        self.visited[ROOT] = True
        for index in self.memberships[ROOT]:
            self.visited_in[index] += 1

    @property
    def last(self) -> int:
        return self.path[-1]

    @property
    def complete(self) -> bool:
        return len(self.path) == self.vertex_count

    def _crossing_allowed(self, u: int, v: int) -> bool:
        left = set(self.memberships[u])
        entered = set(self.memberships[v])
        for index in left - entered:
            if self.crossings_out[index] >= 1:
                return False
            if not self.rooted[index] and self.visited_in[index] < self.sizes[index]:
                return False
        for index in entered - left:
            if self.crossings_in[index] >= 1:
                return False
        return True

    def can_extend(self, v: int) -> bool:
        return not self.visited[v] and self._crossing_allowed(self.last, v)

    def can_close(self) -> bool:
        return self.complete and self._crossing_allowed(self.last, ROOT)

    def push(self, v: int) -> None:
        u = self.last
        for index in set(self.memberships[u]) - set(self.memberships[v]):
            self.crossings_out[index] += 1
        for index in set(self.memberships[v]) - set(self.memberships[u]):
            self.crossings_in[index] += 1
        for index in self.memberships[v]:
            self.visited_in[index] += 1
        self.visited[v] = True
        self.path.append(v)

    def pop(self) -> None:
        v = self.path.pop()
        u = self.last
        self.visited[v] = False
        for index in self.memberships[v]:
            self.visited_in[index] -= 1
        for index in set(self.memberships[v]) - set(self.memberships[u]):
            self.crossings_in[index] -= 1
        for index in set(self.memberships[u]) - set(self.memberships[v]):
            self.crossings_out[index] -= 1


def _mst_weight(w: np.ndarray) -> float:
    """Prim on a small dense matrix; returns only the weight."""
    k = w.shape[0]
    if k <= 1:
        return 0.0
    in_tree = np.zeros(k, dtype=bool)
    in_tree[0] = True
    key = w[0].copy()
    total = 0.0
    for _ in range(k - 1):
        candidates = np.where(in_tree, np.inf, key)
        u = int(np.argmin(candidates))
        total += candidates[u]
        in_tree[u] = True
        key = np.minimum(key, w[u])
    return float(total)


@dataclass
class BranchAndBoundResult:
    order: Optional[List[int]]
    cost: float
    nodes_expanded: int = 0
    timed_out: bool = False


class BranchAndBound:
    """
    Depth-first branch and bound from vertex 0, children tried nearest first.

    A node's bound is its path cost, plus the MST over the unvisited vertices
    and the path's last vertex, plus the cheapest edge from an unvisited
    vertex back to vertex 0. Nodes whose bound reaches the incumbent are cut.
    """

    def __init__(
        self,
        graph: MetricGraph,
        clusters: Sequence[Sequence[int]] = (),
        deadline: Optional[float] = None,
        progress: Optional[ProgressCallback] = None,
    ):
        self.graph = graph
        self.w = graph.weights
        self.clusters = clusters
        self.deadline = deadline
        self.progress = progress
        self.neighbours = [
            sorted(range(graph.vertex_count), key=lambda v, u=u: (self.w[u, v], v))
            for u in range(graph.vertex_count)
        ]

    def solve(self, incumbent: Optional[Sequence[int]] = None) -> BranchAndBoundResult:
        n = self.graph.vertex_count
        started = time.monotonic()
        result = BranchAndBoundResult(order=None, cost=np.inf)
        if incumbent is not None:
            result.order = list(incumbent)
            result.cost = float(sum(self.w[a, b] for a, b in zip(incumbent, list(incumbent[1:]) + [incumbent[0]])))

        selection = EdgeSelection(n, self.clusters)

        def bound(cost: float) -> float:
            rest = [v for v in range(n) if not selection.visited[v]]
            if not rest:
                return cost + self.w[selection.last, ROOT]
            nodes = np.array(rest + [selection.last])
            return cost + _mst_weight(self.w[np.ix_(nodes, nodes)]) + float(self.w[rest, ROOT].min())

        def search(cost: float) -> None:
            if result.timed_out:
                return
            result.nodes_expanded += 1
            if self.deadline is not None and time.monotonic() > self.deadline:
                result.timed_out = True
                return
            if selection.complete:
                if selection.can_close():
                    total = cost + self.w[selection.last, ROOT]
                    if total < result.cost:
                        result.cost = float(total)
                        result.order = list(selection.path)
                        elapsed = time.monotonic() - started
                        logger.info(f"branch_and_bound: incumbent {result.cost} after {elapsed:.3f}s")
                        if self.progress is not None:
                            self.progress(elapsed, result.cost)
                return
            if bound(cost) >= result.cost:
                return
            u = selection.last
            for v in self.neighbours[u]:
                if v == u or not selection.can_extend(v):
                    continue
                selection.push(v)
                search(cost + self.w[u, v])
                selection.pop()
                if result.timed_out:
                    return

        search(0.0)
        logger.debug(
            f"branch_and_bound: n={n}, clusters={len(selection.clusters)}, "
            f"nodes={result.nodes_expanded}, timed_out={result.timed_out}"
        )
        return result


def feasible_cycles(vertex_count: int, clusters: Sequence[Sequence[int]] = ()) -> Iterator[List[int]]:
    """
    Yields every directed Hamiltonian cycle starting at vertex 0 that visits
    each cluster consecutively. Both directions of a cycle are yielded.
    """
    selection = EdgeSelection(vertex_count, clusters)

    def walk() -> Iterator[List[int]]:
        if selection.complete:
            if selection.can_close():
                yield list(selection.path)
            return
        for v in range(vertex_count):
            if selection.can_extend(v):
                selection.push(v)
                yield from walk()
                selection.pop()

    yield from walk()
