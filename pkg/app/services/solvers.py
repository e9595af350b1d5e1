import logging
import random
import time
from typing import List, Optional, Sequence

from app.core.config import settings
from app.core.exceptions import (OracleSizeCapException, SolverCapacityException,
                                 SolverTimeoutException)
from app.models.cluster import ClusterTree
from app.models.graph import MetricGraph
from app.models.tour import Tour
from app.schemas.report import SolveReport, SolveStatus
from app.schemas.tour import TourOut
from app.services.branch_and_bound import (BranchAndBound, ProgressCallback,
                                           feasible_cycles)
from app.services.held_karp import DPWidthExceeded, held_karp, hierarchical_cycle
from app.services.heuristics import nearest_neighbor, two_opt
from app.services.tours import (Clustering, cluster_sets, deform_all, is_feasible,
                                normalize_tour, tour_cost)

logger = logging.getLogger(__name__)


def _deadline(started: float, budget: Optional[float]) -> float:
    if budget is None:
        budget = settings.BUDGET_SECS
    return started + budget


def _report(
    graph: MetricGraph,
    order: Sequence[int],
    status: SolveStatus,
    solver_name: str,
    started: float,
    nodes_expanded: int = 0,
) -> SolveReport:
    tour = normalize_tour(Tour.cycle(order))
    cost = tour_cost(graph, tour)
    report = SolveReport(
        tour=TourOut.from_tour(tour, cost),
        cost=cost,
        status=status,
        nodes_expanded=nodes_expanded,
        elapsed=time.monotonic() - started,
        solver_name=solver_name,
    )
    logger.info(
        f"{solver_name}: n={graph.vertex_count} cost={cost} status={status.value} "
        f"in {report.elapsed:.3f}s"
    )
    return report


def _check_capacity(graph: MetricGraph) -> None:
    if graph.vertex_count > settings.EXACT_MAX_VERTICES:
        raise SolverCapacityException(graph.vertex_count, settings.EXACT_MAX_VERTICES)


def _notify(progress: Optional[ProgressCallback], report: SolveReport) -> SolveReport:
    if progress is not None:
        progress(report.elapsed, report.cost)
    return report


def solve_heuristic(
    graph: MetricGraph,
    clustering: Optional[Clustering] = None,
    budget: Optional[float] = None,
    seed: Optional[int] = None,
) -> SolveReport:
    """
    Nearest-neighbour tour from a seeded start vertex, made feasible by
    deforming it for every cluster, then improved by cluster-preserving
    2-opt until a local optimum or the budget. A zero budget returns the
    constructed tour.
    """
    started = time.monotonic()
    if seed is None:
        seed = settings.SEED
    start = random.Random(seed).randrange(graph.vertex_count)
    order = nearest_neighbor(graph, start)
    clusters = cluster_sets(clustering) if clustering is not None else []
    if clusters:
        order = list(deform_all(Tour.cycle(order), clusters).order)

    if budget is not None and budget <= 0:
        return _report(graph, order, SolveStatus.FEASIBLE_TIMEOUT, "heuristic", started)

    deadline = _deadline(started, budget)
    order = two_opt(graph, order, clusters, deadline)
    status = SolveStatus.FEASIBLE_TIMEOUT if time.monotonic() > deadline else SolveStatus.FEASIBLE
    return _report(graph, order, status, "heuristic", started)


def solve_branch_and_bound(
    graph: MetricGraph,
    clustering: Optional[Clustering] = None,
    budget: Optional[float] = None,
    progress: Optional[ProgressCallback] = None,
    initial: Optional[Tour] = None,
) -> SolveReport:
    """
    Exact search with the cluster crossing constraints enforced as pruning
    rules. The incumbent starts from `initial` when it is feasible, otherwise
    from the heuristic tour.
    """
    _check_capacity(graph)
    started = time.monotonic()
    deadline = _deadline(started, budget)
    clusters = cluster_sets(clustering) if clustering is not None else []

    if initial is not None and not is_feasible(initial, clusters):
        logger.warning("solve_branch_and_bound: initial tour violates the clustering; ignored")
        initial = None
    if initial is None:
        initial = solve_heuristic(graph, clusters, max(deadline - time.monotonic(), 0.0)).tour.to_tour()

    search = BranchAndBound(graph, clusters, deadline=deadline, progress=progress)
    result = search.solve(incumbent=initial.order)
    if result.order is None:
        return _report(graph, range(graph.vertex_count), SolveStatus.INFEASIBLE,
                       "branch-and-bound", started, result.nodes_expanded)
    status = SolveStatus.FEASIBLE_TIMEOUT if result.timed_out else SolveStatus.OPTIMAL
    return _report(graph, result.order, status, "branch-and-bound", started, result.nodes_expanded)


def solve_exact_tsp(
    graph: MetricGraph,
    budget: Optional[float] = None,
    progress: Optional[ProgressCallback] = None,
) -> SolveReport:
    """
    Optimal tour: Held-Karp up to HELD_KARP_MAX_VERTICES vertices, branch and
    bound up to EXACT_MAX_VERTICES. A Held-Karp run that exhausts the budget
    falls back to the heuristic tour.
    """
    started = time.monotonic()
    n = graph.vertex_count
    if n <= 3:
        return _notify(progress, _report(graph, range(n), SolveStatus.OPTIMAL, "trivial", started))
    _check_capacity(graph)
    if n > settings.HELD_KARP_MAX_VERTICES:
        return solve_branch_and_bound(graph, None, budget, progress)

    deadline = _deadline(started, budget)
    try:
        order, _ = held_karp(graph, deadline)
    except SolverTimeoutException:
        logger.warning(f"solve_exact_tsp: budget exhausted at n={n}; returning heuristic tour")
        fallback = solve_heuristic(graph, None, 0.0)
        return _report(graph, fallback.tour.order, SolveStatus.FEASIBLE_TIMEOUT, "held-karp", started)
    return _notify(progress, _report(graph, order, SolveStatus.OPTIMAL, "held-karp", started))


def solve_exact_ctsp(
    graph: MetricGraph,
    clustering: ClusterTree,
    budget: Optional[float] = None,
    progress: Optional[ProgressCallback] = None,
) -> SolveReport:
    """
    Optimal tour among those visiting every cluster consecutively.

    Solved by decomposition along the cluster tree; when a level has more
    blocks than MAX_DP_CHILDREN the constrained branch and bound takes over.
    """
    if len(clustering) == 0:
        return solve_exact_tsp(graph, budget, progress)
    started = time.monotonic()
    n = graph.vertex_count
    if n <= 3:
        return _notify(progress, _report(graph, range(n), SolveStatus.OPTIMAL, "trivial", started))

    deadline = _deadline(started, budget)
    try:
        order, _ = hierarchical_cycle(graph, clustering, deadline)
    except DPWidthExceeded as exc:
        logger.info(
            f"solve_exact_ctsp: {exc.blocks} blocks exceed the DP width; using branch and bound"
        )
        return solve_branch_and_bound(graph, clustering, max(deadline - time.monotonic(), 0.0), progress)
    except SolverTimeoutException:
        logger.warning(f"solve_exact_ctsp: budget exhausted at n={n}; returning heuristic tour")
        fallback = solve_heuristic(graph, clustering, 0.0)
        return _report(graph, fallback.tour.order, SolveStatus.FEASIBLE_TIMEOUT, "hierarchical-dp", started)
    return _notify(progress, _report(graph, order, SolveStatus.OPTIMAL, "hierarchical-dp", started))


def _enumeration_clusters(graph: MetricGraph, clustering: Optional[Clustering]) -> List[set]:
    if graph.vertex_count > settings.ENUMERATE_MAX_VERTICES:
        raise OracleSizeCapException(
            f"oracle size cap: enumeration supports at most "
            f"{settings.ENUMERATE_MAX_VERTICES} vertices, got {graph.vertex_count}"
        )
    return cluster_sets(clustering) if clustering is not None else []


def enumerate_feasible(graph: MetricGraph, clustering: Optional[Clustering] = None) -> int:
    """
    Counts directed Hamiltonian cycles starting at vertex 0 that visit every
    cluster consecutively; a cycle and its reversal count twice.
    """
    clusters = _enumeration_clusters(graph, clustering)
    return sum(1 for _ in feasible_cycles(graph.vertex_count, clusters))


def solve_brute_force(graph: MetricGraph, clustering: Optional[Clustering] = None) -> SolveReport:
    """Cheapest feasible cycle by full enumeration (small graphs only)."""
    clusters = _enumeration_clusters(graph, clustering)
    started = time.monotonic()
    best: Optional[List[int]] = None
    best_cost = float("inf")
    count = 0
    for order in feasible_cycles(graph.vertex_count, clusters):
        count += 1
        cost = tour_cost(graph, Tour.cycle(order))
        if cost < best_cost:
            best, best_cost = order, cost
    if best is None:
        return _report(graph, range(graph.vertex_count), SolveStatus.INFEASIBLE, "brute-force", started, count)
    return _report(graph, best, SolveStatus.OPTIMAL, "brute-force", started, count)
