import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

from app.core.config import settings
from app.core.exceptions import (GammaThresholdException, GeneratorParameterException,
                                 InvalidGraphException, SolverTimeoutException)
from app.models.cluster import ClusterMetrics, ClusterTree
from app.models.graph import MetricGraph
from app.schemas.report import GapReport, SearchSpaceReport, SolveStatus, TightnessPoint
from app.services.clustering import cluster_metrics, gamma_clustering
from app.services.generators import gen_lower_bound
from app.services.solvers import solve_exact_ctsp, solve_exact_tsp

logger = logging.getLogger(__name__)

_LN10 = math.log(10.0)
_UNMEASURED = ClusterMetrics(alpha=math.nan, beta=math.nan, gamma=math.nan)


def theorem_bound(gamma: float) -> float:
    """Worst-case ratio of clustered to unclustered optimum: min(2, 1 + 3 / (2 gamma))."""
    return min(2.0, 1.0 + 3.0 / (2.0 * gamma))


def tightness_limit(gamma: float) -> float:
    return 1.0 + 2.0 / (2.0 * gamma + 1.0)


def lower_bound_costs(n: int, alpha: float, beta: float) -> Tuple[float, float]:
    """Closed-form (unclustered, clustered) optima of the tightness family member n."""
    triples = n + 1
    return triples * (2 * alpha + beta), triples * (2 * alpha + 3 * beta) - 2 * beta


def _log10_factorial(k: int) -> float:
    return math.lgamma(k + 1) / _LN10


def _consecutive_blocks(sizes: Sequence[int]) -> List[range]:
    blocks, start = [], 0
    for size in sizes:
        blocks.append(range(start, start + size))
        start += size
    return blocks


def search_space_ratio(total_vertices: int, cluster_sizes: Sequence[int]) -> SearchSpaceReport:
    """
    Compares |V|! orderings with the m! * prod(|V_i|!) orderings that keep
    each cluster together, m counting clusters plus unclustered vertices.

    Exact integers are filled in up to EXACT_FACTORIAL_MAX vertices; the log10
    values always come from log-gamma.
    """
    sizes = [int(size) for size in cluster_sizes]
    if total_vertices < 1:
        raise InvalidGraphException(f"total vertex count must be positive, got {total_vertices}")
    if any(size < 1 for size in sizes):
        raise InvalidGraphException(f"cluster sizes must be positive: {sizes}")
    if sum(sizes) > total_vertices:
        raise InvalidGraphException(
            f"cluster sizes {sizes} exceed the {total_vertices} available vertices"
        )

    blocks = len(sizes) + total_vertices - sum(sizes)
    n0_log10 = _log10_factorial(total_vertices)
    n1_log10 = _log10_factorial(blocks) + sum(_log10_factorial(size) for size in sizes)
    report = SearchSpaceReport(
        total_vertices=total_vertices,
        cluster_sizes=sizes,
        blocks=blocks,
        n0_log10=n0_log10,
        n1_log10=n1_log10,
        ratio_log10=n0_log10 - n1_log10,
    )
    if total_vertices <= settings.EXACT_FACTORIAL_MAX:
        inner = math.prod(math.factorial(size) for size in sizes)
        report.n0 = math.factorial(total_vertices)
        report.n1 = math.factorial(blocks) * inner
        report.n0_cycles = math.factorial(total_vertices - 1)
        report.n1_cycles = feasible_cycle_count(total_vertices, _consecutive_blocks(sizes))
    return report


def feasible_cycle_count(
    vertex_count: int, clustering: Union[ClusterTree, Sequence[Sequence[int]]]
) -> int:
    """
    Number of directed cycles from a fixed start vertex that keep every
    cluster together. A cluster with b blocks contributes b! * prod(children);
    the top level, being a cycle, contributes (b - 1)! * prod(children).
    Nested clusters are handled through the tree.
    """
    if isinstance(clustering, ClusterTree):
        tree = clustering
    else:
        entries = []
        for members in clustering:
            members = tuple(sorted(set(members)))
            if 2 <= len(members) < vertex_count:
                entries.append((members, _UNMEASURED))
        tree = ClusterTree.build(vertex_count, math.inf, entries)

    def paths(index: int) -> int:
        child_ids, free = tree.blocks(index)
        count = math.factorial(len(child_ids) + len(free))
        for child in child_ids:
            count *= paths(child)
        return count

    child_ids, free = tree.blocks(None)
    total = math.factorial(len(child_ids) + len(free) - 1)
    for child in child_ids:
        total *= paths(child)
    return total


def measure_gap(graph: MetricGraph, gamma: float, budget: Optional[float] = None) -> GapReport:
    """
    Clusters the graph at `gamma`, solves both problems exactly and compares
    the optima. Raises SolverTimeoutException, carrying whatever was solved,
    when either solve does not finish.
    """
    tree = gamma_clustering(graph, gamma)
    tsp = solve_exact_tsp(graph, budget)
    partial = {"clusters": len(tree), "tsp_cost": tsp.cost, "tsp_status": tsp.status.value}
    if tsp.status != SolveStatus.OPTIMAL:
        raise SolverTimeoutException("unclustered solve did not finish", partial)
    ctsp = solve_exact_ctsp(graph, tree, budget) if len(tree) else tsp
    if ctsp.status != SolveStatus.OPTIMAL:
        partial.update(ctsp_cost=ctsp.cost, ctsp_status=ctsp.status.value)
        raise SolverTimeoutException("clustered solve did not finish", partial)

    ratio = ctsp.cost / tsp.cost if tsp.cost > 0 else 1.0
    bound = theorem_bound(gamma)
    return GapReport(
        c_star=tsp.cost,
        c_prime_star=ctsp.cost,
        ratio=ratio,
        bound=bound,
        within_bound=ratio <= bound + 1e-9,
        gamma=gamma,
        clusters=len(tree),
    )


def tightness_curve(gamma: float, n_max: int, budget: Optional[float] = None) -> List[TightnessPoint]:
    """
    Solves the tightness family with alpha / beta = gamma for n = 0..n_max.
    Members larger than EXACT_MAX_VERTICES are skipped with a warning.
    """
    if gamma <= 1:
        raise GammaThresholdException()
    if n_max < 0:
        raise GeneratorParameterException(f"n_max must be non-negative, got {n_max}")

    points: List[TightnessPoint] = []
    for n in range(n_max + 1):
        if 3 * (n + 1) > settings.EXACT_MAX_VERTICES:
            logger.warning(
                f"tightness_curve: truncated at n={n - 1}; n={n} needs {3 * (n + 1)} vertices, "
                f"beyond the exact cap of {settings.EXACT_MAX_VERTICES}"
            )
            break
        instance = gen_lower_bound(n, gamma, 1.0)
        tree = ClusterTree.build(
            instance.graph.vertex_count,
            gamma,
            [(instance.cluster, cluster_metrics(instance.graph, instance.cluster))],
        )
        tsp = solve_exact_tsp(instance.graph, budget)
        ctsp = solve_exact_ctsp(instance.graph, tree, budget)
        c_star, c_prime_star = lower_bound_costs(n, gamma, 1.0)
        points.append(
            TightnessPoint(
                n=n,
                c_star=tsp.cost,
                c_prime_star=ctsp.cost,
                ratio=ctsp.cost / tsp.cost,
                closed_form=c_prime_star / c_star,
            )
        )
        logger.info(f"tightness_curve: n={n} ratio={points[-1].ratio:.6f}")
    return points
