import asyncio
import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import IO, List, Optional, Sequence

from app.core.config import settings
from app.core.exceptions import GammaClustException
from app.models.cluster import ClusterTree
from app.models.graph import MetricGraph
from app.schemas.report import BenchRow, SolveReport
from app.schemas.run import SolverChoice
from app.services.clustering import gamma_clustering
from app.services.solvers import (solve_branch_and_bound, solve_brute_force,
                                  solve_exact_ctsp, solve_exact_tsp, solve_heuristic)
from app.services.tsplib import load_graph

logger = logging.getLogger(__name__)

BENCH_COLUMNS = list(BenchRow.model_fields)


def run_solver(
    graph: MetricGraph,
    clustering: Optional[ClusterTree],
    choice: SolverChoice,
    budget: Optional[float] = None,
    seed: Optional[int] = None,
    progress=None,
) -> SolveReport:
    """Dispatches one solve on the chosen solver; `auto` is exact within the exact cap, else heuristic."""
    clustered = clustering is not None and len(clustering) > 0
    if choice == SolverChoice.AUTO:
        choice = (
            SolverChoice.EXACT
            if graph.vertex_count <= settings.EXACT_MAX_VERTICES
            else SolverChoice.HEURISTIC
        )
    if choice == SolverChoice.EXACT:
        if clustered:
            return solve_exact_ctsp(graph, clustering, budget, progress)
        return solve_exact_tsp(graph, budget, progress)
    if choice == SolverChoice.BRANCH_AND_BOUND:
        return solve_branch_and_bound(graph, clustering if clustered else None, budget, progress)
    if choice == SolverChoice.BRUTE_FORCE:
        return solve_brute_force(graph, clustering if clustered else None)
    return solve_heuristic(graph, clustering if clustered else None, budget, seed)


def bench_instance(
    path: str,
    gamma: float,
    budget: Optional[float],
    seed: int,
    solver: SolverChoice = SolverChoice.AUTO,
) -> BenchRow:
    """
    Clusters one instance, solves it with and without the clustering and
    fills a row. Failures end up in the row's `error` column.
    """
    row = BenchRow(name=Path(path).stem)
    try:
        _, graph = load_graph(path)
        row.n = graph.vertex_count

        started = time.monotonic()
        tree = gamma_clustering(graph, gamma)
        row.cluster_time = time.monotonic() - started
        row.clusters = len(tree)

        tsp = run_solver(graph, None, solver, budget, seed)
        row.tsp_cost, row.tsp_status, row.tsp_time = tsp.cost, tsp.status, tsp.elapsed
        ctsp = run_solver(graph, tree, solver, budget, seed) if len(tree) else tsp
        row.ctsp_cost, row.ctsp_status, row.ctsp_time = ctsp.cost, ctsp.status, ctsp.elapsed

        row.gap_ratio = ctsp.cost / tsp.cost if tsp.cost > 0 else 1.0
        total = row.cluster_time + ctsp.elapsed
        row.cluster_time_ratio = row.cluster_time / total if total > 0 else 0.0
    except GammaClustException as exc:
        logger.warning(f"bench: {path} failed: {exc.detail}")
        row.error = exc.detail
    return row


class BenchRunner:
    """
    Runs the benchmark over many instances. Rows are computed in a process
    pool, one instance per task, and returned in input order.
    """

    async def run(
        self,
        paths: Sequence[str],
        gamma: Optional[float] = None,
        budget: Optional[float] = None,
        seed: Optional[int] = None,
        jobs: Optional[int] = None,
        solver: SolverChoice = SolverChoice.AUTO,
    ) -> List[BenchRow]:
        gamma = settings.GAMMA if gamma is None else gamma
        seed = settings.SEED if seed is None else seed
        jobs = jobs or settings.JOBS or os.cpu_count() or 1

        if jobs == 1:
            return [bench_instance(path, gamma, budget, seed, solver) for path in paths]

        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            tasks = [
                loop.run_in_executor(pool, bench_instance, path, gamma, budget, seed, solver)
                for path in paths
            ]
            rows = await asyncio.gather(*tasks)
        logger.info(f"bench: {len(rows)} instances on {jobs} workers")
        return list(rows)

    def write_csv(self, rows: Sequence[BenchRow], stream: IO[str]) -> None:
        writer = csv.DictWriter(stream, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            record = row.model_dump(mode="json")
            writer.writerow({key: "" if value is None else value for key, value in record.items()})


bench_runner = BenchRunner()
