import logging
from pathlib import Path
from typing import IO, Optional

import typer

from app.commands.common import console, emit, guarded, make_config, to_json
from app.core.exceptions import EXIT_TIMEOUT
from app.schemas.report import SolveStatus
from app.schemas.run import Command, OutputFormat, SolverChoice
from app.services.bench import run_solver
from app.services.clustering import gamma_clustering
from app.services.tsplib import load_graph, tour_to_tsplib

logger = logging.getLogger(__name__)


def solve(
    instance: Path = typer.Argument(..., help="TSPLIB instance file."),
    clustered: bool = typer.Option(False, "--clustered", help="Keep every cluster found at --gamma together."),
    gamma: Optional[float] = typer.Option(None, "--gamma"),
    budget_secs: Optional[float] = typer.Option(None, "--budget-secs"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    solver: SolverChoice = typer.Option(SolverChoice.AUTO, "--solver"),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="json report or text TOUR_SECTION."),
    out: Optional[Path] = typer.Option(None, "--out"),
    progress_log: Optional[Path] = typer.Option(None, "--progress-log", help="Append 'elapsed,cost' per incumbent."),
):
    """Solves the instance and reports the tour; exits 1 when the budget ran out first."""
    config = make_config(
        command=Command.SOLVE,
        instances=[str(instance)],
        gamma=gamma,
        budget_secs=budget_secs,
        seed=seed,
        solver=solver,
        output_format=output_format,
    )
    log: Optional[IO[str]] = None
    try:
        with guarded():
            parsed, graph = load_graph(str(instance))
            tree = gamma_clustering(graph, config.gamma) if clustered else None
            if progress_log is not None:
                log = progress_log.open("w")
            progress = None
            if log is not None:
                def progress(elapsed: float, cost: float) -> None:
                    log.write(f"{elapsed:.6f},{cost}\n")
                    log.flush()
            report = run_solver(graph, tree, config.solver, config.budget_secs, config.seed, progress)
    finally:
        if log is not None:
            log.close()

    if config.output_format == OutputFormat.TEXT:
        emit(tour_to_tsplib(report.tour.to_tour(), f"{parsed.name}.tour"), out)
    else:
        emit(to_json(report), out)
    clusters = f", {len(tree)} clusters" if tree is not None else ""
    console.print(
        f"{parsed.name}: cost {report.cost:g} ({report.status.value}, {report.solver_name}{clusters}) "
        f"in {report.elapsed:.3f}s"
    )
    if report.status == SolveStatus.FEASIBLE_TIMEOUT:
        raise typer.Exit(code=EXIT_TIMEOUT)
