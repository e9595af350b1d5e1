import asyncio
import io
import logging
from pathlib import Path
from typing import List, Optional

import typer
from rich.table import Table

from app.commands.common import console, emit, make_config, to_json
from app.schemas.run import Command, OutputFormat, SolverChoice
from app.services.bench import bench_runner

logger = logging.getLogger(__name__)


def bench(
    instances: List[Path] = typer.Argument(..., help="TSPLIB instance files."),
    gamma: Optional[float] = typer.Option(None, "--gamma"),
    budget_secs: Optional[float] = typer.Option(None, "--budget-secs"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    jobs: Optional[int] = typer.Option(None, "--jobs", help="Worker processes (default: logical cores)."),
    solver: SolverChoice = typer.Option(SolverChoice.AUTO, "--solver"),
    output_format: OutputFormat = typer.Option(OutputFormat.CSV, "--format"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """
    Clusters and solves every instance with and without the clustering,
    one CSV row per instance in input order. Failing instances keep their
    row with the error filled in.
    """
    config = make_config(
        command=Command.BENCH,
        instances=[str(path) for path in instances],
        gamma=gamma,
        budget_secs=budget_secs,
        seed=seed,
        jobs=jobs,
        solver=solver,
        output_format=output_format,
    )
    rows = asyncio.run(
        bench_runner.run(
            config.instances, config.gamma, config.budget_secs, config.seed, config.jobs, config.solver
        )
    )

    if config.output_format == OutputFormat.JSON:
        emit(to_json(rows), out)
    else:
        buffer = io.StringIO()
        bench_runner.write_csv(rows, buffer)
        emit(buffer.getvalue(), out)

    table = Table(title=f"bench at gamma={config.gamma}")
    for column in ("instance", "n", "|C|", "tsp", "ctsp", "gap", "cluster share"):
        table.add_column(column)
    for row in rows:
        if row.error:
            table.add_row(row.name, str(row.n or "-"), "-", "-", "-", "-", f"[red]{row.error}[/red]")
            continue
        table.add_row(
            row.name,
            str(row.n),
            str(row.clusters),
            f"{row.tsp_cost:g} ({row.tsp_status.value})",
            f"{row.ctsp_cost:g} ({row.ctsp_status.value})",
            f"{row.gap_ratio:.4f}",
            f"{row.cluster_time_ratio:.2%}",
        )
    console.print(table)
