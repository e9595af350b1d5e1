import logging
import time
from pathlib import Path
from typing import Optional

import typer
from rich.table import Table

from app.commands.common import console, emit, guarded, make_config, to_json
from app.schemas.cluster import ClusterTreeOut
from app.schemas.run import Command, OutputFormat
from app.services.clustering import gamma_clustering
from app.services.tsplib import load_graph

logger = logging.getLogger(__name__)


def cluster(
    instance: Path = typer.Argument(..., help="TSPLIB instance file."),
    gamma: Optional[float] = typer.Option(None, "--gamma", help="Clustering threshold, must exceed 1."),
    output_format: OutputFormat = typer.Option(OutputFormat.JSON, "--format"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the cluster tree here instead of stdout."),
):
    """
    Finds the optimal clustering of an instance and prints it as JSON,
    with a summary line (instance, cluster count, wall time) on stderr.
    """
    config = make_config(
        command=Command.CLUSTER, instances=[str(instance)], gamma=gamma, output_format=output_format
    )
    with guarded():
        parsed, graph = load_graph(str(instance))
        started = time.monotonic()
        tree = gamma_clustering(graph, config.gamma)
        elapsed = time.monotonic() - started

    if config.output_format == OutputFormat.TEXT:
        table = Table(title=f"{parsed.name}: clusters at gamma={config.gamma}")
        for column in ("#", "size", "alpha", "beta", "gamma", "parent", "vertices"):
            table.add_column(column)
        for i, item in enumerate(tree):
            table.add_row(
                str(i),
                str(item.size),
                f"{item.metrics.alpha:g}",
                f"{item.metrics.beta:g}",
                f"{item.metrics.gamma:.6g}",
                "-" if item.parent is None else str(item.parent),
                " ".join(graph.label(v) for v in item.vertices),
            )
        console.print(table)
    else:
        emit(to_json(ClusterTreeOut.from_tree(tree)), out)
    console.print(f"{parsed.name}: {len(tree)} clusters in {elapsed:.4f}s")
