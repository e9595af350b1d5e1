import logging
from pathlib import Path
from typing import Optional

import typer

from app.commands.common import console, emit, guarded, make_config, to_json
from app.schemas.run import Command
from app.services.analysis import measure_gap, theorem_bound, tightness_curve, tightness_limit
from app.services.tsplib import load_graph

logger = logging.getLogger(__name__)


def gap(
    instance: Optional[Path] = typer.Argument(None, help="TSPLIB instance file."),
    gamma: Optional[float] = typer.Option(None, "--gamma"),
    budget_secs: Optional[float] = typer.Option(None, "--budget-secs"),
    tightness: Optional[int] = typer.Option(
        None, "--tightness", help="Instead of an instance, solve the tightness family up to this n."
    ),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """
    Compares clustered and unclustered optima of an instance, or traces the
    ratio over the tightness family.
    """
    config = make_config(
        command=Command.GAP,
        instances=[str(instance)] if instance is not None else [],
        gamma=gamma,
        budget_secs=budget_secs,
    )
    if instance is None and tightness is None:
        console.print("[red]error:[/red] give an instance or --tightness N")
        raise typer.Exit(code=2)

    with guarded():
        if tightness is not None:
            points = tightness_curve(config.gamma, tightness, config.budget_secs)
            emit(to_json(points), out)
            console.print(
                f"tightness at gamma={config.gamma:g}: {len(points)} points, "
                f"limit {tightness_limit(config.gamma):.6f}, bound {theorem_bound(config.gamma):.6f}"
            )
            return
        _, graph = load_graph(str(instance))
        report = measure_gap(graph, config.gamma, config.budget_secs)
    emit(to_json(report), out)
    console.print(
        f"{instance.stem}: ratio {report.ratio:.6f} (bound {report.bound:.6f}, "
        f"{'within' if report.within_bound else 'OUTSIDE'})"
    )
