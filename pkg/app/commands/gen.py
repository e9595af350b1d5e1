import logging
from pathlib import Path
from typing import Optional

import typer

from app.commands.common import console, emit, guarded, to_json
from app.core.config import settings
from app.core.exceptions import GeneratorParameterException
from app.schemas.cluster import ClusterTreeOut
from app.services.generators import (gen_lower_bound, gen_office, gen_planted,
                                     gen_random_metric, parse_office_map)
from app.services.tsplib import write_tsplib_explicit

logger = logging.getLogger(__name__)

router = typer.Typer(help="Generate instances as TSPLIB EXPLICIT files.", no_args_is_help=True)


@router.command("lower-bound")
def lower_bound(
    n: int = typer.Option(..., "--n", help="Family member; the instance has 3(n+1) vertices."),
    alpha: float = typer.Option(2.0, "--alpha"),
    beta: float = typer.Option(1.0, "--beta"),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Instance of the tightness family with its cluster of top vertices."""
    with guarded():
        instance = gen_lower_bound(n, alpha, beta)
        text = write_tsplib_explicit(
            instance.graph,
            f"lower_bound_{n}",
            f"tightness family n={n} alpha={alpha:g} beta={beta:g}",
        )
    emit(text, out)
    console.print(f"lower-bound: {instance.graph.vertex_count} vertices, cluster of {len(instance.cluster)}")


@router.command("planted")
def planted(
    sizes: str = typer.Option(..., "--sizes", help="Comma-separated block sizes, e.g. 3,3."),
    gamma: float = typer.Option(2.0, "--gamma"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    out: Optional[Path] = typer.Option(None, "--out", help="Also writes <out>.clusters.json next to it."),
):
    """Random metric graph whose clustering at --gamma is exactly the planted blocks."""
    seed = settings.SEED if seed is None else seed
    with guarded():
        try:
            block_sizes = [int(part) for part in sizes.split(",") if part.strip()]
        except ValueError:
            raise GeneratorParameterException(f"cannot read cluster sizes '{sizes}'")
        graph, tree = gen_planted(block_sizes, gamma, seed)
        text = write_tsplib_explicit(
            graph, f"planted_{'_'.join(map(str, block_sizes))}_s{seed}", f"planted sizes={sizes} gamma={gamma:g}"
        )
    emit(text, out)
    sidecar = to_json(ClusterTreeOut.from_tree(tree))
    if out is not None:
        emit(sidecar, out.with_name(out.name + ".clusters.json"))
    else:
        console.print(sidecar)
    console.print(f"planted: {graph.vertex_count} vertices, {len(tree)} clusters")


@router.command("office")
def office(
    map_file: Path = typer.Argument(..., help="Grid map: '#' obstacle, '.' free, 'W' waypoint."),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Waypoint distances on an office floor plan."""
    with guarded():
        try:
            text = map_file.read_text()
        except OSError as e:
            raise GeneratorParameterException(f"cannot read office map {map_file}: {e}")
        graph = gen_office(parse_office_map(text))
        result = write_tsplib_explicit(graph, map_file.stem, "office waypoints")
    emit(result, out)
    console.print(f"office: {graph.vertex_count} waypoints")


@router.command("random")
def random_metric(
    n: int = typer.Option(..., "--n"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    layout: str = typer.Option("uniform", "--layout", help="uniform or blobs."),
    integral: bool = typer.Option(False, "--integral", help="Scale to 1000x1000 and round like EUC_2D."),
    out: Optional[Path] = typer.Option(None, "--out"),
):
    """Euclidean instance from seeded random points."""
    seed = settings.SEED if seed is None else seed
    with guarded():
        graph = gen_random_metric(n, seed, layout, integral)
        text = write_tsplib_explicit(graph, f"random_{layout}_{n}_s{seed}", f"{layout} points, seed {seed}")
    emit(text, out)
