import logging

import typer

from app.commands import bench, cluster, gap, gen, solve
from app.core.config import settings

logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

cli = typer.Typer(
    name="gammaclust",
    help="Optimal threshold clustering and clustered TSP solving for metric instances.",
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)

cli.command("cluster")(cluster.cluster)
cli.command("solve")(solve.solve)
cli.command("bench")(bench.bench)
cli.command("gap")(gap.gap)
cli.add_typer(gen.router, name="gen")


if __name__ == "__main__":
    cli()
