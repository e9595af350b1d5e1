import logging
import math
from typing import List, Sequence, Tuple

import networkx as nx
import numpy as np

from app.core.config import settings
from app.core.exceptions import (GeneratorParameterException,
                                 UnreachableWaypointException)
from app.models.cluster import ClusterTree
from app.models.graph import MetricGraph, vertex_set
from app.models.instance import GridOfficeMap, LowerBoundInstance
from app.services.clustering import cluster_metrics

logger = logging.getLogger(__name__)


def metric_closure(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths (Floyd-Warshall, one broadcast per pivot)."""
    closed = np.array(weights, dtype=np.float64)
    for k in range(closed.shape[0]):
        closed = np.minimum(closed, closed[:, k][:, None] + closed[k, :][None, :])
    return closed


def gen_random_metric(
    n: int, seed: int, layout: str = "uniform", integral: bool = False
) -> MetricGraph:
    """
    Euclidean instance from random points.

    `uniform` scatters points over the unit square; `blobs` draws them around
    two or three centres, which yields non-trivial clusters. With `integral`
    the plane is scaled to 1000 x 1000 and distances are rounded the EUC_2D
    way, so ties between edge weights are common.
    """
    if n < 1:
        raise GeneratorParameterException(f"vertex count must be positive, got {n}")
    rng = np.random.default_rng(seed)
    if layout == "uniform":
        points = rng.random((n, 2))
    elif layout == "blobs":
        centres = rng.random((int(rng.integers(2, 4)), 2))
        owners = rng.integers(0, len(centres), size=n)
        points = centres[owners] + rng.normal(scale=0.04, size=(n, 2))
    else:
        raise GeneratorParameterException(f"unknown layout '{layout}'")

    if integral:
        points = np.round(points * 1000.0)
    delta = points[:, None, :] - points[None, :, :]
    distances = np.sqrt((delta * delta).sum(axis=2))
    if integral:
        distances = np.floor(distances + 0.5)
    return MetricGraph(weights=distances)


def gen_lower_bound(n: int, alpha: float, beta: float) -> LowerBoundInstance:
    """
    Builds the tightness family on n + 1 triples.

    Triple k holds a bottom vertex b_k = 3k and two top vertices t_k = 3k + 1,
    t'_k = 3k + 2; the cluster is the set of all top vertices. Weights:

      top - top            beta
      bottom - bottom      2 alpha + beta
      bottom - top         alpha + beta, except the special edges below

    Special edges have weight alpha and link each bottom vertex to the two top
    vertices next to it on the ring b_0 t_0 t'_0 b_1 t_1 t'_1 ... :
    b_k - t_k and b_k - t'_{k-1} (indices mod n + 1). Every top vertex has
    exactly one special edge, which keeps the graph metric with zero slack.
    The unclustered optimum follows the ring and costs (n+1)(2 alpha + beta);
    the clustered optimum visits the top row in one block and the bottoms as
    one path, costing (n+1)(2 alpha + 3 beta) - 2 beta.
    """
    if n < 0:
        raise GeneratorParameterException(f"n must be non-negative, got {n}")
    if beta <= 0:
        raise GeneratorParameterException(f"beta must be positive, got {beta}")
    if alpha <= beta:
        raise GeneratorParameterException("Γ ≤ 1 family not constructible")

    triples = n + 1
    size = 3 * triples
    bottoms = [3 * k for k in range(triples)]
    tops = [v for v in range(size) if v % 3 != 0]

    weights = np.full((size, size), alpha + beta, dtype=np.float64)
    weights[np.ix_(tops, tops)] = beta
    weights[np.ix_(bottoms, bottoms)] = 2 * alpha + beta
    for k in range(triples):
        first_top = 3 * k + 1
        previous_second_top = 3 * ((k - 1) % triples) + 2
        for top in (first_top, previous_second_top):
            weights[3 * k, top] = alpha
            weights[top, 3 * k] = alpha
    np.fill_diagonal(weights, 0.0)

    labels = [f"v{v + 1}" for v in range(size)]
    graph = MetricGraph(weights=weights, labels=labels)
    return LowerBoundInstance(
        triples=triples,
        alpha=alpha,
        beta=beta,
        cluster=vertex_set(tops, size),
        graph=graph,
    )


def gen_planted(
    cluster_sizes: Sequence[int], gamma: float, seed: int
) -> Tuple[MetricGraph, ClusterTree]:
    """
    Random metric graph whose optimal clustering at `gamma` is exactly the
    planted blocks of size >= 2.

    Vertices are numbered block by block. Intra-block weights are drawn from
    [beta_max / sqrt(gamma), beta_max] and inter-block weights from
    [L, L * min(2 / (1 + margin), sqrt(gamma))] with
    L = gamma * beta_max * (1 + margin); the matrix is then metric-closed.
    The bands keep every sub-block and every union of blocks below gamma.
    A lone block gets one extra outlier vertex so it is a proper subset.
    """
    if gamma <= 1:
        raise GeneratorParameterException(f"gamma must exceed 1, got {gamma}")
    sizes = [int(size) for size in cluster_sizes]
    if any(size < 1 for size in sizes):
        raise GeneratorParameterException(f"cluster sizes must be positive: {sizes}")
    if not any(size >= 2 for size in sizes):
        raise GeneratorParameterException(
            "at least one cluster size must be >= 2 (no non-trivial cluster possible)"
        )
    if len(sizes) == 1:
        sizes = sizes + [1]

    beta_max = settings.PLANTED_BETA_MAX
    margin = settings.PLANTED_MARGIN
    low_intra = beta_max / math.sqrt(gamma)
    low_inter = gamma * beta_max * (1.0 + margin)
    high_inter = low_inter * min(2.0 / (1.0 + margin), math.sqrt(gamma))

    rng = np.random.default_rng(seed)
    n = sum(sizes)
    owner = np.repeat(np.arange(len(sizes)), sizes)
    same_block = owner[:, None] == owner[None, :]
    intra = rng.uniform(low_intra, beta_max, size=(n, n))
    inter = rng.uniform(low_inter, high_inter, size=(n, n))
    weights = np.where(same_block, intra, inter)
    weights = np.triu(weights, k=1)
    weights = weights + weights.T
    weights = metric_closure(weights)
    np.fill_diagonal(weights, 0.0)
    graph = MetricGraph(weights=weights)

    entries = []
    start = 0
    for size in sizes:
        members = tuple(range(start, start + size))
        start += size
        if size >= 2:
            entries.append((members, cluster_metrics(graph, members)))
    tree = ClusterTree.build(n, gamma, entries)
    logger.debug(f"gen_planted: {n} vertices, {len(tree)} planted clusters (seed={seed})")
    return graph, tree


def parse_office_map(text: str) -> GridOfficeMap:
    """Reads a grid map: `#` obstacle, `.` free, `W` waypoint, one row per line."""
    rows = [line.rstrip("\r\n") for line in text.splitlines() if line.strip()]
    if not rows:
        raise GeneratorParameterException("office map is empty")
    width = len(rows[0])
    waypoints: List[Tuple[int, int]] = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise GeneratorParameterException(
                f"office map line {r + 1} has {len(row)} cells, expected {width}"
            )
        for c, cell in enumerate(row):
            if cell not in "#.W":
                raise GeneratorParameterException(
                    f"office map line {r + 1}: unknown cell '{cell}'"
                )
            if cell == "W":
                waypoints.append((r, c))
    if not waypoints:
        raise GeneratorParameterException("office map has no waypoints")
    obstacles = np.array([[cell == "#" for cell in row] for row in rows], dtype=bool)
    return GridOfficeMap(
        width=width, height=len(rows), obstacles=obstacles, waypoints=waypoints
    )


def gen_office(office: GridOfficeMap) -> MetricGraph:
    """
    Shortest 4-connected obstacle-avoiding path lengths between waypoints.

    The free cells form a networkx grid graph; one breadth-first sweep per
    waypoint fills its row of the distance matrix.
    """
    grid = nx.grid_2d_graph(office.height, office.width)
    blocked = [tuple(cell) for cell in np.argwhere(office.obstacles)]
    grid.remove_nodes_from((int(r), int(c)) for r, c in blocked)

    for cell in office.waypoints:
        if office.obstacles[cell]:
            raise GeneratorParameterException(f"waypoint {cell} lies on an obstacle")

    count = len(office.waypoints)
    weights = np.zeros((count, count))
    for i, source in enumerate(office.waypoints):
        reach = nx.single_source_shortest_path_length(grid, source)
        for j, target in enumerate(office.waypoints):
            if target not in reach:
                raise UnreachableWaypointException(f"W{i + 1}{source}", f"W{j + 1}{target}")
            weights[i, j] = reach[target]

    labels = [f"W{i + 1}" for i in range(count)]
    logger.info(f"gen_office: {count} waypoints on a {office.height}x{office.width} grid")
    return MetricGraph(weights=weights, labels=labels)
