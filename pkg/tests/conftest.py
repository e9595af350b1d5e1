import os
from pathlib import Path

import numpy as np
import pytest

from app.core.config import settings
from app.models.graph import MetricGraph
from app.services.generators import gen_random_metric

DATA_DIR = Path(__file__).parent / "data"

# Known optima of the bundled TSPLIB instances.
TSPLIB_OPTIMA = {"burma14": 3323, "ulysses16": 6859, "ulysses22": 7013, "berlin52": 7542}

# Cluster counts at the default threshold for the standard instances.
TSPLIB_CLUSTER_COUNTS = {
    "burma14": 5,
    "ulysses16": 6,
    "ulysses22": 10,
    "swiss42": 16,
    "eil51": 11,
    "berlin52": 17,
}


def tsplib_path(name: str) -> Path:
    """
    Locates a TSPLIB file: bundled ones live in tests/data, the rest are
    looked up in TSPLIB_DIR. Skips the calling test when the file is absent.
    """
    bundled = DATA_DIR / f"{name}.tsp"
    if bundled.exists():
        return bundled
    directory = settings.TSPLIB_DIR or os.environ.get("TSPLIB_DIR")
    if directory:
        candidate = Path(directory) / f"{name}.tsp"
        if candidate.exists():
            return candidate
    pytest.skip(f"{name}.tsp not available (set TSPLIB_DIR)")


@pytest.fixture
def data_dir() -> Path:
    """Directory of the bundled TSPLIB instances."""
    return DATA_DIR


@pytest.fixture
def triangle() -> MetricGraph:
    """Triangle with edge weights 1, 2 and 3."""
    return MetricGraph(weights=np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float))


@pytest.fixture
def unit_square() -> MetricGraph:
    """Corners of the unit square in cyclic order, Euclidean weights."""
    points = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    delta = points[:, None, :] - points[None, :, :]
    return MetricGraph(weights=np.sqrt((delta * delta).sum(axis=2)))


@pytest.fixture
def two_groups() -> MetricGraph:
    """
    Two tight groups {0, 1, 2} and {3, 4, 5}: weight 1 inside a group,
    weight 10 between groups.
    """
    owner = np.array([0, 0, 0, 1, 1, 1])
    weights = np.where(owner[:, None] == owner[None, :], 1.0, 10.0)
    np.fill_diagonal(weights, 0.0)
    return MetricGraph(weights=weights)


@pytest.fixture
def random_graph_factory():
    """Factory for seeded random Euclidean graphs."""

    def make(n: int, seed: int, layout: str = "uniform", integral: bool = False) -> MetricGraph:
        return gen_random_metric(n, seed, layout=layout, integral=integral)

    return make
