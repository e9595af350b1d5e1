from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from app.models.graph import MetricGraph, VertexSet


class EdgeWeightType(str, Enum):
    EUC_2D = "EUC_2D"
    CEIL_2D = "CEIL_2D"
    GEO = "GEO"
    ATT = "ATT"
    EXPLICIT = "EXPLICIT"


class EdgeWeightFormat(str, Enum):
    FULL_MATRIX = "FULL_MATRIX"
    UPPER_ROW = "UPPER_ROW"
    LOWER_ROW = "LOWER_ROW"
    UPPER_DIAG_ROW = "UPPER_DIAG_ROW"
    LOWER_DIAG_ROW = "LOWER_DIAG_ROW"


@dataclass
class TspLibInstance:
    """Parsed TSPLIB problem: header fields plus coordinates or an explicit matrix."""

    name: str
    dimension: int
    edge_weight_type: EdgeWeightType
    comment: str = ""
    edge_weight_format: Optional[EdgeWeightFormat] = None
    coordinates: Optional[List[Tuple[float, float]]] = None
    matrix: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)


@dataclass
class LowerBoundInstance:
    """
    Member of the tightness family: n + 1 triples of one bottom vertex and two
    top vertices, with all top vertices forming the cluster.
    """

    triples: int
    alpha: float
    beta: float
    cluster: VertexSet
    graph: MetricGraph

    @property
    def n(self) -> int:
        return self.triples - 1


@dataclass
class GridOfficeMap:
    """Grid floor plan: obstacle mask (True = blocked) and waypoint cells as (row, col)."""

    width: int
    height: int
    obstacles: np.ndarray
    waypoints: List[Tuple[int, int]]
