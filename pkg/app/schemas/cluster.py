import math
from typing import List, Optional, Union

from pydantic import BaseModel, Field, field_serializer

from app.models.cluster import ClusterTree


class ClusterOut(BaseModel):
    """
    Schema for one cluster of a clustering.

    A cluster whose inner edges all weigh zero has an unbounded ratio; JSON
    has no infinity, so gamma is written as the string "inf".
    """

    vertices: List[int] = Field(..., examples=[[0, 1, 7, 8, 9, 10]])
    alpha: float = Field(..., examples=[206.0])
    beta: float = Field(..., examples=[160.0])
    gamma: float = Field(..., examples=[1.2875])
    parent_index: Optional[int] = Field(None, examples=[0])

    @field_serializer("gamma")
    def _unbounded(self, value: float) -> Union[float, str]:
        return "inf" if math.isinf(value) else value


class ClusterTreeOut(BaseModel):
    """Schema for a whole clustering, clusters in canonical order (largest first)."""

    gamma_threshold: float = Field(..., examples=[1.000001])
    vertex_count: int = Field(..., examples=[14])
    clusters: List[ClusterOut] = Field(default_factory=list)

    @classmethod
    def from_tree(cls, tree: ClusterTree) -> "ClusterTreeOut":
        return cls(
            gamma_threshold=tree.gamma_threshold,
            vertex_count=tree.vertex_count,
            clusters=[
                ClusterOut(
                    vertices=list(cluster.vertices),
                    alpha=cluster.metrics.alpha,
                    beta=cluster.metrics.beta,
                    gamma=cluster.metrics.gamma,
                    parent_index=cluster.parent,
                )
                for cluster in tree.clusters
            ],
        )
