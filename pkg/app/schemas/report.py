from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_serializer

from app.schemas.tour import TourOut


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    FEASIBLE_TIMEOUT = "feasible_timeout"
    INFEASIBLE = "infeasible"


class SolveReport(BaseModel):
    """Schema for the outcome of one solver run."""

    tour: TourOut
    cost: float = Field(..., examples=[3323.0])
    status: SolveStatus = Field(..., examples=["optimal"])
    nodes_expanded: int = Field(0, examples=[1840])
    elapsed: float = Field(..., examples=[0.42])
    solver_name: str = Field(..., examples=["held-karp"])


class DeformReport(BaseModel):
    """
    Schema describing one deform step: costs before and after, the number of
    extra visits of the cluster in the input, and the allowed increase.
    """

    input_cost: float
    output_cost: float
    extra_visits: int = Field(..., ge=0, examples=[1])
    bound: float = Field(..., examples=[3.0])
    bound_applicable: bool = True

    @property
    def within_bound(self) -> bool:
        return self.output_cost - self.input_cost <= self.bound + 1e-9 * max(1.0, abs(self.bound))


class GapReport(BaseModel):
    """Schema comparing the clustered and unclustered optima of one instance."""

    c_star: float = Field(..., examples=[15.0])
    c_prime_star: float = Field(..., examples=[19.0])
    ratio: float = Field(..., examples=[1.2667])
    bound: float = Field(..., examples=[1.75])
    within_bound: bool
    gamma: float = Field(..., examples=[2.0])
    clusters: int = Field(0, examples=[1])


class SearchSpaceReport(BaseModel):
    """
    Schema for the search-space reduction of a clustering.

    Exact counts are Python ints serialized as decimal strings; they are None
    when the instance is beyond the exact-factorial limit.
    """

    total_vertices: int
    cluster_sizes: List[int]
    blocks: int = Field(..., examples=[4])
    n0_log10: float
    n1_log10: float
    ratio_log10: float
    n0: Optional[int] = None
    n1: Optional[int] = None
    n0_cycles: Optional[int] = None
    n1_cycles: Optional[int] = None

    @field_serializer("n0", "n1", "n0_cycles", "n1_cycles")
    def _big_int(self, value: Optional[int]) -> Optional[str]:
        return None if value is None else str(value)


class TightnessPoint(BaseModel):
    """Schema for one point of the tightness curve."""

    n: int = Field(..., examples=[4])
    c_star: float
    c_prime_star: float
    ratio: float = Field(..., examples=[1.32])
    closed_form: float = Field(..., examples=[1.32])


class BenchRow(BaseModel):
    """Schema for one benchmark CSV row; failures are kept in `error`."""

    name: str
    n: Optional[int] = None
    clusters: Optional[int] = None
    tsp_cost: Optional[float] = None
    tsp_status: Optional[SolveStatus] = None
    tsp_time: Optional[float] = None
    ctsp_cost: Optional[float] = None
    ctsp_status: Optional[SolveStatus] = None
    ctsp_time: Optional[float] = None
    gap_ratio: Optional[float] = None
    cluster_time: Optional[float] = None
    cluster_time_ratio: Optional[float] = None
    error: Optional[str] = None
