from typing import List

from pydantic import BaseModel, Field

from app.models.tour import Tour, TourKind


class TourOut(BaseModel):
    """Schema for returning a tour together with its cost."""

    kind: TourKind = Field(..., examples=["cycle"])
    order: List[int] = Field(..., examples=[[0, 7, 10, 8, 9, 1, 13, 2, 3, 4, 5, 11, 6, 12]])
    cost: float = Field(..., examples=[3323.0])

    @classmethod
    def from_tour(cls, tour: Tour, cost: float) -> "TourOut":
        return cls(kind=tour.kind, order=list(tour.order), cost=cost)

    def to_tour(self) -> Tour:
        return Tour(order=tuple(self.order), kind=self.kind)
