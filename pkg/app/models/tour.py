from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

from app.core.exceptions import InvalidGraphException
from app.models.cluster import ClusterTree
from app.models.graph import MetricGraph


class TourKind(str, Enum):
    CYCLE = "cycle"
    OPEN_PATH = "open_path"


@dataclass(frozen=True)
class Tour:
    """Non-repeating vertex sequence, read cyclically or as an open path."""

    order: Tuple[int, ...]
    kind: TourKind = TourKind.CYCLE

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if not order:
            raise InvalidGraphException("a tour visits at least one vertex")
        if len(set(order)) != len(order):
            raise InvalidGraphException(f"tour repeats vertices: {list(order)}")
        object.__setattr__(self, "order", order)

    @classmethod
    def cycle(cls, order: Sequence[int]) -> "Tour":
        return cls(order=tuple(order), kind=TourKind.CYCLE)

    @classmethod
    def path(cls, order: Sequence[int]) -> "Tour":
        return cls(order=tuple(order), kind=TourKind.OPEN_PATH)

    def __len__(self) -> int:
        return len(self.order)

    @property
    def is_cycle(self) -> bool:
        return self.kind == TourKind.CYCLE

    def edges(self):
        """Consecutive vertex pairs, including the closing pair for cycles of length >= 2."""
        order = self.order
        for i in range(len(order) - 1):
            yield order[i], order[i + 1]
        if self.is_cycle and len(order) > 1:
            yield order[-1], order[0]

    def with_order(self, order: Sequence[int]) -> "Tour":
        return Tour(order=tuple(order), kind=self.kind)


@dataclass(frozen=True)
class ModifiedGraph:
    """
    Overlay of a base graph in which edges between different clusters carry a
    surcharge of 1.5 times the larger of the two clusters' betas. A vertex in
    no stored cluster counts as its own singleton with beta 0.
    """

    base: MetricGraph
    clustering: ClusterTree
    surcharge_factor: float = 1.5
