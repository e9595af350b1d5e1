from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from app.core.config import settings


class Command(str, Enum):
    CLUSTER = "cluster"
    SOLVE = "solve"
    BENCH = "bench"
    GEN = "gen"
    GAP = "gap"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


class SolverChoice(str, Enum):
    AUTO = "auto"
    EXACT = "exact"
    HEURISTIC = "heuristic"
    BRANCH_AND_BOUND = "branch-and-bound"
    BRUTE_FORCE = "brute-force"


class RunConfig(BaseModel):
    """Validated configuration of one command invocation."""

    command: Command
    instances: List[str] = Field(default_factory=list, examples=[["tests/data/burma14.tsp"]])
    gamma: float = Field(default_factory=lambda: settings.GAMMA, examples=[1.000001])
    budget_secs: float = Field(default_factory=lambda: settings.BUDGET_SECS, gt=0)
    seed: int = Field(default_factory=lambda: settings.SEED)
    output_format: OutputFormat = OutputFormat.JSON
    solver: SolverChoice = SolverChoice.AUTO
    jobs: Optional[int] = Field(default_factory=lambda: settings.JOBS, ge=1)

    @model_validator(mode="after")
    def _check_gamma(self) -> "RunConfig":
        if self.command in (Command.CLUSTER, Command.GAP, Command.BENCH) and self.gamma <= 1:
            raise ValueError("gamma must be greater than 1 (uniqueness not guaranteed below Γ = 1)")
        return self
