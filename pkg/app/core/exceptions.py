import logging
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TIMEOUT = 1
EXIT_USAGE = 2


class GammaClustException(Exception):
    """Base exception for the GammaClust toolkit."""

    def __init__(self, detail: str, exit_code: int = EXIT_USAGE):
        super().__init__(detail)
        self.detail = detail
        self.exit_code = exit_code


class InvalidGraphException(GammaClustException):
    """Exception raised for malformed graphs, vertex sets or tours."""

    def __init__(self, detail: str = "Invalid graph"):
        super().__init__(detail=detail)


class TspLibParseException(GammaClustException):
    """Exception raised when a TSPLIB file cannot be parsed."""

    def __init__(self, detail: str = "Malformed TSPLIB file", line: Optional[int] = None):
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail=detail)
        self.line = line


class UnsupportedEdgeWeightTypeException(TspLibParseException):
    """Exception raised for TSPLIB edge weight types the toolkit does not compute."""

    def __init__(self, weight_type: str, line: Optional[int] = None):
        super().__init__(
            detail=f"unsupported EDGE_WEIGHT_TYPE '{weight_type}'", line=line
        )
        self.weight_type = weight_type


class GeneratorParameterException(GammaClustException):
    """Exception raised for invalid instance-generator parameters."""

    def __init__(self, detail: str = "Invalid generator parameters"):
        super().__init__(detail=detail)


class UnreachableWaypointException(GeneratorParameterException):
    """Exception raised when two office waypoints cannot reach each other."""

    def __init__(self, first: Any, second: Any):
        super().__init__(
            detail=f"waypoints {first} and {second} are not mutually reachable"
        )
        self.pair = (first, second)


class ClusterMetricsException(GammaClustException):
    """Exception raised when alpha or beta of a vertex set is undefined."""

    def __init__(self, detail: str = "Cluster metrics undefined"):
        super().__init__(detail=detail)


class GammaThresholdException(GammaClustException):
    """Exception raised for a clustering threshold at or below one."""

    def __init__(self, detail: str = "uniqueness not guaranteed below Γ = 1"):
        super().__init__(detail=detail)


class OracleSizeCapException(GammaClustException):
    """Exception raised when an exhaustive oracle is asked for too large an instance."""

    def __init__(self, detail: str = "oracle size cap"):
        super().__init__(detail=detail)


class NestedClusteringException(GammaClustException):
    """Exception raised when the modified graph is requested for a nested clustering."""

    def __init__(self, detail: str = "modified graph ambiguous under nesting"):
        super().__init__(detail=detail)


class SolverCapacityException(GammaClustException):
    """Exception raised when an exact solve is requested beyond the supported size."""

    def __init__(self, vertex_count: int, cap: int):
        super().__init__(
            detail=(
                f"exact solving supports at most {cap} vertices, got {vertex_count}; "
                "use the heuristic solver for instances of this size"
            )
        )


class SolverTimeoutException(GammaClustException):
    """Exception raised when a run needing optimal solutions hits its budget."""

    def __init__(
        self,
        detail: str = "Solver budget exhausted",
        partial: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(detail=detail, exit_code=EXIT_TIMEOUT)
        self.partial = partial or {}


def cli_exception_handler(exc: GammaClustException) -> int:
    """
    Handles GammaClustException and its subclasses for the command layer,
    logging the failure and returning the process exit code.
    """
    logger.error(
        f"{type(exc).__name__} caught: {exc.detail} (exit code: {exc.exit_code})"
    )
    return exc.exit_code
