import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.core.exceptions import (TspLibParseException,
                                 UnsupportedEdgeWeightTypeException)
from app.models.graph import MetricGraph
from app.models.instance import (EdgeWeightFormat, EdgeWeightType,
                                 TspLibInstance)
from app.models.tour import Tour
from app.services.graph_core import check_metric

logger = logging.getLogger(__name__)

# Constants of the TSPLIB geographical distance.
GEO_PI = 3.141592
GEO_RADIUS = 6378.388

_HEADER_KEYS = {
    "NAME",
    "TYPE",
    "COMMENT",
    "DIMENSION",
    "EDGE_WEIGHT_TYPE",
    "EDGE_WEIGHT_FORMAT",
    "DISPLAY_DATA_TYPE",
    "NODE_COORD_TYPE",
}
_SECTIONS = {
    "NODE_COORD_SECTION",
    "EDGE_WEIGHT_SECTION",
    "DISPLAY_DATA_SECTION",
    "FIXED_EDGES_SECTION",
    "TOUR_SECTION",
}


class TspLibParser:
    """
    Line-oriented reader for TSPLIB .tsp files.

    Header lines are `KEY : VALUE`; data sections run until the next keyword
    or EOF. Unknown header keywords are kept as warnings on the instance.
    """

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.cursor = 0
        self.header: Dict[str, str] = {}
        self.header_lines: Dict[str, int] = {}
        self.warnings: List[str] = []
        self.coordinates: Optional[List[Tuple[float, float]]] = None
        self.weight_tokens: Optional[List[float]] = None
        self.weight_line: Optional[int] = None

    # Line numbers reported to users are 1-based.
    def _lineno(self) -> int:
        return self.cursor + 1

    def _keyword(self, line: str) -> str:
        head = line.split(":", 1)[0].strip()
        return head.split()[0].upper() if head else ""

    def _is_boundary(self, line: str) -> bool:
        keyword = self._keyword(line)
        return keyword in _SECTIONS or keyword in _HEADER_KEYS or keyword == "EOF"

    def parse(self) -> TspLibInstance:
        while self.cursor < len(self.lines):
            raw = self.lines[self.cursor].strip()
            if not raw:
                self.cursor += 1
                continue
            keyword = self._keyword(raw)
            if keyword == "EOF":
                break
            if keyword in _SECTIONS:
                self._read_section(keyword)
                continue
            if ":" in raw:
                key, value = raw.split(":", 1)
                key = key.strip().upper()
                if key not in _HEADER_KEYS:
                    message = f"line {self._lineno()}: unknown keyword '{key}' ignored"
                    self.warnings.append(message)
                    logger.warning(message)
                self.header[key] = value.strip()
                self.header_lines[key] = self._lineno()
                self.cursor += 1
                continue
            if keyword.replace("_", "").isalpha():
                known = "keyword" if keyword in _HEADER_KEYS else "unknown keyword"
                raise TspLibParseException(
                    f"{known} '{keyword}' without ':'", line=self._lineno()
                )
            raise TspLibParseException(
                f"unexpected content '{raw[:40]}'", line=self._lineno()
            )
        return self._build()

    def _dimension(self, line: int) -> int:
        if "DIMENSION" not in self.header:
            raise TspLibParseException("missing DIMENSION", line=line)
        try:
            dimension = int(self.header["DIMENSION"])
        except ValueError:
            raise TspLibParseException(
                f"DIMENSION is not an integer: '{self.header['DIMENSION']}'",
                line=self.header_lines["DIMENSION"],
            )
        if dimension <= 0:
            raise TspLibParseException(
                "DIMENSION must be positive", line=self.header_lines["DIMENSION"]
            )
        return dimension

    def _read_section(self, keyword: str):
        section_line = self._lineno()
        self.cursor += 1
        if keyword == "NODE_COORD_SECTION":
            self._read_coordinates(section_line)
        elif keyword == "EDGE_WEIGHT_SECTION":
            self._read_weights(section_line)
        else:
            # Display data, fixed edges and tours are not used; skip their bodies.
            self.warnings.append(f"line {section_line}: {keyword} skipped")
            while self.cursor < len(self.lines):
                line = self.lines[self.cursor].strip()
                if line and self._is_boundary(line):
                    break
                self.cursor += 1

    def _read_coordinates(self, section_line: int):
        dimension = self._dimension(section_line)
        slots: List[Optional[Tuple[float, float]]] = [None] * dimension
        found = 0
        while self.cursor < len(self.lines):
            line = self.lines[self.cursor].strip()
            if not line:
                self.cursor += 1
                continue
            if self._is_boundary(line):
                break
            parts = line.split()
            if len(parts) < 3:
                raise TspLibParseException(
                    f"malformed coordinate line '{line}'", line=self._lineno()
                )
            try:
                node = int(parts[0])
                x, y = float(parts[1]), float(parts[2])
            except ValueError:
                raise TspLibParseException(
                    f"malformed coordinate line '{line}'", line=self._lineno()
                )
            if not 1 <= node <= dimension:
                raise TspLibParseException(
                    f"node id {node} outside 1..{dimension}", line=self._lineno()
                )
            if slots[node - 1] is not None:
                raise TspLibParseException(
                    f"node id {node} listed twice", line=self._lineno()
                )
            slots[node - 1] = (x, y)
            found += 1
            self.cursor += 1
        if found != dimension:
            raise TspLibParseException(
                f"NODE_COORD_SECTION lists {found} nodes but DIMENSION is {dimension}",
                line=section_line,
            )
        self.coordinates = [slot for slot in slots if slot is not None]

    def _read_weights(self, section_line: int):
        tokens: List[float] = []
        while self.cursor < len(self.lines):
            line = self.lines[self.cursor].strip()
            if not line:
                self.cursor += 1
                continue
            if self._is_boundary(line):
                break
            try:
                tokens.extend(float(token) for token in line.split())
            except ValueError:
                raise TspLibParseException(
                    f"malformed weight line '{line}'", line=self._lineno()
                )
            self.cursor += 1
        self.weight_tokens = tokens
        self.weight_line = section_line

    def _build(self) -> TspLibInstance:
        dimension = self._dimension(len(self.lines))
        problem_type = self.header.get("TYPE", "TSP").split()[0].upper()
        if problem_type != "TSP":
            raise TspLibParseException(
                f"unsupported TYPE '{problem_type}' (only symmetric TSP)",
                line=self.header_lines.get("TYPE"),
            )
        if "EDGE_WEIGHT_TYPE" not in self.header:
            raise TspLibParseException("missing EDGE_WEIGHT_TYPE", line=len(self.lines))
        raw_type = self.header["EDGE_WEIGHT_TYPE"].upper()
        try:
            weight_type = EdgeWeightType(raw_type)
        except ValueError:
            raise UnsupportedEdgeWeightTypeException(
                raw_type, line=self.header_lines["EDGE_WEIGHT_TYPE"]
            )

        instance = TspLibInstance(
            name=self.header.get("NAME", ""),
            dimension=dimension,
            edge_weight_type=weight_type,
            comment=self.header.get("COMMENT", ""),
            warnings=self.warnings,
        )
        if weight_type == EdgeWeightType.EXPLICIT:
            instance.edge_weight_format = self._weight_format()
            instance.matrix = self._assemble_matrix(instance.edge_weight_format, dimension)
            instance.coordinates = self.coordinates
        else:
            if self.coordinates is None:
                raise TspLibParseException(
                    f"{weight_type.value} instance without NODE_COORD_SECTION",
                    line=len(self.lines),
                )
            instance.coordinates = self.coordinates
        return instance

    def _weight_format(self) -> EdgeWeightFormat:
        raw = self.header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper()
        try:
            return EdgeWeightFormat(raw)
        except ValueError:
            raise TspLibParseException(
                f"unsupported EDGE_WEIGHT_FORMAT '{raw}'",
                line=self.header_lines.get("EDGE_WEIGHT_FORMAT"),
            )

    def _assemble_matrix(self, fmt: EdgeWeightFormat, n: int) -> np.ndarray:
        if self.weight_tokens is None:
            raise TspLibParseException(
                "EXPLICIT instance without EDGE_WEIGHT_SECTION", line=len(self.lines)
            )
        expected = {
            EdgeWeightFormat.FULL_MATRIX: n * n,
            EdgeWeightFormat.UPPER_ROW: n * (n - 1) // 2,
            EdgeWeightFormat.LOWER_ROW: n * (n - 1) // 2,
            EdgeWeightFormat.UPPER_DIAG_ROW: n * (n + 1) // 2,
            EdgeWeightFormat.LOWER_DIAG_ROW: n * (n + 1) // 2,
        }[fmt]
        if len(self.weight_tokens) != expected:
            raise TspLibParseException(
                f"EDGE_WEIGHT_SECTION holds {len(self.weight_tokens)} values, "
                f"{fmt.value} with DIMENSION {n} needs {expected}",
                line=self.weight_line,
            )
        values = np.array(self.weight_tokens, dtype=np.float64)
        if fmt == EdgeWeightFormat.FULL_MATRIX:
            return values.reshape(n, n)

        matrix = np.zeros((n, n))
        # numpy's triangle index order is row-major, matching TSPLIB's row formats.
        if fmt == EdgeWeightFormat.UPPER_ROW:
            rows, cols = np.triu_indices(n, k=1)
        elif fmt == EdgeWeightFormat.UPPER_DIAG_ROW:
            rows, cols = np.triu_indices(n, k=0)
        elif fmt == EdgeWeightFormat.LOWER_ROW:
            rows, cols = np.tril_indices(n, k=-1)
        else:
            rows, cols = np.tril_indices(n, k=0)
        matrix[rows, cols] = values
        matrix[cols, rows] = values
        return matrix


def parse_tsplib(text: str) -> TspLibInstance:
    """Parses TSPLIB text into a TspLibInstance; errors carry the offending line number."""
    return TspLibParser(text).parse()


def read_tsplib(path: str) -> TspLibInstance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise TspLibParseException(f"cannot read instance file {path}: {e}")
    except UnicodeDecodeError as e:
        raise TspLibParseException(f"instance file {path} is not text: {e.reason} at byte {e.start}")
    instance = parse_tsplib(text)
    if not instance.name:
        instance.name = Path(path).stem
    return instance


def _nint(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5)


def _geo_radians(values: np.ndarray) -> np.ndarray:
    degrees = np.trunc(values)
    minutes = values - degrees
    return GEO_PI * (degrees + 5.0 * minutes / 3.0) / 180.0


def geo_distance_matrix(coordinates: List[Tuple[float, float]]) -> np.ndarray:
    """TSPLIB GEO distances: x is latitude, y longitude, both in DDD.MM notation."""
    points = np.array(coordinates, dtype=np.float64)
    latitude = _geo_radians(points[:, 0])
    longitude = _geo_radians(points[:, 1])
    q1 = np.cos(longitude[:, None] - longitude[None, :])
    q2 = np.cos(latitude[:, None] - latitude[None, :])
    q3 = np.cos(latitude[:, None] + latitude[None, :])
    inner = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
    distances = np.floor(GEO_RADIUS * np.arccos(inner) + 1.0)
    np.fill_diagonal(distances, 0.0)
    return distances


def coordinate_distance_matrix(
    coordinates: List[Tuple[float, float]], weight_type: EdgeWeightType
) -> np.ndarray:
    if weight_type == EdgeWeightType.GEO:
        return geo_distance_matrix(coordinates)
    points = np.array(coordinates, dtype=np.float64)
    dx = points[:, 0][:, None] - points[:, 0][None, :]
    dy = points[:, 1][:, None] - points[:, 1][None, :]
    if weight_type == EdgeWeightType.EUC_2D:
        return _nint(np.sqrt(dx * dx + dy * dy))
    if weight_type == EdgeWeightType.CEIL_2D:
        return np.ceil(np.sqrt(dx * dx + dy * dy))
    if weight_type == EdgeWeightType.ATT:
        pseudo = np.sqrt((dx * dx + dy * dy) / 10.0)
        rounded = _nint(pseudo)
        return np.where(rounded < pseudo, rounded + 1.0, rounded)
    raise UnsupportedEdgeWeightTypeException(weight_type.value)


def instance_to_graph(instance: TspLibInstance) -> MetricGraph:
    """Builds the weight matrix with TSPLIB's canonical distance functions."""
    if instance.edge_weight_type == EdgeWeightType.EXPLICIT:
        weights = np.array(instance.matrix, dtype=np.float64)
        np.fill_diagonal(weights, 0.0)
    else:
        weights = coordinate_distance_matrix(
            instance.coordinates, instance.edge_weight_type
        )
    return MetricGraph(weights=weights)


def load_graph(path: str) -> Tuple[TspLibInstance, MetricGraph]:
    """Reads an instance file and builds its graph, warning when rounding broke the triangle inequality."""
    instance = read_tsplib(path)
    graph = instance_to_graph(instance)
    violations = check_metric(graph)
    if violations:
        logger.warning(
            f"{instance.name}: {len(violations)} triangle-inequality violations, e.g. {violations[0]}"
        )
    return instance, graph


def _format_weight(value: float) -> str:
    if not math.isfinite(value):
        raise TspLibParseException(f"cannot write non-finite weight {value}")
    if value == int(value):
        return str(int(value))
    return repr(float(value))


def write_tsplib_explicit(graph: MetricGraph, name: str, comment: str = "") -> str:
    """Writes an EXPLICIT / FULL_MATRIX TSPLIB file whose re-parse reproduces the weights."""
    lines = [
        f"NAME: {name}",
        "TYPE: TSP",
        f"COMMENT: {comment}" if comment else "COMMENT: generated instance",
        f"DIMENSION: {graph.vertex_count}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    for row in graph.weights:
        lines.append(" ".join(_format_weight(float(value)) for value in row))
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def tour_to_tsplib(tour: Tour, name: str) -> str:
    """TOUR_SECTION block with 1-based vertex ids and the -1 terminator."""
    lines = [
        f"NAME: {name}",
        "TYPE: TOUR",
        f"DIMENSION: {len(tour)}",
        "TOUR_SECTION",
    ]
    lines.extend(str(v + 1) for v in tour.order)
    lines.extend(["-1", "EOF"])
    return "\n".join(lines) + "\n"
