import numpy as np
import pytest

from app.core.exceptions import (GeneratorParameterException, TspLibParseException,
                                 UnreachableWaypointException,
                                 UnsupportedEdgeWeightTypeException)
from app.models.instance import EdgeWeightFormat, EdgeWeightType
from app.models.tour import Tour
from app.services.clustering import cluster_metrics, gamma_clustering
from app.services.generators import (gen_lower_bound, gen_office, gen_planted,
                                     gen_random_metric, metric_closure, parse_office_map)
from app.services.graph_core import is_metric
from app.services.tsplib import (instance_to_graph, load_graph, parse_tsplib,
                                 tour_to_tsplib, write_tsplib_explicit)

COORDINATE_FILE = """NAME: small
TYPE: TSP
DIMENSION: 3
EDGE_WEIGHT_TYPE: {kind}
NODE_COORD_SECTION
1 0 0
2 3 4
3 1 1
EOF
"""

EXPLICIT_FILE = """NAME: explicit
TYPE: TSP
DIMENSION: 3
EDGE_WEIGHT_TYPE: EXPLICIT
EDGE_WEIGHT_FORMAT: {fmt}
EDGE_WEIGHT_SECTION
{body}
EOF
"""


def test_parse_bundled_geo_instance(data_dir):
    """Test reading a GEO instance with display headers."""
    instance, graph = load_graph(str(data_dir / "burma14.tsp"))
    assert instance.name == "burma14"
    assert instance.dimension == 14
    assert instance.edge_weight_type == EdgeWeightType.GEO
    assert len(instance.coordinates) == 14
    assert graph.vertex_count == 14
    assert graph.is_integral


@pytest.mark.parametrize(
    "kind, expected",
    [
        ("EUC_2D", [[0, 5, 1], [5, 0, 4], [1, 4, 0]]),
        ("CEIL_2D", [[0, 5, 2], [5, 0, 4], [2, 4, 0]]),
    ],
)
def test_coordinate_distances_are_rounded(kind, expected):
    """Test TSPLIB rounding of Euclidean distances."""
    graph = instance_to_graph(parse_tsplib(COORDINATE_FILE.format(kind=kind)))
    assert np.array_equal(graph.weights, np.array(expected, dtype=float))


@pytest.mark.parametrize(
    "fmt, body",
    [
        ("FULL_MATRIX", "0 1 2\n1 0 3\n2 3 0"),
        ("UPPER_ROW", "1 2\n3"),
        ("LOWER_ROW", "1\n2 3"),
        ("UPPER_DIAG_ROW", "0 1 2\n0 3\n0"),
        ("LOWER_DIAG_ROW", "0\n1 0\n2 3 0"),
    ],
)
def test_explicit_formats_give_same_matrix(fmt, body):
    """Test that every explicit weight layout assembles the same symmetric matrix."""
    instance = parse_tsplib(EXPLICIT_FILE.format(fmt=fmt, body=body))
    assert instance.edge_weight_format == EdgeWeightFormat(fmt)
    graph = instance_to_graph(instance)
    expected = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float)
    assert np.array_equal(graph.weights, expected)


def test_parse_error_reports_line_number():
    """Test that a malformed coordinate line is reported with its 1-based line."""
    text = COORDINATE_FILE.format(kind="EUC_2D").replace("2 3 4", "2 x 4")
    with pytest.raises(TspLibParseException) as exc_info:
        parse_tsplib(text)
    assert exc_info.value.line == 7
    assert exc_info.value.detail.startswith("line 7:")


def test_weight_count_mismatch_is_rejected():
    """Test that a short weight section names the expected value count."""
    with pytest.raises(TspLibParseException, match="needs 3"):
        parse_tsplib(EXPLICIT_FILE.format(fmt="UPPER_ROW", body="1 2"))


def test_unsupported_weight_type():
    """Test that unknown edge weight types raise their own error."""
    with pytest.raises(UnsupportedEdgeWeightTypeException) as exc_info:
        parse_tsplib(COORDINATE_FILE.format(kind="MAN_2D"))
    assert exc_info.value.weight_type == "MAN_2D"
    assert exc_info.value.line == 4


def test_unknown_keyword_without_colon_is_named():
    """Test that a stray keyword line is reported as an unknown keyword."""
    text = COORDINATE_FILE.format(kind="EUC_2D").replace("EDGE_WEIGHT_TYPE", "DISPLAY_MODE GRID\nEDGE_WEIGHT_TYPE")
    with pytest.raises(TspLibParseException, match="unknown keyword 'DISPLAY_MODE'") as exc_info:
        parse_tsplib(text)
    assert exc_info.value.line == 4

    # Verify numeric garbage is still reported as unexpected content
    with pytest.raises(TspLibParseException, match="unexpected content"):
        parse_tsplib("NAME: x\n12 34\n")


def test_unknown_header_becomes_warning():
    """Test that unknown header keywords are kept as warnings."""
    text = COORDINATE_FILE.format(kind="EUC_2D").replace("TYPE: TSP", "TYPE: TSP\nCAPACITY: 7")
    instance = parse_tsplib(text)
    assert any("CAPACITY" in warning for warning in instance.warnings)


def test_explicit_writer_round_trip():
    """Test that writing a generated instance and parsing it back keeps every weight."""
    family = gen_lower_bound(2, 2.0, 1.0)
    text = write_tsplib_explicit(family.graph, "lb2", comment="tightness n=2")
    graph = instance_to_graph(parse_tsplib(text))
    assert graph.vertex_count == 9
    assert np.array_equal(graph.weights, family.graph.weights)


def test_tour_writer_uses_one_based_ids():
    """Test the TOUR_SECTION layout."""
    lines = tour_to_tsplib(Tour.cycle([0, 2, 1]), "t").splitlines()
    section = lines.index("TOUR_SECTION")
    assert lines[section + 1:] == ["1", "3", "2", "-1", "EOF"]


def test_lower_bound_family_shape():
    """Test the tightness family's size, cluster and metrics."""
    family = gen_lower_bound(1, 2.0, 1.0)
    assert family.graph.vertex_count == 6
    assert family.cluster == (1, 2, 4, 5)
    assert is_metric(family.graph)

    metrics = cluster_metrics(family.graph, family.cluster)
    assert (metrics.alpha, metrics.beta) == (2.0, 1.0)

    with pytest.raises(GeneratorParameterException, match="not constructible"):
        gen_lower_bound(1, 1.0, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_planted_clusters_are_recovered(seed):
    """Test that clustering a planted instance returns exactly the planted blocks."""
    graph, planted = gen_planted([3, 3], 2.0, seed)
    assert is_metric(graph)
    assert planted.vertex_sets() == [(0, 1, 2), (3, 4, 5)]
    assert gamma_clustering(graph, 2.0).vertex_sets() == planted.vertex_sets()


def test_planted_rejects_bad_parameters():
    """Test that planted generation needs a block of two or more vertices and gamma above one."""
    with pytest.raises(GeneratorParameterException):
        gen_planted([1, 1], 2.0, 0)
    with pytest.raises(GeneratorParameterException):
        gen_planted([3], 1.0, 0)


def test_generators_are_deterministic():
    """Test that equal seeds give equal instances."""
    first = gen_random_metric(10, seed=4, layout="blobs")
    second = gen_random_metric(10, seed=4, layout="blobs")
    assert np.array_equal(first.weights, second.weights)

    a, _ = gen_planted([2, 3, 2], 1.5, 9)
    b, _ = gen_planted([2, 3, 2], 1.5, 9)
    assert np.array_equal(a.weights, b.weights)


def test_metric_closure_shortcuts_long_edges():
    """Test that the closure replaces an edge by a cheaper two-hop path."""
    weights = np.array([[0, 1, 5], [1, 0, 2], [5, 2, 0]], dtype=float)
    closed = metric_closure(weights)
    assert closed[0, 2] == 3.0
    assert closed[2, 0] == 3.0


def test_office_distances_walk_around_walls():
    """Test grid distances between waypoints separated by a wall."""
    office = parse_office_map("W.#.W\n..#..\n.....\n")
    assert office.waypoints == [(0, 0), (0, 4)]
    graph = gen_office(office)
    # Verify the path goes down to the open bottom row and back up
    assert graph.weight(0, 1) == 8.0
    assert graph.labels == ["W1", "W2"]


def test_office_unreachable_waypoint():
    """Test that a walled-off waypoint is reported."""
    with pytest.raises(UnreachableWaypointException):
        gen_office(parse_office_map("W#W"))

    with pytest.raises(GeneratorParameterException, match="unknown cell"):
        parse_office_map("W?W")
