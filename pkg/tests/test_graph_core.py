import networkx as nx
import numpy as np
import pytest

from app.core.exceptions import InvalidGraphException
from app.models.graph import MetricGraph, MetricStatus, complement, vertex_set
from app.services.graph_core import (check_metric, induced_subgraph, is_metric,
                                     minimum_spanning_tree, tree_weight)


def test_graph_rejects_malformed_matrices():
    """Test that asymmetric, negative, NaN and non-zero-diagonal matrices are rejected."""
    with pytest.raises(InvalidGraphException, match="asymmetric"):
        MetricGraph(weights=np.array([[0, 1], [2, 0]], dtype=float))
    with pytest.raises(InvalidGraphException, match="non-negative"):
        MetricGraph(weights=np.array([[0, -1], [-1, 0]], dtype=float))
    with pytest.raises(InvalidGraphException, match="NaN"):
        MetricGraph(weights=np.array([[0, np.nan], [np.nan, 0]]))
    with pytest.raises(InvalidGraphException, match="diagonal"):
        MetricGraph(weights=np.array([[1, 1], [1, 0]], dtype=float))
    with pytest.raises(InvalidGraphException, match="square"):
        MetricGraph(weights=np.zeros((2, 3)))


def test_graph_is_frozen_and_flags_integral(triangle):
    """Test that the weight matrix is read-only and integral weights are detected."""
    assert triangle.is_integral
    assert triangle.vertex_count == 3
    assert triangle.max_weight == 3.0
    with pytest.raises(ValueError):
        triangle.weights[0, 1] = 7.0

    # Verify fractional weights are not integral
    half = MetricGraph(weights=np.array([[0, 0.5], [0.5, 0]]))
    assert not half.is_integral


def test_vertex_set_helpers():
    """Test sorting, de-duplication and complements of vertex sets."""
    assert vertex_set([3, 1, 3, 2]) == (1, 2, 3)
    assert complement((1, 2), 4) == (0, 3)
    with pytest.raises(InvalidGraphException):
        vertex_set([0, 5], vertex_count=3)
    with pytest.raises(InvalidGraphException):
        vertex_set([])


def test_check_metric_reports_violating_triples():
    """Test that the triangle scan lists every violating ordered triple."""
    graph = MetricGraph(weights=np.array([[0, 1, 5], [1, 0, 2], [5, 2, 0]], dtype=float))
    violations = check_metric(graph)
    assert violations == [(0, 1, 2), (2, 1, 0)]
    assert graph.metric_checked == MetricStatus.VIOLATIONS_FOUND

    # Verify a large enough tolerance absorbs the violation
    assert check_metric(graph, tol=2.5) == []
    assert graph.metric_checked == MetricStatus.METRIC


def test_is_metric_caches_status(triangle):
    """Test that is_metric records its result on the graph."""
    assert triangle.metric_checked == MetricStatus.UNCHECKED
    assert is_metric(triangle)
    assert triangle.metric_checked == MetricStatus.METRIC


def test_induced_subgraph_composes_origin(random_graph_factory):
    """Test that nested extraction maps vertices back to the original graph."""
    graph = random_graph_factory(8, seed=3)
    first = induced_subgraph(graph, [1, 3, 5, 7])
    second = induced_subgraph(first, [0, 2, 3])
    assert first.origin == (1, 3, 5, 7)
    assert second.origin == (1, 5, 7)
    assert second.weight(0, 2) == graph.weight(1, 7)

    with pytest.raises(InvalidGraphException, match="empty induced subgraph"):
        induced_subgraph(graph, [])


def test_induced_subgraph_inherits_metric_status(triangle):
    """Test that metric graphs pass their status on to induced subgraphs."""
    assert is_metric(triangle)
    sub = induced_subgraph(triangle, [0, 2])
    assert sub.metric_checked == MetricStatus.METRIC


@pytest.mark.parametrize("seed", range(10))
def test_minimum_spanning_tree_matches_networkx(random_graph_factory, seed):
    """Test that Prim's tree weight equals the networkx MST weight."""
    graph = random_graph_factory(12, seed=seed)
    edges = minimum_spanning_tree(graph)
    assert len(edges) == 11
    assert all(a < b for a, b, _ in edges)

    reference = nx.from_numpy_array(np.array(graph.weights))
    expected = nx.minimum_spanning_tree(reference).size(weight="weight")
    assert tree_weight(edges) == pytest.approx(expected, rel=1e-12)


def test_minimum_spanning_tree_rejects_disconnected_graph():
    """Test that absent edges splitting the graph raise an error."""
    graph = MetricGraph(
        weights=np.array([[0, 1, np.inf], [1, 0, np.inf], [np.inf, np.inf, 0]])
    )
    with pytest.raises(InvalidGraphException, match="disconnected"):
        minimum_spanning_tree(graph)
