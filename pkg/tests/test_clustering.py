import itertools
import math

import numpy as np
import orjson
import pytest

from app.core.exceptions import (ClusterMetricsException, GammaThresholdException,
                                 OracleSizeCapException)
from app.models.cluster import ClusterTree
from app.models.graph import MetricGraph
from app.schemas.cluster import ClusterTreeOut
from app.services.clustering import (brute_force_clusters, cluster_metrics, gamma_clustering,
                                     meets_threshold, verify_clustering)
from app.services.generators import gen_planted, gen_random_metric
from app.services.graph_core import minimum_spanning_tree
from app.services.tsplib import load_graph
from tests.conftest import TSPLIB_CLUSTER_COUNTS, tsplib_path

DEFAULT_GAMMA = 1.000001


@pytest.fixture
def nested() -> MetricGraph:
    """A tight pair {0, 1} inside the group {0, 1, 2}, with vertex 3 far away."""
    weights = np.array(
        [[0, 1, 3, 10], [1, 0, 3, 10], [3, 3, 0, 10], [10, 10, 10, 0]], dtype=float
    )
    return MetricGraph(weights=weights)


def test_cluster_metrics_of_a_group(two_groups):
    """Test alpha, beta and gamma of one tight group."""
    metrics = cluster_metrics(two_groups, [0, 1, 2])
    assert (metrics.alpha, metrics.beta, metrics.gamma) == (10.0, 1.0, 10.0)

    with pytest.raises(ClusterMetricsException, match="beta undefined"):
        cluster_metrics(two_groups, [0])
    with pytest.raises(ClusterMetricsException, match="alpha undefined"):
        cluster_metrics(two_groups, range(6))


def test_zero_beta_cluster_has_infinite_gamma():
    """Test that coincident points form a cluster of infinite separation."""
    weights = np.array([[0, 0, 4], [0, 0, 4], [4, 4, 0]], dtype=float)
    metrics = cluster_metrics(MetricGraph(weights=weights), [0, 1])
    assert math.isinf(metrics.gamma)
    assert meets_threshold(metrics.alpha, metrics.beta, 1e6, integral=True)

    # Verify the unbounded ratio survives JSON output
    tree = ClusterTree.build(3, 2.0, [((0, 1), metrics)])
    written = orjson.loads(orjson.dumps(ClusterTreeOut.from_tree(tree).model_dump(mode="json")))
    assert written["clusters"][0]["gamma"] == "inf"
    assert written["clusters"][0]["alpha"] == 4.0


def test_meets_threshold_is_exact_on_integers():
    """Test that integer weights are compared without rounding slack."""
    assert meets_threshold(1000001, 1000000, DEFAULT_GAMMA, integral=True)
    assert not meets_threshold(1000000, 1000000, DEFAULT_GAMMA, integral=True)
    assert meets_threshold(3.0, 1.5, 2.0, integral=False)


def test_two_groups_are_found(two_groups):
    """Test clustering two well separated groups."""
    tree = gamma_clustering(two_groups, 2.0)
    assert tree.vertex_sets() == [(0, 1, 2), (3, 4, 5)]
    assert [cluster.parent for cluster in tree] == [None, None]
    assert tree.clusters[0].metrics.gamma == 10.0

    # Verify a threshold above the separation finds nothing
    assert len(gamma_clustering(two_groups, 20.0)) == 0


def test_nested_clusters_link_to_parent(nested):
    """Test that a cluster inside a cluster is linked to it."""
    tree = gamma_clustering(nested, 2.0)
    assert tree.vertex_sets() == [(0, 1, 2), (0, 1)]
    assert tree.clusters[1].parent == 0
    assert tree.is_nested
    assert tree.blocks(0) == ([1], [2])
    assert tree.blocks(None) == ([0], [3])


@pytest.mark.parametrize("gamma", [1.0, 0.5])
def test_threshold_at_or_below_one_is_rejected(two_groups, gamma):
    """Test that thresholds of one or less raise."""
    with pytest.raises(GammaThresholdException):
        gamma_clustering(two_groups, gamma)
    with pytest.raises(GammaThresholdException):
        brute_force_clusters(two_groups, gamma)


@pytest.mark.parametrize("gamma", [1.01, 1.5, 2.0, 5.0])
def test_clustering_matches_subset_oracle(gamma):
    """Test that the tree-peeling clustering equals checking every subset."""
    layouts = itertools.cycle([("blobs", False), ("blobs", True), ("uniform", True), ("uniform", False)])
    for seed in range(50):
        layout, integral = next(layouts)
        n = 4 + seed % 6
        graph = gen_random_metric(n, seed=seed, layout=layout, integral=integral)
        tree = gamma_clustering(graph, gamma)
        assert tree.vertex_sets() == brute_force_clusters(graph, gamma), (seed, layout)


def test_higher_threshold_keeps_a_subset_of_clusters():
    """Test that raising gamma only ever removes clusters."""
    gammas = [1.01, 1.5, 2.0, 3.0, 5.0]
    layouts = itertools.cycle([("blobs", False), ("uniform", True), ("blobs", True), ("uniform", False)])
    for seed in range(200):
        layout, integral = next(layouts)
        graph = gen_random_metric(6 + seed % 15, seed=seed, layout=layout, integral=integral)
        previous = set(gamma_clustering(graph, gammas[0]).vertex_sets())
        for gamma in gammas[1:]:
            current = set(gamma_clustering(graph, gamma).vertex_sets())
            assert current <= previous, (seed, gamma)
            previous = current


def test_oracle_refuses_large_graphs():
    """Test the subset oracle's size cap."""
    graph = gen_random_metric(17, seed=0)
    with pytest.raises(OracleSizeCapException, match="oracle size cap"):
        brute_force_clusters(graph, 2.0)


@pytest.mark.parametrize("seed", range(10))
def test_clustering_output_verifies(seed):
    """Test that the verifier accepts every clustering the algorithm produces."""
    graph = gen_random_metric(25, seed=seed, layout="blobs")
    tree = gamma_clustering(graph, DEFAULT_GAMMA)
    assert verify_clustering(graph, tree) == []


def test_verifier_flags_overlap(two_groups):
    """Test that overlapping clusters give one laminarity violation."""
    entries = [
        ((0, 1, 2), cluster_metrics(two_groups, (0, 1, 2))),
        ((2, 3), cluster_metrics(two_groups, (2, 3))),
    ]
    tree = ClusterTree.build(6, 2.0, entries)
    violations = verify_clustering(two_groups, tree)
    assert len([v for v in violations if v.startswith("laminarity")]) == 1
    # Verify the set {2, 3} also fails the threshold
    assert any(v.startswith("threshold") for v in violations)


@pytest.mark.parametrize("seed", range(5))
def test_spanning_tree_crosses_two_blocks_once(seed):
    """Test that two planted blocks are joined by exactly one spanning tree edge."""
    graph, planted = gen_planted([4, 3], 2.0, seed)
    block = set(planted.clusters[0].vertices)
    crossing = [edge for edge in minimum_spanning_tree(graph) if (edge[0] in block) != (edge[1] in block)]
    assert len(crossing) == 1


@pytest.mark.parametrize("seed", range(5))
def test_spanning_tree_spans_every_cluster(seed):
    """Test that the spanning tree restricted to each cluster is itself a tree on it."""
    graph = gen_random_metric(30, seed=seed, layout="blobs")
    edges = minimum_spanning_tree(graph)
    for cluster in gamma_clustering(graph, DEFAULT_GAMMA):
        members = set(cluster.vertices)
        inside = [edge for edge in edges if edge[0] in members and edge[1] in members]
        assert len(inside) == len(members) - 1


@pytest.mark.parametrize("name", sorted(TSPLIB_CLUSTER_COUNTS))
def test_tsplib_cluster_counts(name):
    """Test the number of clusters found on the standard instances."""
    _, graph = load_graph(str(tsplib_path(name)))
    tree = gamma_clustering(graph, DEFAULT_GAMMA)
    assert len(tree) == TSPLIB_CLUSTER_COUNTS[name]
    assert verify_clustering(graph, tree) == []
