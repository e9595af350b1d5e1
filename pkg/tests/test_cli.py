import csv
import io

import orjson
import pytest
from typer.testing import CliRunner

from app.main import cli
from app.services.bench import BENCH_COLUMNS
from app.services.tsplib import instance_to_graph, parse_tsplib


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_cluster_prints_tree_as_json(runner, data_dir):
    """Test that the cluster command writes the tree to stdout."""
    result = runner.invoke(cli, ["cluster", str(data_dir / "burma14.tsp")])
    assert result.exit_code == 0
    tree = orjson.loads(result.stdout)
    assert tree["vertex_count"] == 14
    assert len(tree["clusters"]) == 5
    assert all(cluster["gamma"] >= 1.000001 for cluster in tree["clusters"])
    assert "burma14: 5 clusters" in result.stderr


def test_cluster_rejects_low_gamma(runner, data_dir):
    """Test that a threshold of one is a usage error."""
    result = runner.invoke(cli, ["cluster", str(data_dir / "burma14.tsp"), "--gamma", "1"])
    assert result.exit_code == 2
    assert result.stdout == ""


def test_cluster_missing_file(runner, tmp_path):
    """Test that an unreadable instance is a usage error."""
    result = runner.invoke(cli, ["cluster", str(tmp_path / "nope.tsp")])
    assert result.exit_code == 2


def test_cluster_rejects_binary_file(runner, tmp_path):
    """Test that an instance file that is not text is a usage error."""
    binary = tmp_path / "bad.tsp"
    binary.write_bytes(b"NAME: \xff\xfe")
    result = runner.invoke(cli, ["cluster", str(binary)])
    assert result.exit_code == 2
    assert result.exception is None or isinstance(result.exception, SystemExit)


def test_solve_reports_optimum(runner, data_dir):
    """Test the JSON solve report of a small instance."""
    result = runner.invoke(cli, ["solve", str(data_dir / "burma14.tsp")])
    assert result.exit_code == 0
    report = orjson.loads(result.stdout)
    assert report["cost"] == 3323
    assert report["status"] == "optimal"
    assert sorted(report["tour"]["order"]) == list(range(14))


def test_solve_clustered_writes_tour_section(runner, data_dir, tmp_path):
    """Test the text output of a clustered solve."""
    out = tmp_path / "burma14.tour"
    result = runner.invoke(
        cli, ["solve", str(data_dir / "burma14.tsp"), "--clustered", "--format", "text", "--out", str(out)]
    )
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    section = lines.index("TOUR_SECTION")
    assert sorted(int(v) for v in lines[section + 1:section + 15]) == list(range(1, 15))
    assert lines[-2:] == ["-1", "EOF"]
    assert "5 clusters" in result.stderr


def test_solve_timeout_exits_with_one(runner, data_dir, tmp_path):
    """Test that running out of budget still reports a tour and exits 1."""
    log = tmp_path / "progress.csv"
    result = runner.invoke(
        cli,
        [
            "solve",
            str(data_dir / "ulysses22.tsp"),
            "--solver", "branch-and-bound",
            "--budget-secs", "0.001",
            "--progress-log", str(log),
        ],
    )
    assert result.exit_code == 1
    report = orjson.loads(result.stdout)
    assert report["status"] == "feasible_timeout"
    assert sorted(report["tour"]["order"]) == list(range(22))
    assert log.exists()


def test_solve_rejects_zero_budget(runner, data_dir):
    """Test that a non-positive budget is a usage error."""
    result = runner.invoke(cli, ["solve", str(data_dir / "burma14.tsp"), "--budget-secs", "0"])
    assert result.exit_code == 2


def test_gen_lower_bound_writes_tsplib(runner):
    """Test that generated instances come out as parseable TSPLIB text."""
    result = runner.invoke(cli, ["gen", "lower-bound", "--n", "1"])
    assert result.exit_code == 0
    instance = parse_tsplib(result.stdout)
    assert instance.dimension == 6


def test_gen_planted_writes_cluster_sidecar(runner, tmp_path):
    """Test that planted instances are written with their clustering next to them."""
    out = tmp_path / "planted.tsp"
    result = runner.invoke(cli, ["gen", "planted", "--sizes", "3,3", "--seed", "2", "--out", str(out)])
    assert result.exit_code == 0
    assert parse_tsplib(out.read_text()).dimension == 6
    sidecar = orjson.loads((tmp_path / "planted.tsp.clusters.json").read_text())
    assert [cluster["vertices"] for cluster in sidecar["clusters"]] == [[0, 1, 2], [3, 4, 5]]

    # Verify the written instance clusters back to the planted blocks
    result = runner.invoke(cli, ["cluster", str(out), "--gamma", "2"])
    assert [cluster["vertices"] for cluster in orjson.loads(result.stdout)["clusters"]] == [
        [0, 1, 2],
        [3, 4, 5],
    ]


def test_gen_planted_rejects_bad_sizes(runner):
    """Test that unreadable block sizes are a usage error."""
    result = runner.invoke(cli, ["gen", "planted", "--sizes", "three"])
    assert result.exit_code == 2


def test_gen_office_writes_waypoint_distances(runner, tmp_path):
    """Test that an office map becomes an explicit instance over its waypoints."""
    floor = tmp_path / "floor.txt"
    floor.write_text("W.#.W\n..#..\n.....\n")
    result = runner.invoke(cli, ["gen", "office", str(floor)])
    assert result.exit_code == 0
    graph = instance_to_graph(parse_tsplib(result.stdout))
    assert graph.vertex_count == 2
    assert graph.weight(0, 1) == 8
    assert "2 waypoints" in result.stderr


def test_gen_random_is_seeded(runner):
    """Test that the same seed writes the same instance."""
    args = ["gen", "random", "--n", "7", "--seed", "4", "--layout", "blobs", "--integral"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout
    assert parse_tsplib(first.stdout).dimension == 7

    # Verify an unknown layout is a usage error
    result = runner.invoke(cli, ["gen", "random", "--n", "7", "--layout", "rings"])
    assert result.exit_code == 2


def test_gap_tightness(runner):
    """Test the tightness curve output."""
    result = runner.invoke(cli, ["gap", "--tightness", "2", "--gamma", "2"])
    assert result.exit_code == 0
    points = orjson.loads(result.stdout)
    assert [point["n"] for point in points] == [0, 1, 2]
    assert points[1]["ratio"] == pytest.approx(1.2)


def test_gap_needs_instance_or_tightness(runner):
    """Test that the gap command needs something to measure."""
    result = runner.invoke(cli, ["gap"])
    assert result.exit_code == 2


def test_bench_writes_csv(runner, data_dir):
    """Test the bench CSV layout and the error row of a missing instance."""
    result = runner.invoke(
        cli,
        [
            "bench",
            str(data_dir / "burma14.tsp"),
            str(data_dir / "missing.tsp"),
            "--jobs", "1",
            "--solver", "heuristic",
            "--budget-secs", "5",
        ],
    )
    assert result.exit_code == 0
    rows = list(csv.DictReader(io.StringIO(result.stdout)))
    assert list(rows[0]) == BENCH_COLUMNS
    assert [row["name"] for row in rows] == ["burma14", "missing"]
    assert rows[0]["clusters"] == "5"
    assert rows[0]["error"] == ""
    assert rows[1]["error"] != ""
