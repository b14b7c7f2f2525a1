"""
Tests for the subcommand handlers and the main() entry point.
"""

import csv
import io
import json
import logging
from pathlib import Path

import pytest

import main as bgtile
from cli.commands import (
    FACTOR_SUFFIX,
    SIDECAR_SUFFIX,
    cmd_certify,
    cmd_check,
    cmd_construct,
    cmd_random,
    cmd_stats,
    cmd_sweep,
    cmd_tile,
    graph_stats,
    sidecar_path,
    sweep_jobs,
)
from cli.generator import extremal_instance
from core.bigraph import BipartiteGraph
from core.errors import ConstructionError, InvariantViolation
from core.extremal import ConstructionParams, build_even
from core.solver import SearchBudget, verify_factor
from utils.formatters import format_bge, format_construction_sidecar
from utils.parsers import parse_factor, parse_graph


def write_graph(path: Path, g: BipartiteGraph) -> Path:
    path.write_text(format_bge(g))
    return path


def write_construction(tmp_path: Path, params: ConstructionParams, name: str = "even.bge") -> Path:
    c = build_even(params)
    path = write_graph(tmp_path / name, c.graph)
    sidecar_path(path).write_text(format_construction_sidecar(c))
    return path


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("solver:\n  node_limit: 100000\nlogging:\n  level: WARNING\n")
    return path


class TestConstruct:
    def test_even_construction(self):
        result = cmd_construct("even", 1, 2, 2)
        g = parse_graph(result.text)
        assert g.n == 6
        assert g.min_degree() == 2
        assert result.report.min_degree == 2
        assert result.report.threshold == 3
        assert SIDECAR_SUFFIX in result.extras

    def test_gadget(self):
        result = cmd_construct("P", m=7, p=3)
        assert parse_graph(result.text).edge_count == 21
        assert result.report.details["k22_free"] is True

    def test_json_output(self):
        result = cmd_construct("even", 1, 2, 2, fmt="json")
        assert parse_graph(result.text, "json").n == 6

    def test_out_of_range_construction(self):
        with pytest.raises(ConstructionError):
            cmd_construct("odd-succ", 1, 3, 3)

    def test_missing_parameters(self):
        with pytest.raises(ValueError):
            cmd_construct("P", m=7)
        with pytest.raises(ValueError):
            cmd_construct("even", 1, 2)
        with pytest.raises(ValueError):
            cmd_construct("triangle", 1, 2, 2)


class TestCheckAndTile:
    def test_check_construction_has_no_factor(self, tmp_path):
        path = write_construction(tmp_path, ConstructionParams(1, 2, 2))
        result = cmd_check(path, 1, 2)
        assert result.report.verdict == "NoFactor"
        assert result.extras == {}

    def test_check_attaches_witness(self, tmp_path):
        g = BipartiteGraph.complete(3, 3)
        path = write_graph(tmp_path / "k33.bge", g)
        result = cmd_check(path, 1, 2)
        assert result.report.verdict == "Found"
        s, t, factor = parse_factor(result.extras[FACTOR_SUFFIX])
        assert verify_factor(g, s, t, factor)

    def test_tile_complete_graph(self, tmp_path):
        g = BipartiteGraph.complete(6, 6)
        path = write_graph(tmp_path / "k66.bge", g)
        result = cmd_tile(path, 1, 2)
        assert result.report.verdict == "Found"
        assert result.report.details["copies"] == 4
        _, _, factor = parse_factor(result.extras[FACTOR_SUFFIX])
        assert verify_factor(g, 1, 2, factor)

    def test_tile_structured_instance_via_extremal_route(self, tmp_path):
        g, _ = extremal_instance(1, 2, 100, 150, 150, seed=7)
        path = write_graph(tmp_path / "extremal.bge", g)
        result = cmd_tile(path, 1, 2)
        assert result.report.verdict == "Found"
        assert result.report.details["route"] == "extremal"
        assert result.report.details["copies"] == 200
        _, _, factor = parse_factor(result.extras[FACTOR_SUFFIX])
        assert verify_factor(g, 1, 2, factor)

    def test_tile_with_alpha_override(self, tmp_path):
        path = write_graph(tmp_path / "k66.bge", BipartiteGraph.complete(6, 6))
        assert cmd_tile(path, 1, 2, alpha=0.05).report.details["alpha"] == 0.05


class TestCertify:
    def test_certified(self, tmp_path):
        path = write_construction(tmp_path, ConstructionParams(1, 2, 2))
        report = cmd_certify(path, "even", 1, 2, 2).report
        assert report.verdict == "Certified"
        assert report.details["reason"] == "DivisibilityAfterUnmixing"

    def test_tampered_graph(self, tmp_path):
        path = write_construction(tmp_path, ConstructionParams(1, 2, 2))
        # a0 is in A1 and b4 in B2, a pair that must stay unmixable
        tampered = parse_graph(path.read_text()).with_edges(added=[(0, 4)])
        write_graph(path, tampered)
        assert cmd_certify(path, "even", 1, 2, 2).report.verdict == "NotCertified"

    def test_wrong_case(self, tmp_path):
        path = write_construction(tmp_path, ConstructionParams(1, 2, 2))
        report = cmd_certify(path, "odd-mid", 1, 2, 2).report
        assert report.verdict == "NotCertified"
        assert "even" in report.details["reason"]

    def test_missing_sidecar(self, tmp_path):
        path = write_graph(tmp_path / "bare.bge", BipartiteGraph.complete(3, 3))
        with pytest.raises(FileNotFoundError):
            cmd_certify(path, "even", 1, 2, 2)


class TestSweep:
    def test_verdicts_and_determinism(self):
        first = cmd_sweep(1, 2, [2, 3], trials=5, seed=0)
        second = cmd_sweep(1, 2, [2, 3], trials=5, seed=0)
        assert first.text == second.text
        rows = list(csv.DictReader(io.StringIO(first.text)))
        assert len(rows) == 12
        constructions = [r for r in rows if r["instance_kind"] != "random"]
        randoms = [r for r in rows if r["instance_kind"] == "random"]
        assert [r["instance_kind"] for r in constructions] == ["even", "odd-succ"]
        assert all(r["verdict"] == "NoFactor" for r in constructions)
        assert len(randoms) == 10
        assert all(r["verdict"] == "Found" for r in randoms)
        assert all(r["elapsed_ms"] == "-" for r in rows)

    def test_worker_pool_matches_serial_run(self):
        serial = cmd_sweep(1, 2, [2, 3], trials=3, seed=0)
        pooled = cmd_sweep(1, 2, [2, 3], trials=3, seed=0, workers=2)
        assert pooled.text == serial.text

    def test_time_limit_reaches_every_job(self):
        jobs = sweep_jobs(1, 2, [2], trials=2, seed=0, density=0.5, node_limit=None,
                          alpha=0.01, fallback_n_cap=40, time_limit=30.0)
        assert [job[7] for job in jobs] == [30.0, 30.0, 30.0]
        result = cmd_sweep(1, 2, [2], trials=2, seed=0, budget=SearchBudget(time_limit=30.0))
        rows = list(csv.DictReader(io.StringIO(result.text)))
        assert [r["verdict"] for r in rows] == ["NoFactor", "Found", "Found"]

    def test_construction_skipped_outside_range(self):
        # (1, 4) with k odd has no construction; only the random trials remain
        rows = list(csv.DictReader(io.StringIO(cmd_sweep(1, 4, [1], trials=2, seed=3).text)))
        assert [r["instance_kind"] for r in rows] == ["random", "random"]

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            cmd_sweep(1, 2, [2], trials=-1, seed=0)
        with pytest.raises(ValueError):
            cmd_sweep(2, 2, [2], trials=1, seed=0)


class TestRandomAndStats:
    def test_random_command(self):
        result = cmd_random(6, 0.5, 3, seed=9)
        g = parse_graph(result.text)
        assert g.min_degree() >= 3
        assert result.report.details["edges"] == g.edge_count

    def test_stats_of_complete_graph(self):
        stats = graph_stats(BipartiteGraph.complete(3, 3), 1, 2)
        assert stats["edges"] == 9
        assert stats["min_degree"] == stats["max_degree"] == 3
        assert stats["density"] == "1.0000"
        assert stats["k22_free"] is False
        assert (stats["k"], stats["threshold"]) == (1, 2)

    def test_stats_without_part_sizes(self, tmp_path):
        path = write_graph(tmp_path / "k33.bge", BipartiteGraph.complete(3, 3))
        result = cmd_stats(path)
        assert "threshold" not in result.report.details
        assert result.text.startswith("n_a")


class TestParseKs:
    @pytest.mark.parametrize("text,expected", [
        ("2", [2]),
        ("2,3,5", [2, 3, 5]),
        ("2-4", [2, 3, 4]),
        ("2-3,6", [2, 3, 6]),
    ])
    def test_values(self, text, expected):
        assert bgtile.parse_ks(text) == expected

    @pytest.mark.parametrize("text", ["", "0", "a-b"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            bgtile.parse_ks(text)


class TestConfig:
    def test_merged_over_defaults(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("tiler:\n  alpha: 0.05\n")
        config = bgtile.load_config(str(path))
        assert config["tiler"]["alpha"] == 0.05
        assert config["tiler"]["fallback_n_cap"] == 40
        assert config["sweep"]["trials"] == 5

    def test_explicit_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            bgtile.load_config(str(tmp_path / "absent.yaml"))

    def test_environment_path_falls_back_to_defaults(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BGTILE_CONFIG", str(tmp_path / "absent.yaml"))
        assert bgtile.load_config() == bgtile.DEFAULT_CONFIG


class TestMain:
    def test_construct_then_certify(self, tmp_path, config_file, capsys):
        out = tmp_path / "even.bge"
        code = bgtile.main(["--config", str(config_file), "construct", "even",
                            "--s", "1", "--t", "2", "--k", "2", "--out", str(out)])
        assert code == bgtile.EXIT_OK
        assert parse_graph(out.read_text()).n == 6
        assert sidecar_path(out).exists()
        capsys.readouterr()

        code = bgtile.main(["--config", str(config_file), "certify", str(out), "even",
                            "--s", "1", "--t", "2", "--k", "2"])
        assert code == bgtile.EXIT_OK
        assert json.loads(capsys.readouterr().out)["verdict"] == "Certified"

    def test_check_writes_factor_next_to_out(self, tmp_path, config_file, capsys):
        graph = write_graph(tmp_path / "k33.bge", BipartiteGraph.complete(3, 3))
        report = tmp_path / "report.json"
        code = bgtile.main(["--config", str(config_file), "check", str(graph),
                            "--s", "1", "--t", "2", "--out", str(report)])
        assert code == bgtile.EXIT_OK
        assert json.loads(report.read_text())["verdict"] == "Found"
        assert (tmp_path / ("report.json" + FACTOR_SUFFIX)).exists()

    def test_sweep_to_stdout(self, config_file, capsys):
        code = bgtile.main(["--config", str(config_file), "sweep", "--s", "1", "--t", "2",
                            "--k", "2", "--trials", "1", "--seed", "4"])
        assert code == bgtile.EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("s,t,k,instance_kind")
        assert len(lines) == 3

    def test_sweep_time_limit_flag(self, config_file, capsys):
        code = bgtile.main(["--config", str(config_file), "sweep", "--s", "1", "--t", "2",
                            "--k", "2", "--trials", "1", "--seed", "4", "--budget-secs", "30"])
        assert code == bgtile.EXIT_OK
        assert len(capsys.readouterr().out.splitlines()) == 3

    def test_extras_without_out_are_reported(self, caplog, capsys):
        result = cmd_construct("even", 1, 2, 2)
        with caplog.at_level(logging.WARNING):
            bgtile.emit(result, None)
        assert parse_graph(capsys.readouterr().out).n == 6
        assert "not writing" in caplog.text
        assert SIDECAR_SUFFIX in caplog.text

    def test_usage_errors_exit_one(self, config_file):
        assert bgtile.main(["--config", str(config_file), "construct"]) == bgtile.EXIT_USAGE
        assert bgtile.main(["--config", str(config_file), "frobnicate"]) == bgtile.EXIT_USAGE
        assert bgtile.main(["--config", str(config_file), "sweep", "--s", "1", "--t", "2",
                            "--k", "0"]) == bgtile.EXIT_USAGE

    def test_input_errors_exit_one(self, tmp_path, config_file):
        missing = str(tmp_path / "missing.bge")
        assert bgtile.main(["--config", str(config_file), "check", missing,
                            "--s", "1", "--t", "2"]) == bgtile.EXIT_USAGE
        bad = tmp_path / "bad.bge"
        bad.write_text("bge 1 1 1\ne 0 3\n")
        assert bgtile.main(["--config", str(config_file), "stats", str(bad)]) == bgtile.EXIT_USAGE
        assert bgtile.main(["--config", str(config_file), "construct", "odd-succ",
                            "--s", "1", "--t", "3", "--k", "3"]) == bgtile.EXIT_USAGE

    def test_invariant_violation_exits_two(self, config_file, monkeypatch):
        def broken(args, config):
            raise InvariantViolation("factor failed verification")

        monkeypatch.setattr(bgtile, "run", broken)
        code = bgtile.main(["--config", str(config_file), "stats", "whatever.bge"])
        assert code == bgtile.EXIT_INVARIANT
