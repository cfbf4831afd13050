"""
Tests for the command-line front end: config parsing, presets, reports,
file commands and exit codes.
"""

import json

import pytest

from src.blossom.blossoming import format_blossoming, orient_tree
from src.blossom.cli import (
    REPORT_HEADER, THREADS_ENV, RunConfig, UsageError, command_name, load_presets, main,
    parse_config, run,
)
from src.blossom.orientation import format_orientation, initial_alpha_d
from src.blossom.planar_map import format_map, parse_map, split_records


class TestConfig:

    def test_verify_bijection(self):
        config = parse_config(["verify", "bijection", "--edges", "4"])
        assert config.command == "verify_bijection"
        assert config.edges == 4
        assert config.threads == 1

    def test_command_names(self):
        assert command_name("verify", "doubly-rooted") == "verify_doubly_rooted"
        assert command_name("orient") == "orient"

    @pytest.mark.parametrize("argv", [
        ["verify", "bijection", "--edges", "99"],
        ["verify"],
        ["orient", "maps"],
        ["series", "quartic", "--order", "-1"],
        ["enumerate", "trees", "--degrees", "0", "2"],
    ])
    def test_usage_errors_exit_two(self, argv):
        with pytest.raises(SystemExit) as excinfo:
            parse_config(argv)
        assert excinfo.value.code == 2

    def test_preset(self, presets_file):
        config = parse_config(["verify", "mobiles", "--preset", "acceptance-pointed",
                               "--presets-file", presets_file])
        assert config.edges == 4

    def test_flags_override_presets(self, presets_file):
        config = parse_config(["verify", "mobiles", "--preset", "acceptance-pointed",
                               "--presets-file", presets_file, "--edges", "2"])
        assert config.edges == 2

    def test_missing_presets_file(self, tmp_path):
        assert load_presets(str(tmp_path / "absent.json")) == {}

    def test_thread_count_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        config = parse_config(["verify", "tightness"])
        assert config.threads == 3
        assert "threads" not in json.loads(config.echo())

    def test_text_round_trip(self):
        config = RunConfig("series_quartic", order=5, degrees=[2, 4])
        assert RunConfig.from_text(config.to_text()) == config

    def test_unknown_keys_are_rejected(self):
        with pytest.raises(UsageError, match="Unknown config keys"):
            RunConfig.from_text('{"command": "orient", "bogus": 1}')

    def test_unknown_command_is_rejected(self):
        with pytest.raises(UsageError, match="Unknown command"):
            RunConfig("verify_everything").validate()


class TestReports:

    def test_bijection_suite_passes(self):
        report = run(RunConfig("verify_bijection", edges=3))
        assert report.passed
        assert [c.name for c in report.checks] == [
            "profile counts match", "closure is injective", "closure image is every plane map"]

    def test_reports_are_deterministic(self):
        config = RunConfig("verify_tightness", edges=3)
        first = run(config).render()
        assert first.startswith(REPORT_HEADER)
        assert "## checks" in first
        assert run(RunConfig("verify_tightness", edges=3, threads=4)).render() == first

    def test_enumerate_maps_counts(self):
        text = run(RunConfig("enumerate_maps", edges=2)).render()
        assert "rooted planar" in text
        assert "darts 4" in text

    @pytest.mark.slow
    @pytest.mark.parametrize("command,kwargs", [
        ("verify_roundtrip", {"edges": 3, "tree_edges": 4}),
        ("verify_trumpets", {"edges": 3}),
        ("verify_geodesic", {"edges": 3}),
        ("verify_mobiles", {"edges": 3}),
        ("verify_doubly_rooted", {"edges": 2}),
        ("series_trees", {"order": 3}),
        ("series_plane_maps", {"order": 3}),
        ("series_quartic", {"order": 4}),
    ])
    def test_suites_pass(self, command, kwargs):
        report = run(RunConfig(command, **kwargs))
        assert report.passed, report.first_failure()

    @pytest.mark.slow
    def test_quartic_checks_compare_values(self):
        report = run(RunConfig("series_quartic", order=6))
        assert report.passed, report.first_failure()
        checks = {c.name: c for c in report.checks}
        assert "P equals u(1 + B_1) from the tree system" in checks
        assert "Pol equals 9 x4 (9 P^2 x4 y4 - 1) M_(o,4)" in checks
        rooted4 = checks["M_(o,4) equals the enumeration"]
        assert rooted4.detail.endswith("up to 4 edges")
        assert not rooted4.detail.startswith("0 ")


class TestMain:

    def test_exit_code_zero(self, capsys):
        assert main(["verify", "bijection", "--edges", "2"]) == 0
        assert capsys.readouterr().out.startswith(REPORT_HEADER)

    def test_exit_code_two(self):
        assert main(["verify", "bijection", "--edges", "99"]) == 2

    def test_open_without_input_is_usage(self):
        assert main(["open"]) == 2

    def test_open_rejects_a_non_minimal_orientation(self, tmp_path, square_map):
        source = tmp_path / "square.txt"
        source.write_text(format_map(square_map) + "\n"
                          + format_orientation(initial_alpha_d(square_map, 2)) + "\n")
        assert main(["open", "--input", str(source)]) == 1

    def test_open_then_close(self, tmp_path, square_map, capsys):
        source = tmp_path / "square.txt"
        trees = tmp_path / "trees.txt"
        maps = tmp_path / "maps.txt"
        source.write_text(format_map(square_map) + "\n")
        assert main(["open", "--input", str(source), "--output", str(trees)]) == 0
        assert main(["close", "--input", str(trees), "--output", str(maps)]) == 0
        records = split_records(maps.read_text())
        assert len(records) == 1
        closed = parse_map(records[0])
        assert (closed.num_vertices, closed.num_edges, closed.num_faces) == (4, 4, 2)

    def test_close_double_edge_tree(self, tmp_path, double_edge_tree):
        source = tmp_path / "tree.txt"
        source.write_text(format_blossoming(orient_tree(double_edge_tree, 2)) + "\n")
        out = tmp_path / "map.txt"
        assert main(["close", "--input", str(source), "--output", str(out)]) == 0
        assert parse_map(out.read_text()).num_edges == 2

    @pytest.mark.slow
    def test_quartic_ising(self, capsys):
        assert main(["series", "quartic-ising", "--t-order", "8"]) == 0
        assert "Q solves the Lagrangian equation" in capsys.readouterr().out
