"""Tests for the command line: commands, files written and exit codes."""

import pytest

from frozenflake.cli import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_OK,
    EXIT_RESOURCE,
    build_parser,
    main,
    wos_report,
)
from frozenflake.config import RunConfig
from frozenflake.output import Check, Report
from frozenflake.pipeline import PipelineRun, build_generations
from frozenflake.refine import advance, initial_polygon


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_generate_initial_polygon(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["-q", "generate", "--initial-sides", "6", "--generations", "0",
                 "--output-dir", str(out)])
    assert code == EXIT_OK
    assert (out / "generation-000.curve").exists()
    assert (out / "manifest.txt").exists()
    assert "generation=0" in capsys.readouterr().out

    assert main(["-q", "report", "--run", str(out)]) == EXIT_OK
    assert "[generations]" in capsys.readouterr().out


def test_global_step_hits_leaf_budget(tmp_path, capsys):
    code = main(
        [
            "-q",
            "generate",
            "--window", "none",
            "--initial-sides", "12",
            "--m-schedule", "3",
            "--leaf-budget", "100",
            "--output-dir", str(tmp_path),
        ]
    )
    assert code == EXIT_RESOURCE
    assert "budget" in capsys.readouterr().err


class TestConfigErrors:
    """Bad configuration exits with code 3."""

    def test_decreasing_schedule(self, capsys):
        assert main(["-q", "generate", "--m-schedule", "3,2", "--generations", "2"]) == EXIT_CONFIG
        assert "non-decreasing" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["-q", "-c", str(tmp_path / "absent.cfg"), "generate"]) == EXIT_CONFIG

    def test_config_file_layers_under_flags(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"initial_sides=5\ngenerations=0\noutput_dir={tmp_path / 'out'}\n")
        assert main(["-q", "-c", str(cfg), "generate", "--initial-sides", "7"]) == EXIT_OK
        first = (tmp_path / "out" / "generation-000.curve").read_text()
        assert len([line for line in first.splitlines() if not line.startswith("#")]) == 7

    def test_unknown_fixture(self, tmp_path):
        code = main(["-q", "analyze", "--fixture", "teapot", "--output-dir", str(tmp_path)])
        assert code == EXIT_CONFIG

    def test_malformed_arc(self, tmp_path):
        code = main(["-q", "wos", "--fixture", "disk", "--arc", "half",
                     "--output-dir", str(tmp_path)])
        assert code == EXIT_CONFIG


def test_analyze_fixture(tmp_path, capsys):
    code = main(
        [
            "-q",
            "analyze",
            "--fixture", "disk",
            "--ahlfors-samples", "8",
            "--max-centers", "4",
            "--output-dir", str(tmp_path),
        ]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "ahlfors_min" in out
    assert "[reifenberg]" in out
    assert (tmp_path / "analyze.report").exists()


def test_wos_arc_against_expectation(tmp_path, capsys):
    code = main(
        [
            "-q",
            "wos",
            "--fixture", "disk",
            "--arc", "0:0.25",
            "--pole", "0,0",
            "--expect", "0.25",
            "--walks", "4000",
            "--seed", "3",
            "--report-format", "structured",
            "--output-dir", str(tmp_path),
        ]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("report=wos")
    assert "check=arc_vs_expected" in out


def test_export_svg_fixture(tmp_path):
    path = tmp_path / "figure.svg"
    assert main(["-q", "export-svg", "--fixture", "figure2", "--svg", str(path)]) == EXIT_OK
    text = path.read_text()
    assert 'class="frozen"' in text
    assert " Z" not in text


class TestReportCommand:
    def test_failed_report(self, tmp_path):
        report = Report("analyze")
        report.add(Check("ahlfors_min", 0.1, 0.4))
        report.save(tmp_path / "analyze.report", "structured")
        assert main(["-q", "report", "--run", str(tmp_path)]) == EXIT_FAIL

    def test_missing_directory(self, tmp_path):
        assert main(["-q", "report", "--run", str(tmp_path / "absent")]) == EXIT_CONFIG


def _checks(report):
    return {c.name: c for c in report.checks}


class TestWosWitness:
    """Measure of F around frozen pieces, reported with pilot thresholds."""

    def test_square_step(self):
        curve, registry = advance(initial_polygon(4, 1.0), 3, depth=1)
        run = PipelineRun((curve,), registry, (), ())
        report = wos_report(run, RunConfig(walks=4000, seed=3))
        assert len(report.tables["omega_F_global"]) == 1
        outer, inner = report.tables["omega_F_local"]
        assert inner["radius"] == pytest.approx(0.5 * outer["radius"])
        checks = _checks(report)
        assert checks["omega_F"].value == outer["fraction"]
        assert checks["omega_F"].value > 0.0
        assert checks["omega_F_low"].value > 0.0
        assert 1.0 <= checks["conditional_ratio"].value <= 4.0
        assert not any(c.gating for c in report.checks)
        assert not report.failed

    @pytest.mark.slow
    @pytest.mark.timeout(1800)
    def test_two_tracked_generations(self):
        config = RunConfig(generations=2, walks=20_000, workers=2, seed=1)
        run = build_generations(config)
        report = wos_report(run, config)
        local = report.tables["omega_F_local"]
        assert len(local) == 2
        assert all(row["fraction"] > 0.0 and row["low"] > 0.0 for row in local)
        rows = report.tables["normal_oscillation"]
        assert [row["generation"] for row in rows] == [0, 1, 2]
        assert "omega_F" in _checks(report)
