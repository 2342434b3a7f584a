"""Tests for snapshots, registry files, run directories, reports and SVG."""

import math
from dataclasses import replace

import numpy as np
import pytest

from frozenflake.config import RunConfig
from frozenflake.errors import InvalidInputError
from frozenflake.geometry import Ball, Point
from frozenflake.output import (
    Check,
    NormalOverlay,
    Report,
    curve_to_svg,
    format_value,
    from_registry,
    from_snapshot,
    load_run,
    load_snapshot,
    parse_record,
    save_run,
    save_snapshot,
    snapshot_path,
    to_registry,
    to_snapshot,
    to_svg,
)
from frozenflake.pipeline import PipelineRun
from frozenflake.refine import (
    BuildStats,
    FineRun,
    Frame,
    FrozenRegistry,
    RegistryBlock,
    initial_polygon,
)


def _block(generation, rows=2):
    a = np.array([[0.5, 0.5], [0.5, 0.0]])[:rows]
    b = np.array([[0.5, 0.0], [0.5, -0.5]])[:rows]
    return RegistryBlock(
        generation=generation,
        a=a,
        b=b,
        pieces=np.array([1, 4], dtype=np.int64)[:rows],
        levels=np.array([2, 1], dtype=np.int64)[:rows],
        codings=np.array([[1, 3], [2, 0]], dtype=np.uint8)[:rows],
        frame=Frame(((0.25, -0.125),)),
        chord_length=0.5,
    )


@pytest.fixture
def built_curve():
    omega = initial_polygon(12)
    stats = BuildStats(
        generation=1,
        M=3,
        depth=2,
        nominal_segments=192,
        built_segments=40,
        min_segment=0.07179676972449082,
        chords=1234,
        chord_lengths=(1.0 / 3.0, 0.1),
        vertical_exact=0.0123,
        vertical_tagged=0.0,
        closure_residual=1e-17,
        windowed=True,
    )
    frozen = np.zeros(len(omega), dtype=bool)
    frozen[[3, 4]] = True
    return replace(
        omega,
        generation=1,
        frozen=frozen,
        frame=Frame(((1.0 / 3.0, 0.1),)),
        fine_runs=(FineRun(0, 5, 1.0 / 3.0), FineRun(7, 9, 0.1)),
        stats=stats,
    )


class TestSnapshot:
    """Text snapshots of generation curves."""

    def test_round_trip_is_exact(self, built_curve):
        back = from_snapshot(to_snapshot(built_curve))
        np.testing.assert_array_equal(back.vertices, built_curve.vertices)
        np.testing.assert_array_equal(back.frozen, built_curve.frozen)
        np.testing.assert_array_equal(back.turns_num, built_curve.turns_num)
        np.testing.assert_array_equal(back.turns_den, built_curve.turns_den)
        np.testing.assert_array_equal(back.edge_generation, built_curve.edge_generation)
        assert back.generation == 1
        assert back.chord_length == built_curve.chord_length
        assert back.tracked_edge == 0
        assert back.frame == built_curve.frame
        assert back.fine_runs == built_curve.fine_runs
        assert back.stats == built_curve.stats

    def test_plain_polygon(self):
        omega = initial_polygon(7)
        back = from_snapshot(to_snapshot(omega))
        assert back.stats is None
        assert back.frame.depth == 0
        np.testing.assert_array_equal(back.vertices, omega.vertices)

    def test_file_round_trip(self, tmp_path, built_curve):
        path = save_snapshot(built_curve, snapshot_path(tmp_path, 1))
        assert path.name == "generation-001.curve"
        np.testing.assert_array_equal(load_snapshot(path).vertices, built_curve.vertices)

    def test_rejects_bad_row(self):
        with pytest.raises(InvalidInputError, match="line 3"):
            from_snapshot("# generation 0\n# chord_length 1\n1 2 3\n")

    def test_rejects_missing_header(self):
        with pytest.raises(InvalidInputError, match="lacks"):
            from_snapshot("0 0\n1 0\n0 -1\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError, match="cannot read snapshot"):
            load_snapshot(tmp_path / "absent.curve")


class TestRegistry:
    def test_round_trip(self):
        registry = FrozenRegistry().with_block(_block(1)).with_block(_block(2, rows=1))
        back = from_registry(to_registry(registry))
        assert back.generations == (1, 2)
        first = back.block(1)
        np.testing.assert_array_equal(first.a, registry.block(1).a)
        np.testing.assert_array_equal(first.codings, registry.block(1).codings)
        np.testing.assert_array_equal(first.pieces, [1, 4])
        assert first.frame == Frame(((0.25, -0.125),))
        assert back.entries(2)[0].coding == (1, 3)

    def test_empty_block(self):
        registry = FrozenRegistry().with_block(_block(1, rows=0))
        back = from_registry(to_registry(registry))
        assert back.generations == (1,)
        assert len(back) == 0

    def test_malformed_row(self):
        with pytest.raises(InvalidInputError, match="malformed registry row"):
            from_registry("# generation 1\n0 0 1 1\n")


def test_run_directory_round_trip(tmp_path):
    omega = initial_polygon(6)
    empty = RegistryBlock(
        generation=1,
        a=np.empty((0, 2)),
        b=np.empty((0, 2)),
        pieces=np.empty(0, dtype=np.int64),
        levels=np.empty(0, dtype=np.int64),
        codings=np.zeros((0, 1), dtype=np.uint8),
        frame=Frame(),
        chord_length=1.0,
    )
    window = Ball(Point(-0.375, 0.8660254037844386), 0.1)
    run = PipelineRun(
        (omega, replace(omega, generation=1)),
        FrozenRegistry().with_block(empty),
        (3,),
        (window,),
    )
    config = RunConfig(output_dir=tmp_path / "run")
    written = save_run(run, config)
    assert [p.name for p in written] == [
        "generation-000.curve",
        "generation-001.curve",
        "registry.txt",
        "manifest.txt",
        "config.txt",
    ]
    back = load_run(tmp_path / "run")
    assert len(back) == 2
    assert back.windows == (window,)
    assert back.registry.generations == (1,)
    assert RunConfig.from_file(tmp_path / "run" / "config.txt") == config


def test_load_run_needs_snapshots(tmp_path):
    with pytest.raises(InvalidInputError, match="no snapshots"):
        load_run(tmp_path)


class TestRecords:
    def test_format_value(self):
        assert format_value(True) == "true"
        assert format_value(None) == "none"
        assert float(format_value(0.1)) == 0.1
        assert format_value(7) == "7"

    def test_parse_record(self):
        assert parse_record("a=1 b=x") == {"a": "1", "b": "x"}
        with pytest.raises(InvalidInputError, match="key=value"):
            parse_record("a=1 loose")


class TestReport:
    """PASS/FAIL lines and their structured form."""

    def test_relations(self):
        assert Check("low", 0.5, 0.4).passed
        assert not Check("low", 0.3, 0.4).passed
        assert Check("high", 3.0, 4.0, "<=").passed
        assert not Check("nan", math.nan, 0.0).passed

    def test_pilot_checks_do_not_fail(self):
        report = Report("analyze")
        report.add(Check("pilot", 0.0, 1.0, gating=False))
        assert not report.failed
        report.add(Check("gate", 0.0, 1.0))
        assert report.failed

    def test_text(self):
        report = Report("analyze")
        report.add(Check("ahlfors_min", 0.9, 0.4))
        report.add(Check("vertical_mass_g1", 0.01, 0.02, gating=False, detail="pilot value"))
        report.table("ahlfors", [{"radius": 0.5, "min": 0.9, "max": 1.1}])
        text = report.to_text()
        assert "ahlfors_min" in text
        assert "PASS" in text
        assert "FAIL (pilot)" in text
        assert "[ahlfors]" in text
        assert "radius=0.5" in text

    def test_structured_round_trip(self):
        report = Report("wos")
        report.add(Check("arc_vs_expected", 1.5, 3.0, "<=", detail="in half-widths"))
        report.add(Check("omega_F", 0.1, 0.2, gating=False))
        report.table("arc", [{"fraction": 0.25, "walks": 100}])
        back = Report.from_structured(report.to_structured())
        assert back.title == "wos"
        assert back.checks == report.checks
        assert back.tables == {"arc": [{"fraction": "0.25", "walks": "100"}]}
        assert not back.failed

    def test_save(self, tmp_path):
        report = Report("analyze")
        report.add(Check("x", 1.0, 0.0))
        assert report.save(tmp_path / "a.report").read_text() == report.to_text()
        structured = report.save(tmp_path / "b.report", "structured")
        assert structured.read_text().startswith("report=analyze")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError, match="Unknown format"):
            Report("analyze").save(tmp_path / "c.report", "xml")


class TestSvg:
    def test_closed_curve(self):
        square = np.array([(0.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 0.0)])
        svg = to_svg(square, frozen=np.array([False, True, False, False]))
        assert svg.startswith("<?xml")
        assert svg.rstrip().endswith("</svg>")
        assert '<path class="curve" d="M0,-1 L1,-1 L1,-0 L0,-0 Z"/>' in svg
        assert '<path class="frozen" d="M1,-1 L1,-0"/>' in svg

    def test_overlays(self):
        omega = initial_polygon(12)
        ball = Ball(Point(0.0, 1.8), 0.25)
        arrow = NormalOverlay((0.0, 1.8), (0.0, 1.0), 0.25)
        svg = curve_to_svg(omega, balls=[ball], normals=[arrow])
        assert "<title>generation 0</title>" in svg
        assert 'class="ball"' in svg
        assert 'class="normal"' in svg

    def test_open_curve_has_no_close(self):
        svg = to_svg(np.array([(0.0, 0.0), (1.0, 0.0)]), closed=False)
        assert " Z" not in svg

    def test_needs_two_vertices(self):
        with pytest.raises(InvalidInputError, match="at least 2"):
            to_svg(np.array([(0.0, 0.0)]))
