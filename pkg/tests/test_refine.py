"""Tests for assembly, smoothing, equal-chord inscription and the frozen registry."""

import math

import numpy as np
import pytest

from frozenflake.errors import (
    InvalidInputError,
    InvalidParameterError,
    ResourceLimitError,
    TopologyError,
)
from frozenflake.geometry import (
    Ball,
    OrientedSegment,
    Point,
    classify_points,
    project_onto_segments,
)
from frozenflake.refine import (
    Frame,
    FrozenRegistry,
    SmoothCurve,
    advance,
    advance_windowed,
    assemble_G,
    boundary_proximity,
    edge_length_ratios,
    exact_vertical_ratio,
    frozen_coverage,
    initial_polygon,
    lookahead_window,
    persistence_residuals,
    rechordalize,
    smooth,
)
from frozenflake.snowflake import Roots


@pytest.fixture(scope="module")
def square_step():
    """Global step from the unit square with M=3 at depth 1."""
    prev = initial_polygon(4, 1.0)
    curve, registry = advance(prev, 3, depth=1)
    return prev, curve, registry


@pytest.fixture(scope="module")
def windowed_step():
    """Windowed step from a 12-gon around the tracked edge."""
    prev = initial_polygon(12, 1.0)
    window = lookahead_window(prev, 3, 2)
    curve, registry = advance(prev, 3, window=window, depth=2)
    return prev, window, curve, registry


@pytest.fixture(scope="module")
def hundred_gon_g():
    """G_1 of the 100-gon with M=2 at canonical depth (25600 segments)."""
    prev = initial_polygon()
    return prev, assemble_G(prev, 2)


def _chain(points):
    return [OrientedSegment.between(p, q) for p, q in zip(points, points[1:])]


class TestInitialPolygon:
    def test_hundred_gon(self):
        omega0 = initial_polygon()
        assert len(omega0) == 100
        assert omega0.polyline.is_clockwise
        assert omega0.chord_spread() <= 1e-9
        assert omega0.tracked_edge == 0

    def test_edge_zero_is_horizontal(self):
        omega0 = initial_polygon(100, 1.0)
        a, b = omega0.edges
        assert a[0, 1] == b[0, 1]
        assert b[0, 0] - a[0, 0] == pytest.approx(1.0)
        assert omega0.segment(0).normal.unit_vector == (0.0, 1.0)

    def test_vertical_edges_exact(self):
        omega0 = initial_polygon(100, 1.0)
        vertical = np.flatnonzero((omega0.turns_num == 0) & (omega0.turns_den == 1))
        a, b = omega0.edges
        np.testing.assert_array_equal(a[vertical, 0], b[vertical, 0])

    def test_rejects_small(self):
        with pytest.raises(InvalidParameterError):
            initial_polygon(2)


class TestAssemble:
    def test_hundred_gon_count_and_closure(self, hundred_gon_g):
        _, assembled = hundred_gon_g
        assert assembled.nominal == 100 * 256
        assert len(assembled) == 25600
        np.testing.assert_array_equal(assembled.a[1:], assembled.b[:-1])
        np.testing.assert_array_equal(assembled.a[0], assembled.b[-1])
        assert assembled.closed

    def test_hundred_gon_leaf_bounds(self, hundred_gon_g):
        prev, assembled = hundred_gon_g
        a, b = prev.edges
        root = assembled.root
        alpha = Roots.from_edges(a, b, prev.turns_num, prev.turns_den, 2).alpha[root]
        ell = prev.edge_lengths[root]
        k = assembled.levels.astype(np.float64)
        lengths = assembled.lengths
        assert np.all(lengths >= 0.25**k * ell * (1 - 1e-9))
        assert np.all(lengths <= (2.0 * (1.0 + np.cos(alpha))) ** -k * ell * (1 + 1e-9))
        _, _, dist = project_onto_segments(assembled.b, a[root], b[root])
        assert np.all(dist <= 10.0 * alpha * ell + 1e-12)

    def test_hundred_gon_edge_lengths(self, hundred_gon_g):
        prev, assembled = hundred_gon_g
        ratios = edge_length_ratios(prev, assembled)
        # gamma = pi: alpha = pi/2 and every bump folds onto itself
        folded = (prev.turns_num == 1) & (prev.turns_den == 2)
        assert int(folded.sum()) == 1
        assert np.all(ratios[~folded] >= 1.0 - 1e-12)
        assert np.all(ratios[~folded] <= 12.0)
        assert ratios[folded][0] == pytest.approx(13.5)

    def test_window_leaves_edges_unmeasured(self, windowed_step):
        prev, window, _, _ = windowed_step
        ratios = edge_length_ratios(prev, assemble_G(prev, 3, depth=2, window=window))
        assert np.isnan(ratios).any()
        assert np.all(ratios[~np.isnan(ratios)] >= 1.0 - 1e-12)

    def test_leaf_budget_suggests_window(self):
        with pytest.raises(ResourceLimitError):
            assemble_G(initial_polygon(), 2, leaf_budget=1000)

    def test_rejects_bad_m(self):
        with pytest.raises(InvalidParameterError):
            assemble_G(initial_polygon(), 0)


class TestSmooth:
    """Trimming and fillets."""

    def test_right_angle_radius_equals_trim(self):
        square = _chain([(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)])
        sc = smooth(square, 1.0)
        assert 1.0 / abs(sc.kappa[1]) == pytest.approx(1.0 / 400.0)
        assert len(sc) == 8
        assert sc.trim == pytest.approx(1.0 / 400.0)

    def test_trimmed_segments_are_concentric(self):
        square = _chain([(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)])
        sc = smooth(square, 1.0)
        straight = sc.length[0::2]
        np.testing.assert_allclose(straight, 1.0 - 1.0 / 200.0)

    def test_collinear_junction_is_straight(self):
        sc = smooth(_chain([(0, 0), (1, 0), (2, 0)]), 1.0, closed=False)
        assert sc.kappa[1] == 0.0
        assert sc.length[1] == pytest.approx(1.0 / 200.0)

    @pytest.mark.parametrize("theta", [0.1, 0.7, 2.0])
    def test_fillet_radius_and_tangency(self, theta):
        corner = [(-1.0, 0.0), (0.0, 0.0), (math.cos(theta), -math.sin(theta))]
        sc = smooth(_chain(corner), 1.0, closed=False)
        d = 1.0 / 400.0
        assert 1.0 / abs(sc.kappa[1]) == pytest.approx(d / math.tan(theta / 2))
        assert float(sc.tangency_residuals().max()) <= 1e-10
        np.testing.assert_allclose(sc.ends[:-1], sc.start[1:], atol=1e-12)

    def test_closed_curve_is_c1(self):
        prev = initial_polygon(6, 1.0)
        sc = smooth(assemble_G(prev, 3, depth=1), 0.2)
        assert float(sc.tangency_residuals().max()) <= 1e-8
        gaps = np.hypot(*(sc.ends - np.roll(sc.start, -1, axis=0)).T)
        assert float(gaps.max()) <= 1e-12

    def test_not_chaining(self):
        with pytest.raises(TopologyError, match="do not chain"):
            smooth(
                [
                    OrientedSegment.between((0, 0), (1, 0)),
                    OrientedSegment.between((2, 0), (3, 0)),
                ],
                0.5,
                closed=False,
            )

    def test_cusp(self):
        with pytest.raises(TopologyError, match="folds back"):
            smooth(_chain([(0, 0), (1, 0), (0, 0)]), 0.5, closed=False)

    def test_trim_scale_too_large(self):
        with pytest.raises(InvalidParameterError):
            smooth(_chain([(0, 0), (1, 0), (1, 1)]), 2.0, closed=False)


class TestRechordalize:
    """Equal-chord inscription."""

    @pytest.mark.parametrize(("radius", "m"), [(1.0, 6), (2.5, 17)])
    def test_circle_fixed_count(self, radius, m):
        sc = SmoothCurve.circle((0.0, 0.0), radius)
        curve = rechordalize(sc, 0, 1.0, chords=m)
        assert len(curve) == m
        assert curve.chord_length == pytest.approx(2 * radius * math.sin(math.pi / m), rel=1e-9)
        assert curve.chord_spread() <= 1e-9
        np.testing.assert_allclose(np.hypot(*curve.vertices.T), radius, rtol=1e-12)

    def test_circle_turn_bound(self):
        curve = rechordalize(SmoothCurve.circle((0.0, 0.0), 1.0), 2, 1.0)
        assert curve.max_chord_turn() <= math.pi * 2.0**-6
        assert curve.chord_spread() <= 1e-9
        assert curve.polyline.is_clockwise

    def test_chord_budget(self):
        with pytest.raises(ResourceLimitError):
            rechordalize(SmoothCurve.circle((0.0, 0.0), 1.0), 0, 1.0, chord_budget=100)

    def test_open_curve_rejected(self):
        sc = smooth(_chain([(0, 0), (1, 0), (2, 1)]), 1.0, closed=False)
        with pytest.raises(InvalidInputError, match="closed"):
            rechordalize(sc, 0, 1.0)

    def test_negative_generation(self):
        with pytest.raises(InvalidParameterError):
            rechordalize(SmoothCurve.circle((0.0, 0.0), 1.0), -1, 1.0, chords=8)


class TestAdvance:
    """One global step."""

    def test_equal_chords_and_turns(self, square_step):
        _, curve, _ = square_step
        assert curve.generation == 1
        assert curve.chord_spread() <= 1e-9
        assert curve.max_chord_turn() <= math.pi * 2.0**-5
        assert len(curve) >= curve.stats.nominal_segments

    def test_chord_count_matches_length(self, square_step):
        prev, curve, _ = square_step
        assembled = assemble_G(prev, 3, depth=1)
        sc = smooth(assembled, assembled.min_length)
        assert len(curve) * curve.chord_length == pytest.approx(sc.total_length, rel=0.01)

    def test_frozen_edges_vertical(self, square_step):
        _, curve, _ = square_step
        a, b = curve.edges
        frozen = curve.frozen
        assert frozen.any()
        np.testing.assert_array_equal(a[frozen, 0], b[frozen, 0])
        assert np.all(b[frozen, 1] < a[frozen, 1])

    def test_outer_normals_exit(self, square_step):
        _, curve, _ = square_step
        rng = np.random.default_rng(0)
        picks = rng.choice(len(curve), size=200, replace=False)
        a, b = curve.edges
        d = (b - a)[picks] / curve.edge_lengths[picks, None]
        outward = 0.5 * (a + b)[picks] + (curve.chord_length / 100.0) * np.column_stack(
            [-d[:, 1], d[:, 0]]
        )
        assert np.all(classify_points(outward, curve.vertices) == 0)

    def test_registry(self, square_step):
        _, curve, registry = square_step
        assert registry.generations == (1,)
        entries = registry.entries(1)
        assert len(entries) == 4
        for entry in entries:
            assert entry.segment.normal.is_zero
            assert entry.half.length == pytest.approx(0.5 * entry.segment.length)

    def test_persistence_and_coverage(self, square_step):
        _, curve, registry = square_step
        checks = persistence_residuals(registry, curve)
        assert [c.generation for c in checks] == [1]
        assert all(c.ok for c in checks)
        coverage = frozen_coverage(registry, curve)
        assert float(coverage.min()) >= 0.9

    def test_registry_contains(self, square_step):
        _, _, registry = square_step
        block = registry.block(1)
        assert registry.contains(block.sample_points()[1::3]).all()
        off = block.a[:1] + np.array([[0.01, 0.0]])
        assert not registry.contains(off).any()

    def test_stats(self, square_step):
        prev, curve, _ = square_step
        stats = curve.stats
        assert stats.M == 3
        assert stats.depth == 1
        assert stats.nominal_segments == 16
        assert not stats.windowed
        assert stats.vertical_exact == pytest.approx(exact_vertical_ratio(prev, 3, 1))
        assert stats.vertical_tagged == pytest.approx(stats.vertical_exact, rel=1e-9)
        assert stats.closure_residual <= 1e-6 * curve.chord_length

    def test_proximity(self, square_step):
        prev, curve, _ = square_step
        check = boundary_proximity(prev, curve, 3)
        assert check.scale == pytest.approx(1.0 / 3.0)
        assert check.constant <= 10.0

    def test_registry_rejects_duplicate(self, square_step):
        _, _, registry = square_step
        with pytest.raises(InvalidInputError, match="already registered"):
            registry.with_block(registry.block(1))


class TestWindowed:
    """Local refinement around the tracked edge."""

    def test_frame_and_tracking(self, windowed_step):
        prev, window, curve, _ = windowed_step
        assert curve.frame.depth == 1
        assert curve.is_windowed
        assert curve.stats.windowed
        assert curve.tracked_edge is not None
        assert curve.normal_record(curve.tracked_edge).unit_vector == (0.0, 1.0)
        assert window.radius < prev.chord_length

    def test_far_edges_kept(self, windowed_step):
        prev, _, curve, _ = windowed_step
        kept = curve.edge_generation == 0
        assert int(kept.sum()) == 10
        moved = curve.frame.to_global(curve.vertices[kept])
        gaps = np.hypot(*(moved[:, None, :] - prev.vertices[None, :, :]).T).min(axis=0)
        assert float(gaps.max()) <= 1e-12

    def test_fine_runs_equal(self, windowed_step):
        _, _, curve, _ = windowed_step
        assert curve.fine_runs
        assert curve.chord_spread() <= 1e-9
        assert curve.max_chord_turn() <= math.pi * 2.0**-5

    def test_proximity(self, windowed_step):
        prev, _, curve, _ = windowed_step
        assert boundary_proximity(prev, curve, 3).constant <= 10.0

    def test_advance_windowed_matches(self, windowed_step):
        prev, window, curve, _ = windowed_step
        again = advance_windowed(prev, 3, window, depth=2)
        np.testing.assert_array_equal(again.vertices, curve.vertices)

    def test_window_missing_curve(self):
        prev = initial_polygon(6, 1.0)
        curve, registry = advance(prev, 2, window=Ball(Point(100.0, 100.0), 0.1), depth=1)
        assert curve.generation == 1
        np.testing.assert_array_equal(curve.vertices, prev.vertices)
        assert len(registry.block(1)) == 0


class TestFrame:
    def test_round_trip(self):
        frame = Frame().child((1.0, 2.0)).child((0.5, -0.25))
        pts = np.array([[0.0, 0.0], [1.0, 1.0]])
        back = Frame().map_to(frame.to_global(pts), frame)
        np.testing.assert_allclose(back, pts, atol=1e-15)
        assert frame.depth == 2

    def test_registry_empty(self):
        registry = FrozenRegistry()
        assert len(registry) == 0
        assert not registry.contains(np.zeros((3, 2))).any()
