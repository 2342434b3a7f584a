"""Tests for the planar primitives and the orientation convention."""

import math
from fractions import Fraction

import numpy as np
import pytest

from frozenflake.errors import DegenerateInputError, InvalidInputError
from frozenflake.geometry import (
    AngleRecord,
    Arc,
    Ball,
    ClosedPolyline,
    OrientedSegment,
    Point,
    best_fit_line,
    clipped_lengths,
    distance_point_segment,
    flatness_against,
    normal_angle_of,
    point_in_polygon,
    reduce_angle,
)


SQUARE = np.array([(-1.0, 1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)])


def _diameter(angle: float, count: int = 2001) -> np.ndarray:
    s = np.linspace(-1.0, 1.0, count)
    return np.column_stack([s * math.cos(angle), s * math.sin(angle)])


class TestNormalAngle:
    """Outer normal of clockwise edges."""

    def test_downward_edge_is_vertical(self):
        record = normal_angle_of((0.0, -1.0))
        assert record.angle == 0.0
        assert record.is_zero
        assert record.unit_vector == (1.0, 0.0)

    def test_horizontal_edge_points_up(self):
        record = normal_angle_of((1.0, 0.0))
        assert record.angle == math.pi / 2
        assert record.unit_vector == (0.0, 1.0)

    @pytest.mark.parametrize("direction", [(-1.0, 0.0), (0.3, 0.7), (-2.0, -5.0)])
    def test_normal_is_perpendicular(self, direction):
        nx, ny = normal_angle_of(direction).unit_vector
        tx, ty = direction
        assert abs(nx * tx + ny * ty) <= 1e-12 * math.hypot(tx, ty)

    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidInputError, match="nonzero"):
            normal_angle_of((0.0, 0.0))

    def test_reduce_angle_range(self):
        assert reduce_angle(-math.pi) == math.pi
        assert reduce_angle(3 * math.pi) == pytest.approx(math.pi)


class TestAngleRecord:
    """Integer freeze test on rotation counts."""

    def test_principal_zero(self):
        root = AngleRecord.from_turns(Fraction(1, 4)).subdivided(2)
        assert not root.rotated(-1).is_zero
        assert root.rotated(-2).is_zero
        assert not root.rotated(-2).wrapped

    def test_wrap_around_zero(self):
        root = AngleRecord.from_turns(Fraction(1, 2)).subdivided(2)
        record = root.rotated(2)
        assert record.is_zero
        assert record.wrapped

    def test_subdivided_rejects_zero_divisions(self):
        with pytest.raises(InvalidInputError):
            AngleRecord.from_turns(Fraction(1, 4)).subdivided(0)

    def test_step_is_alpha(self):
        root = AngleRecord.from_turns(Fraction(1, 4)).subdivided(3)
        assert root.step == pytest.approx(math.pi / 6)
        assert root.rotated(1).angle == pytest.approx(math.pi / 2 + math.pi / 6)


def test_distance_point_segment_examples():
    """Perpendicular foot, endpoint case and on-segment points."""
    seg = OrientedSegment.between((-1.0, 0.0), (1.0, 0.0))
    assert distance_point_segment((0.0, 1.0), seg) == 1.0
    assert distance_point_segment((2.0, 1.0), seg) == pytest.approx(math.sqrt(2.0))
    assert distance_point_segment((0.25, 0.0), seg) == 0.0


def test_segment_rejects_coincident_endpoints():
    with pytest.raises(InvalidInputError, match="coincide"):
        OrientedSegment.between((1.0, 1.0), (1.0, 1.0))


def test_point_rejects_nan():
    with pytest.raises(InvalidInputError):
        Point(float("nan"), 0.0)


class TestClosedPolyline:
    """Closed clockwise polylines."""

    def test_clockwise_square(self):
        poly = ClosedPolyline(SQUARE)
        assert poly.signed_area == pytest.approx(-4.0)
        assert poly.is_clockwise
        assert poly.length == pytest.approx(8.0)
        assert poly.diameter == pytest.approx(2.0 * math.sqrt(2.0))
        assert poly.is_simple()

    def test_bowtie_is_not_simple(self):
        poly = ClosedPolyline(np.array([(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]))
        assert not poly.is_simple()

    def test_zero_length_edge_rejected(self):
        with pytest.raises(InvalidInputError, match="zero-length"):
            ClosedPolyline(np.array([(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]))

    def test_outer_normals_exit(self):
        poly = ClosedPolyline(SQUARE)
        for seg in poly.segments():
            assert seg.normal_error <= 1e-9
            nx, ny = seg.normal.unit_vector
            m = seg.midpoint
            outward = (m.x + 0.01 * nx, m.y + 0.01 * ny)
            assert point_in_polygon(outward, poly) == "outside"


class TestPointInPolygon:
    """Crossing-number classification with a boundary band."""

    def test_centroid_inside(self):
        assert point_in_polygon((0.0, 0.0), ClosedPolyline(SQUARE)) == "inside"

    def test_far_point_outside(self):
        assert point_in_polygon((6.0, 6.0), ClosedPolyline(SQUARE)) == "outside"

    def test_vertex_on_boundary(self):
        assert point_in_polygon((1.0, -1.0), ClosedPolyline(SQUARE)) == "boundary"

    def test_tolerance_band(self):
        poly = ClosedPolyline(SQUARE)
        assert poly.classify((1.0 + 1e-4, 0.0), tol=1e-3) == "boundary"
        assert poly.classify((1.0 + 1e-4, 0.0)) == "outside"


def test_arc_from_tangent_quarter_turn():
    """A unit quarter arc turning left ends at (1, 1) heading up."""
    arc = Arc.from_tangent((0.0, 0.0), (1.0, 0.0), 1.0, math.pi / 2)
    assert arc.length == pytest.approx(math.pi / 2)
    assert arc.end.x == pytest.approx(1.0)
    assert arc.end.y == pytest.approx(1.0)
    tx, ty = arc.tangent_at(arc.length)
    assert tx == pytest.approx(0.0, abs=1e-12)
    assert ty == pytest.approx(1.0)


def test_arc_rejects_half_turn():
    with pytest.raises(InvalidInputError, match="sweep"):
        Arc.from_tangent((0.0, 0.0), (1.0, 0.0), 1.0, math.pi)


def test_clipped_lengths():
    a = np.array([[-2.0, 0.0], [-2.0, 5.0]])
    b = np.array([[2.0, 0.0], [2.0, 5.0]])
    np.testing.assert_allclose(clipped_lengths(a, b, (0.0, 0.0), 1.0), [2.0, 0.0])


def test_ball_contains():
    ball = Ball(Point(0.0, 0.0), 1.0)
    assert ball.contains((0.6, 0.7))
    assert not ball.contains((1.0, 1.0))
    assert ball.scaled(2.0).contains((1.0, 1.0))


class TestBestFitLine:
    """Two-sided flatness minimization."""

    def test_collinear_points(self):
        xs = np.linspace(-1.0, 1.0, 2001)
        fit = best_fit_line(np.column_stack([xs, 0 * xs]), ((0.0, 0.0), 1.0))
        assert fit.deviation <= 1e-9
        assert min(fit.angle, math.pi - fit.angle) <= 1e-6

    @pytest.mark.parametrize("beta", [0.2, 0.7, 1.3])
    def test_rotated_diameter(self, beta):
        points = _diameter(beta)
        fit = best_fit_line(points, ((0.0, 0.0), 1.0))
        assert fit.deviation <= 2e-3
        assert abs(math.sin(fit.angle - beta)) <= 2e-3

    @pytest.mark.parametrize("beta", [0.2, 0.7, 1.3])
    def test_against_horizontal(self, beta):
        d = flatness_against(_diameter(beta), ((0.0, 0.0), 1.0), (0.0, 0.0))
        assert d == pytest.approx(math.sin(beta), abs=2e-3)

    def test_rotation_equivariance(self):
        theta = 0.4
        rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        xs = np.linspace(-1.0, 1.0, 2001)
        points = np.column_stack([xs, 0.1 * xs * xs])
        fit = best_fit_line(points, ((0.0, 0.0), 1.0))
        turned = best_fit_line(points @ rot.T, ((0.0, 0.0), 1.0))
        assert turned.deviation == pytest.approx(fit.deviation, abs=1e-3)
        assert abs(math.sin(turned.angle - fit.angle - theta)) <= 1e-3

    def test_deviation_in_unit_interval(self):
        rng = np.random.default_rng(3)
        fit = best_fit_line(rng.uniform(-1, 1, size=(400, 2)), ((0.0, 0.0), 1.0))
        assert 0.0 <= fit.deviation <= 1.0

    def test_needs_two_points(self):
        with pytest.raises(DegenerateInputError, match="at least 2"):
            best_fit_line(np.array([[0.0, 0.0], [5.0, 5.0]]), ((0.0, 0.0), 1.0))
