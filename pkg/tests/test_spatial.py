"""Tests for the edge index used by walks and scans."""

import numpy as np
import pytest

from frozenflake.errors import InvalidInputError
from frozenflake.fixtures import circle, square
from frozenflake.geometry import segment_distances
from frozenflake.spatial import SpatialIndex


def _brute_force(points, a, b):
    d = segment_distances(points[:, None, :], a[None, :, :], b[None, :, :])
    return d.min(axis=1), d.argmin(axis=1)


class TestNearest:
    """Exact nearest-edge queries."""

    def test_matches_brute_force_on_circle(self):
        curve = circle(1.0, 512)
        a, b = curve.edges
        rng = np.random.default_rng(11)
        points = rng.uniform(-1.5, 1.5, size=(500, 2))
        dist, edge, foot = SpatialIndex(a, b).nearest(points)
        expected, _ = _brute_force(points, a, b)
        np.testing.assert_allclose(dist, expected, rtol=0, atol=1e-12)
        np.testing.assert_allclose(np.hypot(*(points - foot).T), dist, atol=1e-12)
        assert edge.min() >= 0

    def test_mixed_edge_lengths(self):
        a = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 0.01]])
        b = np.array([[10.0, 0.0], [10.0, 0.01], [0.0, 0.01]])
        points = np.array([[5.0, 3.0], [10.5, 0.005], [0.0, -1.0]])
        dist, edge, _ = SpatialIndex(a, b).nearest(points)
        expected, expected_edge = _brute_force(points, a, b)
        np.testing.assert_allclose(dist, expected, atol=1e-12)
        assert edge[1] == expected_edge[1] == 1

    def test_bounds_bracket_distance(self):
        curve = square(2.0, spacing=1.0 / 16.0)
        index = SpatialIndex(*curve.edges)
        points = np.random.default_rng(5).uniform(-2, 2, size=(200, 2))
        lower, upper = index.distance_bounds(points)
        exact = index.distance(points)
        assert np.all(lower <= exact + 1e-12)
        assert np.all(exact <= upper + 1e-12)


def test_edges_near_matches_segment_distances():
    curve = circle(1.0, 256)
    a, b = curve.edges
    index = SpatialIndex(a, b)
    found = index.edges_near((1.0, 0.0), 0.1)
    expected = np.flatnonzero(segment_distances(np.array([1.0, 0.0]), a, b) <= 0.1)
    np.testing.assert_array_equal(found, expected)


def test_edges_near_far_away_is_empty():
    index = SpatialIndex(*circle(1.0, 64).edges)
    assert len(index.edges_near((10.0, 10.0), 0.5)) == 0


class TestCrossingPairs:
    """Simplicity check through the index."""

    def test_simple_polygon_has_none(self):
        index = SpatialIndex(*circle(1.0, 300).edges)
        assert len(index.crossing_pairs()) == 0

    def test_detects_crossing(self):
        v = np.array([(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)])
        index = SpatialIndex(v, np.roll(v, -1, axis=0))
        pairs = index.crossing_pairs()
        assert [tuple(p) for p in pairs] == [(0, 2)]


def test_rejects_mismatched_arrays():
    with pytest.raises(InvalidInputError, match="matching"):
        SpatialIndex(np.zeros((3, 2)), np.zeros((2, 2)))


def test_empty_rejected():
    with pytest.raises(InvalidInputError):
        SpatialIndex(np.zeros((0, 2)), np.zeros((0, 2)))
