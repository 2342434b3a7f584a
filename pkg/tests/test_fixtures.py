"""Tests for the reference curves."""

import math

import numpy as np
import pytest

from frozenflake.errors import InvalidInputError, InvalidParameterError
from frozenflake.fixtures import (
    FIXTURES,
    circle,
    figure1,
    figure2,
    frozen_box,
    get_fixture,
    rectangle,
    subdivide,
    wedge,
)


def test_figure1_has_four_segments():
    fixture = figure1()
    assert not fixture.closed
    assert fixture.edge_count == 4
    np.testing.assert_allclose(fixture.vertices[2], [0.5, 0.1339746], atol=1e-7)
    assert not fixture.frozen.any()


def test_figure2_full_depth():
    fixture = figure2()
    assert fixture.edge_count == 256
    assert int(fixture.frozen.sum()) == 46
    np.testing.assert_allclose(fixture.vertices[-1], [1.0, 0.0], atol=1e-12)


def test_open_fixture_has_no_curve():
    with pytest.raises(InvalidInputError, match="open curve"):
        figure1().curve()


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_every_fixture_builds(name):
    fixture = get_fixture(name)
    assert fixture.name == name
    assert len(fixture.vertices) >= 4
    if fixture.closed:
        curve = fixture.curve()
        assert curve.polyline.is_clockwise
        assert curve.polyline.is_simple()


def test_unknown_fixture():
    with pytest.raises(InvalidInputError, match="unknown fixture"):
        get_fixture("teapot")


class TestClosedFixtures:
    def test_rectangle_top_side(self):
        curve = rectangle(4.0, 1.0, spacing=0.5)
        top = curve.vertices[np.isclose(curve.vertices[:, 1], 0.0)]
        assert top[:, 0].min() == -2.0
        assert top[:, 0].max() == 2.0
        assert curve.edge_lengths.max() <= 0.5 + 1e-12

    def test_circle_is_inscribed(self):
        curve = circle(2.0, 64)
        np.testing.assert_allclose(np.hypot(*curve.vertices.T), 2.0)
        assert curve.polyline.length == pytest.approx(2 * 64 * 2.0 * math.sin(math.pi / 64))

    def test_wedge_corner_at_origin(self):
        curve = wedge(math.pi / 3)
        assert np.any(np.all(curve.vertices == 0.0, axis=1))
        assert curve.polyline.is_clockwise

    def test_wedge_rejects_flat_angle(self):
        with pytest.raises(InvalidParameterError, match="beta"):
            wedge(math.pi)

    def test_frozen_box_is_all_frozen(self):
        curve = frozen_box()
        assert curve.frozen.all()
        assert len(curve.frozen_edges) == len(curve)

    def test_subdivide_open(self):
        pts = subdivide([(0.0, 0.0), (1.0, 0.0)], 0.25, closed=False)
        np.testing.assert_allclose(pts[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_subdivide_rejects_spacing(self):
        with pytest.raises(InvalidParameterError, match="spacing"):
            subdivide([(0.0, 0.0), (1.0, 0.0)], 0.0)
