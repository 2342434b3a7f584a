"""
Reference curves for tests, demos and the command line.

Closed fixtures are clockwise polygons whose sides are subdivided into
pieces no longer than ``spacing``, so that their vertices sample the curve
densely and the resolution of scans is ``spacing``. ``figure1`` and
``figure2`` are open Gamma curves of the horizontal unit segment with outer
normal (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import TYPE_CHECKING, Callable

import numpy as np

from frozenflake.errors import InvalidInputError, InvalidParameterError
from frozenflake.geometry import AngleRecord, OrientedSegment, Point
from frozenflake.refine import GenerationCurve, polygon_curve
from frozenflake.snowflake import GeneratorParams, generate_gamma, replace_segment


if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


DEFAULT_SPACING = 1.0 / 512.0


@dataclass(frozen=True, eq=False)
class Fixture:
    """A named polyline with per-edge frozen tags."""

    name: str
    vertices: NDArray[np.float64]
    closed: bool = True
    frozen: NDArray[np.bool_] = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def edge_count(self) -> int:
        return len(self.vertices) if self.closed else len(self.vertices) - 1

    def curve(self) -> GenerationCurve:
        """The fixture as a generation-0 curve (closed fixtures only)."""
        if not self.closed:
            raise InvalidInputError(f"fixture {self.name!r} is an open curve")
        curve = polygon_curve(self.vertices)
        if self.frozen.any():
            curve = replace(curve, frozen=self.frozen.copy())
        return curve


def subdivide(corners: ArrayLike, spacing: float, *, closed: bool = True) -> NDArray[np.float64]:
    """Insert evenly spaced vertices so that no side is longer than ``spacing``."""
    c = np.asarray(corners, dtype=np.float64)
    if not spacing > 0:
        raise InvalidParameterError(f"spacing must be positive, got {spacing}")
    a = c if closed else c[:-1]
    b = np.roll(c, -1, axis=0) if closed else c[1:]
    parts = []
    for p, q in zip(a, b):
        k = max(1, math.ceil(float(np.hypot(*(q - p))) / spacing))
        t = np.arange(k)[:, None] / k
        parts.append(p + t * (q - p))
    if not closed:
        parts.append(c[-1:])
    return np.vstack(parts)


# --- Closed fixtures ---


def rectangle(width: float, height: float, *, spacing: float = DEFAULT_SPACING) -> GenerationCurve:
    """Rectangle whose top side is [(-w/2, 0), (w/2, 0)] with outer normal (0, 1)."""
    if not (width > 0 and height > 0):
        raise InvalidParameterError(f"need positive sides, got {width} x {height}")
    w = 0.5 * width
    corners = [(-w, 0.0), (w, 0.0), (w, -height), (-w, -height)]
    return polygon_curve(subdivide(corners, spacing))


def line(
    length: float = 4.0, height: float = 1.0, *, spacing: float = DEFAULT_SPACING
) -> GenerationCurve:
    """A long flat side: balls centered on the top side away from the corners meet only it."""
    return rectangle(length, height, spacing=spacing)


def strip(
    length: float = 10.0, width: float = 1.0, *, spacing: float = 1.0 / 64.0
) -> GenerationCurve:
    """Long thin rectangle; near one long side it looks like a half-plane."""
    return rectangle(length, width, spacing=spacing)


def square(side: float = 2.0, *, spacing: float = DEFAULT_SPACING) -> GenerationCurve:
    """Axis-aligned square centered at the origin."""
    h = 0.5 * side
    corners = [(-h, h), (h, h), (h, -h), (-h, -h)]
    return polygon_curve(subdivide(corners, spacing))


def circle(radius: float = 1.0, sides: int = 4096) -> GenerationCurve:
    """Regular polygon inscribed in the circle of the given radius, clockwise."""
    if sides < 3:
        raise InvalidParameterError(f"need at least 3 sides, got {sides}")
    theta = -2.0 * math.pi * np.arange(sides) / sides
    return polygon_curve(radius * np.column_stack([np.cos(theta), np.sin(theta)]))


def disk(radius: float = 1.0, sides: int = 1024) -> GenerationCurve:
    """Coarser circle for random walks."""
    return circle(radius, sides)


def wedge(
    beta: float = math.pi / 3, arm: float = 1.0, *, spacing: float = DEFAULT_SPACING
) -> GenerationCurve:
    """
    Corner at the origin between two rays at angle pi - beta.

    The rays rise at angle beta / 2 on either side; the domain lies above
    them and is closed off by vertical sides and a top at height ``arm``.
    """
    if not 0 < beta < math.pi:
        raise InvalidParameterError(f"beta must lie in (0, pi), got {beta}")
    cx, cy = arm * math.cos(beta / 2), arm * math.sin(beta / 2)
    corners = [(0.0, 0.0), (-cx, cy), (-cx, arm + cy), (cx, arm + cy), (cx, cy)]
    return polygon_curve(subdivide(corners, spacing))


def frozen_box(side: float = 2.0, *, spacing: float = 1.0 / 64.0) -> GenerationCurve:
    """Square with every edge tagged frozen."""
    curve = square(side, spacing=spacing)
    frozen = np.ones(len(curve), dtype=bool)
    return Fixture("frozen_box", curve.vertices, True, frozen).curve()


# --- Open fixtures ---


def _horizontal_unit() -> OrientedSegment:
    return OrientedSegment(Point(0.0, 0.0), Point(1.0, 0.0), AngleRecord.from_turns(Fraction(1, 4)))


def figure1(alpha: float = math.pi / 6) -> Fixture:
    """One replacement step of the horizontal unit segment: four segments."""
    children = replace_segment(_horizontal_unit(), alpha)
    vertices = np.array([[s.a.x, s.a.y] for s in children] + [[children[-1].b.x, children[-1].b.y]])
    frozen = np.array([s.normal.is_zero for s in children])
    return Fixture("figure1", vertices, closed=False, frozen=frozen)


def figure2(M: int = 2) -> Fixture:
    """Gamma curve of the horizontal unit segment at full depth M^2."""
    g = generate_gamma(GeneratorParams(M=M, source=_horizontal_unit()), keep_codings=False)
    return Fixture("figure2", g.vertices, closed=False, frozen=g.frozen.copy())


def _closed(name: str, factory: Callable[[], GenerationCurve]) -> Callable[[], Fixture]:
    def build() -> Fixture:
        curve = factory()
        return Fixture(name, np.array(curve.vertices), True, np.array(curve.frozen))

    return build


FIXTURES: dict[str, Callable[[], Fixture]] = {
    "line": _closed("line", line),
    "circle": _closed("circle", circle),
    "disk": _closed("disk", disk),
    "wedge": _closed("wedge", wedge),
    "square": _closed("square", square),
    "strip": _closed("strip", strip),
    "figure1": figure1,
    "figure2": figure2,
}


def get_fixture(name: str) -> Fixture:
    """Look up a fixture by name."""
    try:
        return FIXTURES[name]()
    except KeyError:
        raise InvalidInputError(
            f"unknown fixture {name!r}; choose from {', '.join(sorted(FIXTURES))}"
        ) from None


__all__ = [
    "DEFAULT_SPACING",
    "FIXTURES",
    "Fixture",
    "circle",
    "disk",
    "figure1",
    "figure2",
    "frozen_box",
    "get_fixture",
    "line",
    "rectangle",
    "square",
    "strip",
    "subdivide",
    "wedge",
]
