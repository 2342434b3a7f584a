"""
Planar primitives shared by every stage of the construction.

Conventions:
    Closed curves are stored clockwise, so their signed area is negative.
    The outer unit normal of an edge with unit tangent (tx, ty) is
    (-ty, tx): the edge [(0, 0), (1, 0)] of a clockwise curve has outer
    normal (0, 1) and the domain lies below it.

Scalar helpers take :class:`Point`-like values; the ``*_many`` style helpers
(``segment_distances``, ``classify_points``, ``clipped_lengths``) work on
``(n, 2)`` arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import TYPE_CHECKING, Literal, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from frozenflake.errors import DegenerateInputError, InvalidInputError


if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray

    PointLike = Union["Point", tuple[float, float], Sequence[float], NDArray[np.float64]]
    BallLike = Union["Ball", tuple[PointLike, float]]


TAU = 2.0 * math.pi

Side = Literal["inside", "outside", "boundary"]


# --- Angles ---


def reduce_angle(theta: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    theta = math.remainder(theta, TAU)
    if theta <= -math.pi:
        theta += TAU
    return theta


def reduce_turns(turns: Fraction) -> Fraction:
    """Reduce a rational number of turns into (-1/2, 1/2]."""
    turns = turns - math.floor(turns)
    if turns > Fraction(1, 2):
        turns -= 1
    return turns


_AXIS_VECTORS = {
    Fraction(0): (1.0, 0.0),
    Fraction(1, 4): (0.0, 1.0),
    Fraction(1, 2): (-1.0, 0.0),
    Fraction(-1, 4): (0.0, -1.0),
}


@dataclass(frozen=True)
class AngleRecord:
    """Outer-normal angle of an edge, kept as ``base + count * step``.

    ``base`` is the angle gamma in (-pi, pi] of the edge a lineage started
    from, ``step`` is alpha = |gamma| / ``divisions`` and ``count`` the signed
    number of alpha rotations applied since. ``turns`` carries gamma / 2pi
    exactly when it is known, which makes wrap-around zero tests exact.
    """

    base: float
    step: float = 0.0
    count: int = 0
    divisions: int = 1
    turns: Fraction | None = None

    @classmethod
    def vertical(cls) -> AngleRecord:
        """Record of the frozen normal (1, 0)."""
        return cls(base=0.0, turns=Fraction(0))

    @classmethod
    def from_turns(cls, turns: Fraction) -> AngleRecord:
        turns = reduce_turns(Fraction(turns))
        return cls(base=float(TAU * turns), turns=turns)

    @property
    def sign(self) -> int:
        """Sign of the base angle; rotations count in units of sign * alpha."""
        if self.turns is not None:
            return (self.turns > 0) - (self.turns < 0)
        return (self.base > 0) - (self.base < 0)

    @property
    def exact_turns(self) -> Fraction | None:
        """Represented angle in turns, if the base is known exactly."""
        if self.turns is None:
            return None
        scaled = self.turns * (self.divisions + self.sign * self.count) / self.divisions
        return reduce_turns(scaled)

    @property
    def angle(self) -> float:
        """Represented angle reduced into (-pi, pi]."""
        exact = self.exact_turns
        if exact is not None:
            return float(TAU * exact)
        return reduce_angle(self.base + self.count * self.step)

    @property
    def is_zero(self) -> bool:
        """Whether the represented normal is (1, 0), decided on integers only."""
        sign = self.sign
        if sign == 0:
            return True
        if self.count * sign == -self.divisions:
            return True
        exact = self.exact_turns
        return exact is not None and exact == 0

    @property
    def wrapped(self) -> bool:
        """Zero reached through a full turn rather than the principal count."""
        return self.is_zero and self.sign != 0 and self.count * self.sign != -self.divisions

    @property
    def unit_vector(self) -> tuple[float, float]:
        exact = self.exact_turns
        if exact is not None and exact in _AXIS_VECTORS:
            return _AXIS_VECTORS[exact]
        theta = self.angle
        return (math.cos(theta), math.sin(theta))

    def rotated(self, steps: int) -> AngleRecord:
        """Apply ``steps`` rotations by alpha."""
        return replace(self, count=self.count + steps)

    def subdivided(self, divisions: int) -> AngleRecord:
        """Start a new lineage at this angle with alpha = |angle| / divisions."""
        if divisions < 1:
            raise InvalidInputError(f"divisions must be >= 1, got {divisions}")
        exact = self.exact_turns
        theta = self.angle
        return AngleRecord(
            base=theta,
            step=abs(theta) / divisions,
            count=0,
            divisions=divisions,
            turns=exact,
        )


def normal_angle_of(direction: PointLike) -> AngleRecord:
    """
    Outer-normal angle of a clockwise edge with the given tangent direction.

    Axis-aligned directions get exact turns, so the freeze test on them is
    exact.

    Args:
        direction: Nonzero tangent vector (need not be unit length).

    Returns:
        AngleRecord with base gamma in (-pi, pi].

    Raises:
        InvalidInputError: If the vector is zero or not finite.

    Example:
        >>> normal_angle_of((1.0, 0.0)).angle == math.pi / 2
        True
    """
    tx, ty = _xy(direction)
    if not (math.isfinite(tx) and math.isfinite(ty)) or (tx == 0.0 and ty == 0.0):
        raise InvalidInputError(f"direction must be a nonzero finite vector, got ({tx}, {ty})")
    nx, ny = -ty, tx
    if ny == 0.0:
        return AngleRecord.from_turns(Fraction(0) if nx > 0 else Fraction(1, 2))
    if nx == 0.0:
        return AngleRecord.from_turns(Fraction(1, 4) if ny > 0 else Fraction(-1, 4))
    return AngleRecord(base=reduce_angle(math.atan2(ny, nx)))


# --- Value types ---


@dataclass(frozen=True)
class Point:
    """A point of the plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInputError(f"point must be finite, got ({self.x}, {self.y})")

    @classmethod
    def of(cls, value: PointLike) -> Point:
        if isinstance(value, Point):
            return value
        x, y = _xy(value)
        return cls(x, y)

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y], dtype=np.float64)

    def distance_to(self, other: PointLike) -> float:
        ox, oy = _xy(other)
        return math.hypot(self.x - ox, self.y - oy)


@dataclass(frozen=True)
class Ball:
    """Closed disk B(center, radius)."""

    center: Point
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidInputError(f"ball radius must be positive, got {self.radius}")

    @classmethod
    def of(cls, value: BallLike) -> Ball:
        if isinstance(value, Ball):
            return value
        center, radius = value
        return cls(Point.of(center), float(radius))

    def contains(self, p: PointLike, *, slack: float = 0.0) -> bool:
        return self.center.distance_to(p) <= self.radius * (1.0 + slack)

    def scaled(self, factor: float) -> Ball:
        return Ball(self.center, self.radius * factor)

    def meets_segments(
        self, a: NDArray[np.float64], b: NDArray[np.float64]
    ) -> NDArray[np.bool_]:
        """Mask of segments [a_i, b_i] that intersect the ball."""
        return segment_distances(self.center.as_array(), a, b) <= self.radius


@dataclass(frozen=True)
class OrientedSegment:
    """A boundary edge from ``a`` to ``b`` with its outer-normal angle record."""

    a: Point
    b: Point
    normal: AngleRecord

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise InvalidInputError(f"segment endpoints coincide at ({self.a.x}, {self.a.y})")

    @classmethod
    def between(
        cls, a: PointLike, b: PointLike, normal: AngleRecord | None = None
    ) -> OrientedSegment:
        """Build a segment, deriving the normal record from its direction if not given."""
        pa, pb = Point.of(a), Point.of(b)
        if normal is None:
            normal = normal_angle_of((pb.x - pa.x, pb.y - pa.y))
        return cls(pa, pb, normal)

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)

    @property
    def direction(self) -> tuple[float, float]:
        length = self.length
        return ((self.b.x - self.a.x) / length, (self.b.y - self.a.y) / length)

    @property
    def midpoint(self) -> Point:
        return Point(0.5 * (self.a.x + self.b.x), 0.5 * (self.a.y + self.b.y))

    @property
    def outer_normal(self) -> tuple[float, float]:
        """Geometric outer normal (-ty, tx)."""
        tx, ty = self.direction
        return (-ty, tx)

    @property
    def normal_error(self) -> float:
        """Angle in radians between the recorded normal and the geometric one."""
        gx, gy = self.outer_normal
        rx, ry = self.normal.unit_vector
        return abs(math.atan2(gx * ry - gy * rx, gx * rx + gy * ry))

    def point_at(self, t: float) -> Point:
        return Point(self.a.x + t * (self.b.x - self.a.x), self.a.y + t * (self.b.y - self.a.y))


@dataclass(frozen=True)
class Arc:
    """Circular arc with sweep in (0, pi)."""

    center: Point
    radius: float
    start_angle: float
    end_angle: float
    clockwise: bool

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidInputError(f"arc radius must be positive, got {self.radius}")
        if not 0.0 < self.sweep < math.pi:
            raise InvalidInputError(f"arc sweep must lie in (0, pi), got {self.sweep}")

    @classmethod
    def from_tangent(
        cls, start: PointLike, tangent: PointLike, curvature: float, length: float
    ) -> Arc:
        """Arc leaving ``start`` along unit ``tangent`` with signed curvature.

        Positive curvature turns counterclockwise.
        """
        sx, sy = _xy(start)
        ux, uy = _xy(tangent)
        if curvature == 0.0:
            raise InvalidInputError("curvature must be nonzero for an arc")
        rho = 1.0 / curvature
        cx, cy = sx - rho * uy, sy + rho * ux
        start_angle = math.atan2(sy - cy, sx - cx)
        return cls(
            center=Point(cx, cy),
            radius=abs(rho),
            start_angle=start_angle,
            end_angle=start_angle + curvature * length,
            clockwise=curvature < 0,
        )

    @property
    def sweep(self) -> float:
        delta = self.end_angle - self.start_angle
        if self.clockwise:
            delta = -delta
        return delta % TAU

    @property
    def length(self) -> float:
        return self.radius * self.sweep

    @property
    def curvature(self) -> float:
        return (-1.0 if self.clockwise else 1.0) / self.radius

    def point_at(self, s: float) -> Point:
        """Point at arc length ``s`` from the start."""
        theta = self.start_angle + self.curvature * s
        return Point(
            self.center.x + self.radius * math.cos(theta),
            self.center.y + self.radius * math.sin(theta),
        )

    def tangent_at(self, s: float) -> tuple[float, float]:
        theta = self.start_angle + self.curvature * s
        sign = -1.0 if self.clockwise else 1.0
        return (-sign * math.sin(theta), sign * math.cos(theta))

    @property
    def start(self) -> Point:
        return self.point_at(0.0)

    @property
    def end(self) -> Point:
        return self.point_at(self.length)


@dataclass(frozen=True, eq=False)
class ClosedPolyline:
    """Closed polygonal curve; the closing edge from the last vertex to the first is implied."""

    vertices: NDArray[np.float64]

    def __post_init__(self) -> None:
        vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
            raise InvalidInputError(f"need an (n >= 3, 2) vertex array, got {vertices.shape}")
        if not np.all(np.isfinite(vertices)):
            raise InvalidInputError("vertices must be finite")
        a, b = vertices, np.roll(vertices, -1, axis=0)
        if np.any(np.all(a == b, axis=1)):
            raise InvalidInputError("polyline has a zero-length edge")
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Edge start and end arrays, each ``(n, 2)``."""
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    @property
    def edge_lengths(self) -> NDArray[np.float64]:
        a, b = self.edges
        return np.hypot(*(b - a).T)

    @property
    def length(self) -> float:
        return float(self.edge_lengths.sum())

    @property
    def signed_area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def is_clockwise(self) -> bool:
        return self.signed_area < 0

    @property
    def diameter(self) -> float:
        return point_set_diameter(self.vertices)

    def segments(self) -> list[OrientedSegment]:
        a, b = self.edges
        return [OrientedSegment.between(p, q) for p, q in zip(a, b)]

    def is_simple(self) -> bool:
        """True if no two non-adjacent edges intersect."""
        from frozenflake.spatial import SpatialIndex

        a, b = self.edges
        return len(SpatialIndex(a, b).crossing_pairs(closed=True)) == 0

    def classify(self, p: PointLike, tol: float | None = None) -> Side:
        return point_in_polygon(p, self, tol)


# --- Distances ---


def project_onto_segments(
    points: ArrayLike, a: ArrayLike, b: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """
    Project points onto segments, broadcasting over leading dimensions.

    Returns:
        ``(t, foot, distance)`` where ``t`` in [0, 1] is the parameter of the
        closest point ``foot = a + t (b - a)``.
    """
    p = np.asarray(points, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ab = b - a
    ap = p - a
    denom = np.einsum("...i,...i->...", ab, ab)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.einsum("...i,...i->...", ap, ab) / denom
    t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
    foot = a + t[..., None] * ab
    diff = p - foot
    return t, foot, np.hypot(diff[..., 0], diff[..., 1])


def segment_distances(points: ArrayLike, a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """Euclidean distances from points to closed segments (broadcasting)."""
    return project_onto_segments(points, a, b)[2]


def distance_point_segment(p: PointLike, s: OrientedSegment) -> float:
    """
    Distance from ``p`` to the closed segment ``s``.

    Example:
        >>> seg = OrientedSegment.between((-1, 0), (1, 0))
        >>> distance_point_segment((0, 1), seg)
        1.0
    """
    x, y = _xy(p)
    d = segment_distances(np.array([x, y]), s.a.as_array(), s.b.as_array())
    return float(d)


def clipped_lengths(
    a: NDArray[np.float64], b: NDArray[np.float64], center: PointLike, radius: float
) -> NDArray[np.float64]:
    """Length of each segment [a_i, b_i] inside the closed disk (exact clipping)."""
    t0, t1 = _disk_parameters(a, b, center, radius)
    return np.maximum(t1 - t0, 0.0) * np.hypot(*(b - a).T)


def clip_segments(
    a: NDArray[np.float64], b: NDArray[np.float64], center: PointLike, radius: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Parts of the segments inside the disk; segments missing it are dropped."""
    t0, t1 = _disk_parameters(a, b, center, radius)
    keep = t1 > t0
    d = b - a
    return a[keep] + t0[keep, None] * d[keep], a[keep] + t1[keep, None] * d[keep]


def _disk_parameters(
    a: NDArray[np.float64], b: NDArray[np.float64], center: PointLike, radius: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    c = np.asarray(_xy(center))
    d = b - a
    f = a - c
    qa = np.einsum("ij,ij->i", d, d)
    qb = np.einsum("ij,ij->i", f, d)
    qc = np.einsum("ij,ij->i", f, f) - radius * radius
    disc = qb * qb - qa * qc
    root = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        t0 = (-qb - root) / qa
        t1 = (-qb + root) / qa
    miss = disc <= 0
    t0 = np.clip(np.where(miss, 1.0, t0), 0.0, 1.0)
    t1 = np.clip(np.where(miss, 0.0, t1), 0.0, 1.0)
    return t0, t1


def sample_segments(
    a: NDArray[np.float64], b: NDArray[np.float64], spacing: float
) -> NDArray[np.float64]:
    """Points along each segment at most ``spacing`` apart, endpoints included."""
    if len(a) == 0:
        return np.empty((0, 2))
    lengths = np.hypot(*(b - a).T)
    counts = np.maximum(np.ceil(lengths / spacing).astype(np.int64), 1) + 1
    owner = np.repeat(np.arange(len(a)), counts)
    starts = np.cumsum(counts) - counts
    k = np.arange(owner.size) - np.repeat(starts, counts)
    t = k / (counts[owner] - 1)
    return a[owner] + t[:, None] * (b - a)[owner]


def point_set_diameter(points: NDArray[np.float64]) -> float:
    """Largest distance between two points of the set."""
    pts = np.asarray(points, dtype=np.float64)
    try:
        hull = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        hull = pts
    if len(hull) > 4096:
        hull = hull[np.linspace(0, len(hull) - 1, 4096).astype(np.int64)]
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


# --- Point in polygon ---


def classify_points(
    points: ArrayLike, vertices: NDArray[np.float64], tol: float | ArrayLike | None = None
) -> NDArray[np.int8]:
    """
    Crossing-number classification of many points against a closed polygon.

    ``tol`` is one band half-width or one per point; the default is 1e-12 of
    the bounding box size.

    Returns:
        int8 array: 1 inside, 0 outside, -1 within ``tol`` of the boundary.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    v = np.asarray(vertices, dtype=np.float64)
    if tol is None:
        tol = 1e-12 * float(np.ptp(v, axis=0).max())
    band = np.broadcast_to(np.asarray(tol, dtype=np.float64), (len(pts),))
    a, b = v, np.roll(v, -1, axis=0)
    out = np.empty(len(pts), dtype=np.int8)
    chunk = max(1, 4_000_000 // len(v))
    for start in range(0, len(pts), chunk):
        p = pts[start : start + chunk, None, :]
        py, px = p[..., 1], p[..., 0]
        straddle = (a[:, 1] > py) != (b[:, 1] > py)
        with np.errstate(invalid="ignore", divide="ignore"):
            x_cross = a[:, 0] + (py - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
        crossings = np.count_nonzero(straddle & (px < x_cross), axis=1)
        dist = segment_distances(p, a, b).min(axis=1)
        side = (crossings % 2).astype(np.int8)
        side[dist <= band[start : start + chunk]] = -1
        out[start : start + chunk] = side
    return out


def point_in_polygon(p: PointLike, polygon: ClosedPolyline, tol: float | None = None) -> Side:
    """
    Classify ``p`` as inside, outside, or on the boundary of ``polygon``.

    Args:
        p: Query point.
        polygon: Simple closed polyline.
        tol: Boundary band half-width; defaults to 1e-12 of the bounding box size.
    """
    code = int(classify_points(np.array([_xy(p)]), polygon.vertices, tol)[0])
    return "boundary" if code < 0 else ("inside" if code else "outside")


# --- Best-fit lines ---


@dataclass(frozen=True)
class FitLine:
    """Line through ``ball`` with direction angle in [0, pi) and signed offset."""

    angle: float
    offset: float
    deviation: float
    ball: Ball

    @property
    def direction(self) -> tuple[float, float]:
        return (math.cos(self.angle), math.sin(self.angle))

    @property
    def normal(self) -> tuple[float, float]:
        """Unit normal (-sin, cos); the offset is measured along it."""
        return (-math.sin(self.angle), math.cos(self.angle))

    @property
    def point(self) -> Point:
        nx, ny = self.normal
        c = self.ball.center
        return Point(c.x + self.offset * nx, c.y + self.offset * ny)


def flatness_against(
    points: ArrayLike,
    ball: BallLike,
    line: FitLine | tuple[float, float],
    *,
    spacing_fraction: float = 1.0 / 500.0,
) -> float:
    """
    Two-sided flatness D_E(x, r, P) of sampled E against one line P.

    ``points`` is a dense sample of E near the ball; ``line`` is a FitLine or
    an ``(angle, offset)`` pair relative to the ball center.
    """
    ball = Ball.of(ball)
    angle, offset = (line.angle, line.offset) if isinstance(line, FitLine) else line
    problem = _FlatnessProblem(points, ball, spacing_fraction)
    return problem.deviation(float(angle), float(offset))


def best_fit_line(
    points: ArrayLike,
    ball: BallLike,
    *,
    angles: int = 180,
    offsets: int = 41,
    zoom_rounds: int = 2,
    spacing_fraction: float = 1.0 / 500.0,
) -> FitLine:
    """
    Line minimizing the two-sided flatness functional over E in a ball.

    D_E(x, r, P) = max(sup_{E in B} dist(y, P), sup_{P in B} dist(y, E)) / r,
    with E given by dense samples ``points``. Lines are searched on an
    ``angles x offsets`` grid (angles anchored at the principal axis of
    E in B, offsets in [-r, r]) and then on two 10x finer grids around the
    incumbent. The first sup is a lower bound of D, which prunes most lines
    before the second sup is evaluated.

    Args:
        points: ``(k, 2)`` samples of E; those outside the ball still count
            for distances from P.
        ball: ``Ball`` or ``(center, radius)``.

    Returns:
        FitLine with the achieved D in [0, 1].

    Raises:
        DegenerateInputError: If fewer than 2 points lie inside the ball.

    Example:
        >>> xs = np.linspace(-1, 1, 2001)
        >>> fit = best_fit_line(np.c_[xs, 0 * xs], ((0, 0), 1))
        >>> round(fit.deviation, 6)
        0.0
    """
    ball = Ball.of(ball)
    problem = _FlatnessProblem(points, ball, spacing_fraction)
    r = ball.radius

    anchor = problem.principal_angle()
    theta_step = math.pi / angles
    offset_step = 2 * r / (offsets - 1)
    thetas = anchor + theta_step * np.arange(angles)
    ts = np.linspace(-r, r, offsets)
    best = problem.search(thetas, ts, (math.inf, anchor, 0.0))
    for _ in range(zoom_rounds):
        _, theta0, t0 = best
        thetas = theta0 + np.linspace(-theta_step, theta_step, 21)
        ts = np.clip(t0 + np.linspace(-offset_step, offset_step, 21), -r, r)
        best = problem.search(thetas, np.unique(ts), best)
        theta_step /= 10
        offset_step /= 10

    value, theta, t = best
    theta = theta % (2 * math.pi)
    if theta >= math.pi:
        theta -= math.pi
        t = -t
    return FitLine(angle=theta, offset=t, deviation=min(value / r, 1.0), ball=ball)


class _FlatnessProblem:
    """Sampled E plus the machinery to score candidate lines."""

    def __init__(self, points: ArrayLike, ball: Ball, spacing_fraction: float) -> None:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        self.radius = ball.radius
        self.rel = pts - ball.center.as_array()
        dist = np.hypot(self.rel[:, 0], self.rel[:, 1])
        self.inside = self.rel[dist <= self.radius * (1.0 + 1e-12)]
        if len(self.inside) < 2:
            raise DegenerateInputError(
                f"need at least 2 points inside the ball, got {len(self.inside)}"
            )
        self.tree = cKDTree(self.rel)
        self.spacing = self.radius * spacing_fraction

    def principal_angle(self) -> float:
        centered = self.inside - self.inside.mean(axis=0)
        _, vectors = np.linalg.eigh(centered.T @ centered)
        vx, vy = vectors[:, -1]
        return math.atan2(vy, vx) % math.pi

    def _term1(self, thetas: NDArray[np.float64], ts: NDArray[np.float64]) -> NDArray[np.float64]:
        normals = np.stack([-np.sin(thetas), np.cos(thetas)], axis=1)
        q = normals @ self.inside.T
        qmax, qmin = q.max(axis=1), q.min(axis=1)
        return np.maximum(qmax[:, None] - ts[None, :], ts[None, :] - qmin[:, None])

    def _chord(self, theta: float, t: float, spacing: float) -> NDArray[np.float64]:
        half = math.sqrt(max(self.radius * self.radius - t * t, 0.0))
        count = max(int(math.ceil(2 * half / spacing)), 1) + 1
        s = np.linspace(-half, half, count)
        u = np.array([math.cos(theta), math.sin(theta)])
        n = np.array([-math.sin(theta), math.cos(theta)])
        return t * n + s[:, None] * u

    def _term2(self, theta: float, t: float, spacing: float) -> float:
        d, _ = self.tree.query(self._chord(theta, t, spacing))
        return float(np.max(d))

    def deviation(self, theta: float, t: float) -> float:
        term1 = float(self._term1(np.array([theta]), np.array([t]))[0, 0])
        return min(max(term1, self._term2(theta, t, self.spacing)) / self.radius, 1.0)

    def search(
        self,
        thetas: NDArray[np.float64],
        ts: NDArray[np.float64],
        best: tuple[float, float, float],
    ) -> tuple[float, float, float]:
        term1 = self._term1(thetas, ts)
        order = np.argsort(term1, axis=None, kind="stable")
        coarse = self.radius / 25.0
        for flat in order:
            bound = float(term1.flat[flat])
            if bound >= best[0]:
                break
            i, j = divmod(int(flat), len(ts))
            theta, t = float(thetas[i]), float(ts[j])
            if max(bound, self._term2(theta, t, coarse)) >= best[0]:
                continue
            value = max(bound, self._term2(theta, t, self.spacing))
            if value < best[0]:
                best = (value, theta, t)
        return best


# --- Helpers ---


def rot90(v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Rotate vectors by +90 degrees: (x, y) -> (-y, x)."""
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def _xy(value: PointLike) -> tuple[float, float]:
    if isinstance(value, Point):
        return value.x, value.y
    x, y = value  # type: ignore[misc]
    return float(x), float(y)


__all__ = [
    "TAU",
    "AngleRecord",
    "Arc",
    "Ball",
    "ClosedPolyline",
    "FitLine",
    "OrientedSegment",
    "Point",
    "best_fit_line",
    "classify_points",
    "clip_segments",
    "clipped_lengths",
    "distance_point_segment",
    "flatness_against",
    "normal_angle_of",
    "point_in_polygon",
    "point_set_diameter",
    "project_onto_segments",
    "reduce_angle",
    "reduce_turns",
    "rot90",
    "sample_segments",
    "segment_distances",
]
