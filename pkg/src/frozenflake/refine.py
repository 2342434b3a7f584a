"""
One step of the construction: from the polygon of generation n to the
polygon of generation n + 1.

    assemble_G   replace every edge by its Gamma curve
    smooth       trim each segment by a/400 per end and round the corners
                 with tangent circular fillets
    rechordalize inscribe a polygon with equal chords in the smooth curve
    advance      all three, plus the frozen registry update

Deep generations are built inside a window only (``advance_windowed``).
Coordinates of a windowed generation are stored relative to the window
center; :class:`Frame` records the chain of shifts so curves and registry
entries of different generations can be compared.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import brentq

from frozenflake.errors import (
    ConstructionError,
    InvalidInputError,
    InvalidParameterError,
    NumericFailureError,
    ResourceLimitError,
    TopologyError,
)
from frozenflake.geometry import (
    TAU,
    AngleRecord,
    Ball,
    ClosedPolyline,
    OrientedSegment,
    Point,
    normal_angle_of,
    project_onto_segments,
    rot90,
)
from frozenflake.snowflake import DEFAULT_LEAF_BUDGET, Roots, expand, vertical_mass_table
from frozenflake.spatial import SpatialIndex


if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray


logger = logging.getLogger(__name__)

DEFAULT_CHORD_BUDGET = 5_000_000

#: Junction turns below this are joined by a straight connector.
STRAIGHT_TURN = 1e-10

_EPS = float(np.finfo(np.float64).eps)


# --- Frames ---


@dataclass(frozen=True)
class Frame:
    """Chain of origin shifts: ``local = global - offsets[0] - offsets[1] - ...``.

    Shifts are applied one at a time, so a deep frame keeps full relative
    precision near its origin.
    """

    offsets: tuple[tuple[float, float], ...] = ()

    @property
    def depth(self) -> int:
        return len(self.offsets)

    def child(self, origin: ArrayLike) -> Frame:
        """Frame whose origin sits at ``origin`` (given in this frame)."""
        x, y = np.asarray(origin, dtype=np.float64)
        return Frame((*self.offsets, (float(x), float(y))))

    def map_to(self, points: ArrayLike, target: Frame) -> NDArray[np.float64]:
        """Express points given in this frame in ``target``."""
        pts = np.array(points, dtype=np.float64)
        shared = 0
        for mine, theirs in zip(self.offsets, target.offsets):
            if mine != theirs:
                break
            shared += 1
        for offset in reversed(self.offsets[shared:]):
            pts = pts + np.asarray(offset)
        for offset in target.offsets[shared:]:
            pts = pts - np.asarray(offset)
        return pts

    def to_global(self, points: ArrayLike) -> NDArray[np.float64]:
        return self.map_to(points, Frame())


# --- Exact turns ---


def reduce_turns_array(
    num: NDArray[np.int64], den: NDArray[np.int64]
) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    """Normalize exact turns into (-1/2, 1/2]; ``den == 0`` marks unknown turns."""
    known = den > 0
    safe = np.where(known, den, 1)
    g = np.gcd(num, safe)
    num, safe = num // g, safe // g
    num = np.mod(num, safe)
    num = np.where(2 * num > safe, num - safe, num)
    return np.where(known, num, 0), np.where(known, safe, 0)


# --- Generation curves ---


@dataclass(frozen=True)
class FineRun:
    """Edges ``start:stop`` of a generation curve, inscribed with one chord length."""

    start: int
    stop: int
    chord_length: float

    def __len__(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class BuildStats:
    """Bookkeeping of one refinement step."""

    generation: int
    M: int
    depth: int
    nominal_segments: int
    built_segments: int
    min_segment: float
    chords: int
    chord_lengths: tuple[float, ...]
    vertical_exact: float
    vertical_tagged: float
    closure_residual: float
    windowed: bool


@dataclass(frozen=True, eq=False)
class GenerationCurve:
    """
    Boundary polygon of generation n.

    Edge i runs from ``vertices[i]`` to ``vertices[i + 1]`` (cyclically).
    Per-edge data: ``frozen`` marks edges with normal (1, 0) inherited from
    frozen segments; ``turns_num / turns_den`` is the exact normal angle in
    turns where known (``turns_den == 0`` otherwise); ``edge_generation``
    is the generation that produced the edge. ``fine_runs`` lists the
    equal-chord runs; a globally built curve has a single run covering
    every edge.
    """

    vertices: NDArray[np.float64]
    generation: int
    chord_length: float
    frozen: NDArray[np.bool_]
    turns_num: NDArray[np.int64]
    turns_den: NDArray[np.int64]
    edge_generation: NDArray[np.int64]
    fine_runs: tuple[FineRun, ...] = ()
    tracked_edge: int | None = None
    frame: Frame = field(default_factory=Frame)
    stats: BuildStats | None = None

    def __post_init__(self) -> None:
        n = len(self.vertices)
        for name in ("frozen", "turns_num", "turns_den", "edge_generation"):
            value = getattr(self, name)
            if len(value) != n:
                raise InvalidInputError(f"{name} has {len(value)} entries for {n} edges")
            value.setflags(write=False)
        self.vertices.setflags(write=False)

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def polyline(self) -> ClosedPolyline:
        return ClosedPolyline(self.vertices)

    @cached_property
    def index(self) -> SpatialIndex:
        return SpatialIndex(*self.edges)

    @property
    def edges(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    @property
    def edge_lengths(self) -> NDArray[np.float64]:
        a, b = self.edges
        return np.hypot(*(b - a).T)

    @property
    def frozen_edges(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.frozen))

    @property
    def is_windowed(self) -> bool:
        return not (len(self.fine_runs) == 1 and len(self.fine_runs[0]) == len(self))

    def normal_record(self, i: int) -> AngleRecord:
        """Normal angle of edge i; exact when its turns are known."""
        if self.turns_den[i] > 0:
            return AngleRecord.from_turns(Fraction(int(self.turns_num[i]), int(self.turns_den[i])))
        a, b = self.edges
        return normal_angle_of(b[i] - a[i])

    def segment(self, i: int) -> OrientedSegment:
        a, b = self.edges
        return OrientedSegment(Point(*a[i]), Point(*b[i]), self.normal_record(i))

    def in_frame(self, target: Frame) -> NDArray[np.float64]:
        return self.frame.map_to(self.vertices, target)

    def chord_spread(self) -> float:
        """Largest relative deviation of a fine-run chord from its run's length."""
        lengths = self.edge_lengths
        worst = 0.0
        for run in self.fine_runs:
            part = lengths[run.start : run.stop]
            worst = max(worst, float(np.max(np.abs(part - run.chord_length))) / run.chord_length)
        return worst

    def max_chord_turn(self) -> float:
        """Largest turning angle between consecutive chords of the same run."""
        a, b = self.edges
        d = b - a
        worst = 0.0
        for run in self.fine_runs:
            if len(run) == len(self):
                first, second = d, np.roll(d, -1, axis=0)
            else:
                first, second = d[run.start : run.stop - 1], d[run.start + 1 : run.stop]
            if len(first):
                worst = max(worst, float(np.max(np.abs(_turn_angles(first, second)))))
        return worst


def _turn_angles(first: NDArray[np.float64], second: NDArray[np.float64]) -> NDArray[np.float64]:
    cross = first[:, 0] * second[:, 1] - first[:, 1] * second[:, 0]
    dot = np.einsum("ij,ij->i", first, second)
    return np.arctan2(cross, dot)


def initial_polygon(sides: int = 100, side: float = 1.0) -> GenerationCurve:
    """
    Regular polygon Omega_0, clockwise, with edge 0 horizontal and normal (0, 1).

    Edge k has exact normal turns ``1/4 - k/sides``; edge 0 is tracked.

    Example:
        >>> omega0 = initial_polygon()
        >>> len(omega0), omega0.polyline.is_clockwise
        (100, True)
    """
    if sides < 3:
        raise InvalidParameterError(f"need at least 3 sides, got {sides}")
    if not side > 0:
        raise InvalidParameterError(f"side length must be positive, got {side}")
    radius = side / (2.0 * math.sin(math.pi / sides))
    k = np.arange(sides)
    theta = math.pi / 2 + math.pi / sides - TAU * k / sides
    vertices = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    # mirror-symmetric pairs share coordinates exactly so axis-aligned edges stay exact
    vertices[0] = (-side / 2, radius * math.cos(math.pi / sides))
    vertices[1] = (side / 2, vertices[0, 1])
    turns = [Fraction(1, 4) - Fraction(int(i), sides) for i in k]
    num = np.array([t.numerator for t in turns], dtype=np.int64)
    den = np.array([t.denominator for t in turns], dtype=np.int64)
    num, den = reduce_turns_array(num, den)
    for i in np.flatnonzero(num == 0):
        j = (i + 1) % sides
        vertices[j, 0] = vertices[i, 0]
    for i in np.flatnonzero((2 * num == den)):
        j = (i + 1) % sides
        vertices[j, 0] = vertices[i, 0]
    for i in np.flatnonzero(4 * np.abs(num) == den):
        j = (i + 1) % sides
        vertices[j, 1] = vertices[i, 1]
    return GenerationCurve(
        vertices=vertices,
        generation=0,
        chord_length=side,
        frozen=np.zeros(sides, dtype=bool),
        turns_num=num,
        turns_den=den,
        edge_generation=np.zeros(sides, dtype=np.int64),
        fine_runs=(FineRun(0, sides, side),),
        tracked_edge=0,
    )


def polygon_curve(vertices: ArrayLike, generation: int = 0) -> GenerationCurve:
    """Wrap a clockwise polygon as a generation curve, with exact turns on axis-aligned edges."""
    v = np.array(vertices, dtype=np.float64)
    polyline = ClosedPolyline(v)
    if not polyline.is_clockwise:
        raise InvalidInputError("polygon must be clockwise")
    a, b = polyline.edges
    records = [normal_angle_of(q - p) for p, q in zip(a, b)]
    num = np.array([r.turns.numerator if r.turns is not None else 0 for r in records])
    den = np.array([r.turns.denominator if r.turns is not None else 0 for r in records])
    lengths = polyline.edge_lengths
    return GenerationCurve(
        vertices=v,
        generation=generation,
        chord_length=float(lengths.max()),
        frozen=np.zeros(len(v), dtype=bool),
        turns_num=num.astype(np.int64),
        turns_den=den.astype(np.int64),
        edge_generation=np.full(len(v), generation, dtype=np.int64),
        fine_runs=(FineRun(0, len(v), float(lengths.max())),),
    )


def lookahead_window(curve: GenerationCurve, M: int, depth: int | None = None) -> Ball:
    """
    Window for the next windowed step of the tracked pipeline.

    Centered at the midpoint of the all-ones leaf S_{1..1} of the tracked
    edge (the leaf at its start point), with radius twice its length.
    """
    if curve.tracked_edge is None:
        raise ConstructionError("curve has no tracked edge")
    depth = M * M if depth is None else depth
    a, b = curve.edges
    e = curve.tracked_edge
    alpha = abs(curve.normal_record(e).angle) / M
    ratio = (1.0 / (2.0 * (1.0 + math.cos(alpha)))) ** depth
    end = a[e] + ratio * (b[e] - a[e])
    length = ratio * float(np.hypot(*(b[e] - a[e])))
    center = 0.5 * (a[e] + end)
    return Ball(Point(*center), 2.0 * length)


# --- Assembly ---


@dataclass(frozen=True, eq=False)
class SegmentChain:
    """Consecutive segments with frozen tags and exact normal turns (``den == 0`` if unknown)."""

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    frozen: NDArray[np.bool_]
    num: NDArray[np.int64]
    den: NDArray[np.int64]

    @classmethod
    def from_segments(cls, segments: Sequence[OrientedSegment]) -> SegmentChain:
        if not segments:
            raise InvalidInputError("need at least one segment")
        turns = [s.normal.exact_turns for s in segments]
        return cls(
            a=np.array([s.a.as_array() for s in segments]),
            b=np.array([s.b.as_array() for s in segments]),
            frozen=np.array([s.normal.is_zero for s in segments], dtype=bool),
            num=np.array([t.numerator if t is not None else 0 for t in turns], dtype=np.int64),
            den=np.array([t.denominator if t is not None else 0 for t in turns], dtype=np.int64),
        )

    def __len__(self) -> int:
        return len(self.a)

    @property
    def lengths(self) -> NDArray[np.float64]:
        return np.hypot(*(self.b - self.a).T)


@dataclass(frozen=True, eq=False)
class AssembledCurve:
    """
    G_{n+1}: every edge of generation n replaced by its Gamma curve.

    In windowed mode only edges meeting twice the window are replaced, and
    their trees are pruned away from it. ``fine`` marks full-depth leaves
    meeting twice the window; those are the pieces that get smoothed and
    re-inscribed. ``root`` is the previous-generation edge of each node.
    """

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    frozen: NDArray[np.bool_]
    num: NDArray[np.int64]
    den: NDArray[np.int64]
    levels: NDArray[np.int64]
    root: NDArray[np.int64]
    expanded: NDArray[np.bool_]
    codings: NDArray[np.uint8]
    fine: NDArray[np.bool_]
    M: int
    depth: int
    generation: int
    frame: Frame
    window: Ball | None
    nominal: int

    def __len__(self) -> int:
        return len(self.a)

    @property
    def lengths(self) -> NDArray[np.float64]:
        return np.hypot(*(self.b - self.a).T)

    @property
    def min_length(self) -> float:
        """The smoothing scale a: shortest segment among the fine ones."""
        if not self.fine.any():
            return math.inf
        return float(self.lengths[self.fine].min())

    @property
    def closed(self) -> bool:
        return bool(self.fine.all())

    def chain(self, start: int = 0, stop: int | None = None) -> SegmentChain:
        part = slice(start, stop)
        return SegmentChain(
            a=self.a[part],
            b=self.b[part],
            frozen=self.frozen[part],
            num=self.num[part],
            den=self.den[part],
        )

    def segments(self) -> list[OrientedSegment]:
        out = []
        for i in range(len(self)):
            if self.den[i] > 0:
                record = AngleRecord.from_turns(Fraction(int(self.num[i]), int(self.den[i])))
            else:
                record = normal_angle_of(self.b[i] - self.a[i])
            out.append(OrientedSegment(Point(*self.a[i]), Point(*self.b[i]), record))
        return out

    def fine_ranges(self) -> list[tuple[int, int]]:
        """Maximal ranges of consecutive fine nodes (never wrapping past the end)."""
        f = self.fine.astype(np.int8)
        edges = np.diff(np.concatenate([[0], f, [0]]))
        starts = np.flatnonzero(edges == 1)
        stops = np.flatnonzero(edges == -1)
        return list(zip(starts.tolist(), stops.tolist()))

    def rolled(self, shift: int) -> AssembledCurve:
        """Same curve with node ``shift`` first."""
        names = ("a", "b", "frozen", "num", "den", "levels", "root", "expanded", "codings", "fine")
        rolled = {name: np.roll(getattr(self, name), -shift, axis=0) for name in names}
        return replace(self, **rolled)


def assemble_G(
    prev: GenerationCurve,
    M: int,
    *,
    depth: int | None = None,
    window: Ball | None = None,
    leaf_budget: int = DEFAULT_LEAF_BUDGET,
) -> AssembledCurve:
    """
    Concatenate the Gamma curves of all edges of ``prev``, clockwise.

    Args:
        prev: Generation n.
        M: Replacement parameter for this step.
        depth: Tree depth; ``M**2`` unless overridden.
        window: Optional ball in ``prev``'s frame. The result is expressed
            in a child frame centered at the ball.
        leaf_budget: Maximum number of tree nodes.

    Returns:
        AssembledCurve with ``nominal == len(prev) * 4**depth``.

    Raises:
        ResourceLimitError: If a global expansion exceeds ``leaf_budget``.
    """
    if M < 1:
        raise InvalidParameterError(f"M must be >= 1, got {M}")
    depth = M * M if depth is None else depth
    if window is None:
        frame = prev.frame
        vertices = np.asarray(prev.vertices)
        local_window = None
        select = np.ones(len(prev), dtype=bool)
    else:
        frame = prev.frame.child(window.center.as_array())
        vertices = prev.vertices - window.center.as_array()
        local_window = Ball(Point(0.0, 0.0), window.radius)
    va, vb = vertices, np.roll(vertices, -1, axis=0)
    if local_window is not None:
        _, _, dist = project_onto_segments(np.zeros(2), va, vb)
        select = dist <= 2.0 * local_window.radius * (1.0 + 1e-9)

    chosen = np.flatnonzero(select)
    kept = np.flatnonzero(~select)
    roots = Roots.from_edges(
        va[chosen], vb[chosen], prev.turns_num[chosen], prev.turns_den[chosen], M
    )
    if len(chosen) and roots.alpha.max() > math.pi / 2 + 1e-12:
        raise InvalidParameterError(f"alpha {roots.alpha.max():.6f} exceeds pi/2; increase M")
    tree = expand(roots, M, depth, window=local_window, leaf_budget=leaf_budget)

    # exact turns of tree nodes: gamma * (M + sign * count) / M
    r = tree.root
    num = roots.num[r] * (M + roots.sign[r] * tree.counts)
    den = roots.den[r] * M
    num, den = reduce_turns_array(num, den)
    num = np.where(tree.frozen, 0, num)
    den = np.where(tree.frozen, 1, den)

    order = np.argsort(np.concatenate([kept, chosen[r]]), kind="stable")

    def merge(kept_values: NDArray, tree_values: NDArray) -> NDArray:
        return np.concatenate([kept_values, tree_values])[order]

    kept_frozen = prev.frozen[kept]
    a = merge(va[kept], tree.a)
    b = merge(vb[kept], tree.b)
    levels = merge(np.zeros(len(kept), dtype=np.int64), tree.levels)
    expanded = merge(np.zeros(len(kept), dtype=bool), np.ones(len(tree), dtype=bool))
    assert tree.codings is not None
    codings = merge(np.zeros((len(kept), depth), dtype=np.uint8), tree.codings)

    full = levels == depth
    if local_window is None:
        fine = expanded & full
    else:
        _, _, dist = project_onto_segments(np.zeros(2), a, b)
        fine = expanded & full & (dist <= 2.0 * local_window.radius * (1.0 + 1e-9))

    assembled = AssembledCurve(
        a=a,
        b=b,
        frozen=merge(kept_frozen, tree.frozen),
        num=merge(np.where(kept_frozen, 0, prev.turns_num[kept]), num),
        den=merge(np.where(kept_frozen, 1, prev.turns_den[kept]), den),
        levels=levels,
        root=merge(kept, chosen[r]),
        expanded=expanded,
        codings=codings,
        fine=fine,
        M=M,
        depth=depth,
        generation=prev.generation + 1,
        frame=frame,
        window=local_window,
        nominal=len(prev) * 4**depth,
    )
    logger.info(
        "assembled G_%d: %d nodes (%d fine) from %d of %d edges, M=%d",
        assembled.generation,
        len(assembled),
        int(fine.sum()),
        len(chosen),
        len(prev),
        M,
    )
    return assembled


def edge_length_ratios(prev: GenerationCurve, assembled: AssembledCurve) -> NDArray[np.float64]:
    """
    H1(Gamma_j) / |e_j| for every edge of ``prev``.

    Edges a window left unexpanded get NaN; for expanded edges of a windowed
    assembly the ratio is that of the pruned tree.
    """
    total = np.bincount(assembled.root, weights=assembled.lengths, minlength=len(prev))
    touched = np.bincount(assembled.root[assembled.expanded], minlength=len(prev)) > 0
    return np.where(touched, total / prev.edge_lengths, np.nan)


# --- Smoothing ---


@dataclass(frozen=True, eq=False)
class SmoothCurve:
    """
    C^1 curve made of straight pieces and circular arcs.

    Piece k starts at ``start[k]`` with unit tangent ``tangent[k]``, has
    signed curvature ``kappa[k]`` (0 for straight pieces, positive turning
    counterclockwise) and arc length ``length[k]``. ``source[k]`` is the
    index of the trimmed segment for straight pieces cut from the input and
    -1 for junction pieces.
    """

    start: NDArray[np.float64]
    tangent: NDArray[np.float64]
    kappa: NDArray[np.float64]
    length: NDArray[np.float64]
    frozen: NDArray[np.bool_]
    source: NDArray[np.int64]
    num: NDArray[np.int64]
    den: NDArray[np.int64]
    closed: bool = True
    trim: float = 0.0

    @classmethod
    def circle(cls, center: ArrayLike, radius: float, pieces: int = 4) -> SmoothCurve:
        """Clockwise circle starting at its top point, split into equal arcs."""
        if not radius > 0:
            raise InvalidParameterError(f"radius must be positive, got {radius}")
        c = np.asarray(center, dtype=np.float64)
        phi = math.pi / 2 - TAU * np.arange(pieces) / pieces
        start = c + radius * np.column_stack([np.cos(phi), np.sin(phi)])
        tangent = np.column_stack([np.sin(phi), -np.cos(phi)])
        return cls(
            start=start,
            tangent=tangent,
            kappa=np.full(pieces, -1.0 / radius),
            length=np.full(pieces, TAU * radius / pieces),
            frozen=np.zeros(pieces, dtype=bool),
            source=np.full(pieces, -1, dtype=np.int64),
            num=np.zeros(pieces, dtype=np.int64),
            den=np.zeros(pieces, dtype=np.int64),
        )

    def __len__(self) -> int:
        return len(self.start)

    @property
    def total_length(self) -> float:
        return float(self.length.sum())

    @property
    def straight(self) -> NDArray[np.bool_]:
        return self.kappa == 0.0

    def points(self, piece: ArrayLike, s: ArrayLike) -> NDArray[np.float64]:
        """Points at arc length ``s`` along the given pieces."""
        k = np.asarray(piece, dtype=np.int64)
        s = np.asarray(s, dtype=np.float64)
        half = 0.5 * self.kappa[k] * s
        with np.errstate(invalid="ignore", divide="ignore"):
            sinc = np.where(np.abs(half) < 1e-8, 1.0 - half * half / 6.0, np.sin(half) / half)
        u = self.tangent[k]
        direction = np.cos(half)[..., None] * u + np.sin(half)[..., None] * rot90(u)
        return self.start[k] + (s * sinc)[..., None] * direction

    def tangents(self, piece: ArrayLike, s: ArrayLike) -> NDArray[np.float64]:
        k = np.asarray(piece, dtype=np.int64)
        phi = self.kappa[k] * np.asarray(s, dtype=np.float64)
        u = self.tangent[k]
        return np.cos(phi)[..., None] * u + np.sin(phi)[..., None] * rot90(u)

    @property
    def ends(self) -> NDArray[np.float64]:
        return self.points(np.arange(len(self)), self.length)

    def tangency_residuals(self) -> NDArray[np.float64]:
        """Angle between the end tangent of each piece and the start tangent of the next."""
        end_tangent = self.tangents(np.arange(len(self)), self.length)
        following = np.roll(self.tangent, -1, axis=0)
        if not self.closed:
            end_tangent, following = end_tangent[:-1], following[:-1]
        return np.abs(_turn_angles(end_tangent, following))

    def frozen_runs(self) -> NDArray[np.int64]:
        """Run id of each piece in a maximal frozen run, -1 elsewhere."""
        f = self.frozen
        n = len(f)
        ids = np.full(n, -1, dtype=np.int64)
        if not f.any():
            return ids
        if f.all():
            ids[:] = 0
            return ids
        starts = f & ~np.roll(f, 1) if self.closed else f & ~np.concatenate([[False], f[:-1]])
        run = np.cumsum(starts) - 1
        ids[f] = run[f]
        if self.closed and f[0] and f[-1]:
            # the run crossing the closing junction continues the last one
            first_stop = int(np.argmin(f))
            ids[:first_stop] = ids[-1]
        return ids

    def nearest(self, point: ArrayLike) -> tuple[int, float]:
        """Nearest point among the straight pieces and the arc endpoints, as (piece, s)."""
        p = np.asarray(point, dtype=np.float64)
        straight = np.flatnonzero(self.straight)
        best_piece, best_s, best_d = 0, 0.0, math.inf
        if len(straight):
            a = self.start[straight]
            b = a + self.length[straight, None] * self.tangent[straight]
            t, _, d = project_onto_segments(p, a, b)
            i = int(np.argmin(d))
            k = int(straight[i])
            best_piece, best_s, best_d = k, float(t[i] * self.length[k]), float(d[i])
        d_start = np.hypot(*(self.start - p).T)
        j = int(np.argmin(d_start))
        if d_start[j] < best_d:
            best_piece, best_s = j, 0.0
        return best_piece, best_s


def smooth(
    segments: SegmentChain | AssembledCurve | Sequence[OrientedSegment],
    a: float,
    *,
    closed: bool = True,
) -> SmoothCurve:
    """
    Trim every segment by ``a/400`` per end and join the pieces with fillets.

    Args:
        segments: Chaining segments (an AssembledCurve is taken as a whole).
        a: Smoothing scale, at most the shortest segment.
        closed: Whether the last segment chains back to the first. Open
            chains keep their two outer endpoints untrimmed.

    Returns:
        SmoothCurve alternating trimmed segments and junction pieces. A
        junction turning by theta becomes an arc of radius
        ``(a/400) / tan(|theta|/2)``, tangent to both neighbours; nearly
        collinear junctions become straight connectors.

    Raises:
        TopologyError: If the segments do not chain or a junction turns by pi.
        InvalidParameterError: If ``a`` exceeds the shortest segment.

    Example:
        >>> square = [OrientedSegment.between(p, q) for p, q in
        ...           [((0, 0), (0, 1)), ((0, 1), (1, 1)), ((1, 1), (1, 0)), ((1, 0), (0, 0))]]
        >>> sc = smooth(square, 1.0)
        >>> round(float(1 / abs(sc.kappa[1])), 6)  # right angle: radius equals the trim
        0.0025
    """
    if isinstance(segments, AssembledCurve):
        chain = segments.chain()
    elif isinstance(segments, SegmentChain):
        chain = segments
    else:
        chain = SegmentChain.from_segments(list(segments))
    n = len(chain)
    if n == 0 or (closed and n < 2):
        raise InvalidInputError(f"cannot smooth {n} segments")
    A, B = chain.a, chain.b
    L = chain.lengths
    if np.any(L <= 0):
        raise InvalidInputError("segments must have positive length")
    if not 0.0 < a <= float(L.min()) * (1.0 + 1e-12):
        raise InvalidParameterError(f"a must lie in (0, {L.min():.6g}], got {a}")

    nxt = np.roll(A, -1, axis=0) if closed else A[1:]
    ends = B if closed else B[:-1]
    gap = np.hypot(*(nxt - ends).T)
    if np.any(gap > 1e-9 * float(L.min())):
        i = int(np.argmax(gap))
        raise TopologyError(f"segments {i} and {(i + 1) % n} do not chain (gap {gap[i]:.3e})")

    u = (B - A) / L[:, None]
    u_in = u if closed else u[:-1]
    u_out = np.roll(u, -1, axis=0) if closed else u[1:]
    theta = _turn_angles(u_in, u_out)
    folded = np.abs(theta) >= math.pi - 1e-12
    if folded.any():
        i = int(np.argmax(folded))
        raise TopologyError(f"junction after segment {i} folds back (cusp)")

    d = a / 400.0
    head = np.full(n, d)
    tail = np.full(n, d)
    if not closed:
        head[0] = 0.0
        tail[-1] = 0.0
    seg_start = A + head[:, None] * u
    seg_length = L - head - tail

    nj = len(theta)
    j_start = ends - d * u_in
    j_end = nxt + d * u_out
    straight = np.abs(theta) < STRAIGHT_TURN
    with np.errstate(invalid="ignore", divide="ignore"):
        radius = d / np.tan(0.5 * np.abs(theta))
        arc_length = radius * np.abs(theta)
    connector = j_end - j_start
    connector_length = np.hypot(*connector.T)
    j_tangent = np.where(straight[:, None], connector / connector_length[:, None], u_in)
    j_length = np.where(straight, connector_length, arc_length)
    with np.errstate(invalid="ignore", divide="ignore"):
        j_kappa = np.where(straight, 0.0, theta / arc_length)
    frozen_next = np.roll(chain.frozen, -1) if closed else chain.frozen[1:]
    frozen_prev = chain.frozen if closed else chain.frozen[:-1]
    j_frozen = straight & frozen_prev & frozen_next
    num_prev = chain.num if closed else chain.num[:-1]
    den_prev = chain.den if closed else chain.den[:-1]

    total = n + nj
    seg = np.arange(n) * 2
    jun = np.arange(nj) * 2 + 1

    def interleave(seg_values: NDArray, jun_values: NDArray) -> NDArray:
        dtype = np.result_type(seg_values, jun_values)
        out = np.empty((total, *np.shape(seg_values)[1:]), dtype=dtype)
        out[seg] = seg_values
        out[jun] = jun_values
        return out

    sc = SmoothCurve(
        start=interleave(seg_start, j_start),
        tangent=interleave(u, j_tangent),
        kappa=interleave(np.zeros(n), j_kappa),
        length=interleave(seg_length, j_length),
        frozen=interleave(chain.frozen, j_frozen),
        source=interleave(np.arange(n, dtype=np.int64), np.full(nj, -1, dtype=np.int64)),
        num=interleave(chain.num, np.where(straight, num_prev, 0)),
        den=interleave(chain.den, np.where(straight, den_prev, 0)),
        closed=closed,
        trim=d,
    )
    logger.debug("smoothed %d segments into %d pieces (trim %.3e)", n, total, d)
    return sc


# --- Equal-chord inscription ---


class _Chain:
    """Pieces of a smooth curve in marching order, as plain floats."""

    def __init__(self, sc: SmoothCurve, anchor: ArrayLike | None) -> None:
        count = len(sc)
        first, offset = (0, 0.0) if anchor is None or not sc.closed else sc.nearest(anchor)
        if sc.closed:
            tail = [first] if offset > 0 else []
            order = np.concatenate([np.arange(first, count), np.arange(0, first), np.asarray(tail, dtype=np.intp)])
        else:
            order = np.arange(count)
        lengths = sc.length[order].astype(np.float64)
        if sc.closed and offset > 0:
            lengths[-1] = offset
        self.order = order.astype(np.int64)
        self.lengths = lengths
        self.start_s = offset
        self.cum = np.concatenate([[0.0], np.cumsum(lengths)])
        self.total = float(self.cum[-1]) - offset
        ends = sc.points(order, lengths)
        end_tangent = sc.tangents(order[-1:], lengths[-1:])[0]

        self.px = sc.start[order, 0].tolist()
        self.py = sc.start[order, 1].tolist()
        self.ux = sc.tangent[order, 0].tolist()
        self.uy = sc.tangent[order, 1].tolist()
        self.kappa = sc.kappa[order].tolist()
        self.length = lengths.tolist()
        self.ex = ends[:, 0].tolist()
        self.ey = ends[:, 1].tolist()
        self.end_tangent = (float(end_tangent[0]), float(end_tangent[1]))
        self.origin = self.point(0, offset)

    def point(self, k: int, s: float) -> tuple[float, float]:
        kap = self.kappa[k]
        ux, uy = self.ux[k], self.uy[k]
        if kap == 0.0:
            return self.px[k] + s * ux, self.py[k] + s * uy
        half = 0.5 * kap * s
        chord = s * (math.sin(half) / half if abs(half) > 1e-8 else 1.0 - half * half / 6.0)
        c, sn = math.cos(half), math.sin(half)
        return self.px[k] + chord * (c * ux - sn * uy), self.py[k] + chord * (c * uy + sn * ux)

    def _hit(self, k: int, lo: float, x: float, y: float, ell: float) -> float:
        """Smallest s >= lo on piece k at distance ell from (x, y)."""
        if self.kappa[k] == 0.0:
            bx, by = self.px[k] - x, self.py[k] - y
            b = bx * self.ux[k] + by * self.uy[k]
            c = bx * bx + by * by - ell * ell
            s = -b + math.sqrt(max(b * b - c, 0.0))
            return min(max(s, lo), self.length[k])

        def gap(s: float) -> float:
            px, py = self.point(k, s)
            return math.hypot(px - x, py - y) - ell

        if gap(lo) >= 0.0:
            return lo
        return float(brentq(gap, lo, self.length[k], xtol=1e-13 * ell, rtol=4 * _EPS))

    def march(
        self, ell: float, m: int, *, emit: bool = False
    ) -> tuple[float, list[NDArray[np.int64]], list[NDArray[np.float64]]]:
        """
        Place ``m`` vertices at chord distance ``ell`` from each other.

        Returns the arc position reached (relative to the chain start; past
        the end the last tangent line is followed) and, with ``emit``, the
        piece and position of every vertex.
        """
        pieces: list[NDArray[np.int64]] = []
        positions: list[NDArray[np.float64]] = []
        n = len(self.length)
        k, s = 0, self.start_s
        x, y = self.origin
        done = 0
        while done < m:
            kap = self.kappa[k]
            if kap == 0.0:
                step = ell
            else:
                h = 0.5 * abs(kap) * ell
                step = ell * math.asin(h) / h if h < 1.0 else math.inf
            room = self.length[k] - s
            if step <= room:
                j = min(int(room / step), m - done)
                if j > 0:
                    if emit:
                        pieces.append(np.full(j, k, dtype=np.int64))
                        positions.append(s + step * np.arange(1, j + 1))
                    s += j * step
                    done += j
                    if done == m:
                        break
                    x, y = self.point(k, s)

            q = k
            while q < n and math.hypot(self.ex[q] - x, self.ey[q] - y) < ell:
                q += 1
            if q == n:
                # continue along the tangent line past the end
                tx, ty = self.end_tangent
                bx, by = self.ex[-1] - x, self.ey[-1] - y
                b = bx * tx + by * ty
                c = bx * bx + by * by - ell * ell
                t = -b + math.sqrt(max(b * b - c, 0.0))
                extra = t + (m - done - 1) * ell
                if emit:
                    if m - done > 1:
                        raise NumericFailureError(
                            "chord march ran past the end of the curve", residual=extra
                        )
                    pieces.append(np.array([n - 1], dtype=np.int64))
                    positions.append(np.array([self.length[-1]]))
                return self.total + extra, pieces, positions

            s = self._hit(q, s if q == k else 0.0, x, y, ell)
            k = q
            done += 1
            x, y = self.point(k, s)
            if emit:
                pieces.append(np.array([k], dtype=np.int64))
                positions.append(np.array([s]))
        return float(self.cum[k]) + s - self.start_s, pieces, positions


@dataclass(frozen=True, eq=False)
class Inscription:
    """Equal-chord polygon inscribed in a smooth curve.

    ``vertices`` holds m vertices for a closed curve and m + 1 (both
    endpoints included) for an open one; chord i joins vertex i to the next.
    """

    vertices: NDArray[np.float64]
    piece: NDArray[np.int64]
    chord_length: float
    frozen: NDArray[np.bool_]
    num: NDArray[np.int64]
    den: NDArray[np.int64]
    residual: float
    closed: bool

    @property
    def chords(self) -> int:
        return len(self.frozen)

    def chord_on(self, piece: int) -> int | None:
        """Middle chord with both endpoints on ``piece``."""
        start = self.piece[: self.chords]
        stop = self.piece[1:] if not self.closed else np.roll(self.piece, -1)
        hits = np.flatnonzero((start == piece) & (stop == piece))
        if len(hits) == 0:
            return None
        return int(hits[len(hits) // 2])


def _solve_chord_length(chain: _Chain, m: int) -> float:
    def closure(ell: float) -> float:
        return chain.march(ell, m)[0] - chain.total

    hi = chain.total / m
    f_hi = closure(hi)
    while f_hi < 0.0:
        hi *= 1.01
        f_hi = closure(hi)
    if f_hi == 0.0:
        return hi
    lo = hi / 1.01
    f_lo = closure(lo)
    for _ in range(200):
        if f_lo < 0.0:
            break
        lo /= 1.1
        f_lo = closure(lo)
    else:
        raise NumericFailureError("could not bracket the chord length", residual=f_lo)
    xtol = max(1e-12 * hi / m, 1e-300)
    ell, info = brentq(
        closure, lo, hi, xtol=xtol, rtol=4 * _EPS, maxiter=200, full_output=True, disp=False
    )
    logger.debug("chord length %.17g after %d closure iterations", ell, info.iterations)
    if not info.converged:
        raise NumericFailureError(
            f"chord closure did not converge in {info.iterations} iterations",
            residual=closure(ell),
        )
    return float(ell)


def inscribe(
    sc: SmoothCurve,
    n: int,
    a: float,
    *,
    anchor: ArrayLike | None = None,
    chords: int | None = None,
    chord_budget: int = DEFAULT_CHORD_BUDGET,
) -> Inscription:
    """
    Inscribe an equal-chord polygon in ``sc`` (closed or open).

    The chord length starts at ``min(a/200, 2 r_min sin(beta/2))`` with
    ``beta = 2**(-n-5) pi`` and is adjusted so the m chords close up
    exactly; if a turn between chords still exceeds beta the chord count
    doubles.

    Raises:
        ResourceLimitError: If more than ``chord_budget`` chords are needed.
        NumericFailureError: If the closure root-finding fails.
    """
    if n < 0:
        raise InvalidParameterError(f"generation index must be >= 0, got {n}")
    beta = math.pi * 2.0 ** (-n - 5)
    chain = _Chain(sc, anchor)
    arcs = ~sc.straight
    r_min = float(1.0 / np.abs(sc.kappa[arcs]).max()) if arcs.any() else math.inf
    if chords is None:
        ell0 = min(a / 200.0, 2.0 * r_min * math.sin(beta / 2))
        m = max(math.ceil(chain.total / ell0), 3 if sc.closed else 1)
    else:
        if chords < (3 if sc.closed else 1):
            raise InvalidParameterError(f"too few chords: {chords}")
        m = chords

    for _ in range(21):
        if m > chord_budget:
            raise ResourceLimitError(
                "inscribed polygon needs too many chords", required=m, budget=chord_budget
            )
        ell = _solve_chord_length(chain, m)
        _, piece_parts, pos_parts = chain.march(ell, m, emit=True)
        local = np.concatenate([[0], *piece_parts])
        pos = np.concatenate([[chain.start_s], *pos_parts])
        piece = chain.order[local]
        vertices = sc.points(piece, pos)
        if sc.closed:
            residual = float(np.hypot(*(vertices[-2] - chain.origin))) - ell
            vertices, piece = vertices[:-1], piece[:-1]
        else:
            vertices[-1] = sc.points([len(sc) - 1], [sc.length[-1]])[0]
            residual = float(np.hypot(*(vertices[-1] - vertices[-2]))) - ell
        d = np.diff(np.vstack([vertices, vertices[:1]]) if sc.closed else vertices, axis=0)
        if sc.closed:
            turns = _turn_angles(d, np.roll(d, -1, axis=0))
        else:
            turns = _turn_angles(d[:-1], d[1:])
        worst = float(np.max(np.abs(turns), initial=0.0))
        if chords is not None or worst <= beta * (1.0 + 1e-9):
            break
        logger.debug("chord turn %.3e exceeds %.3e; doubling to %d chords", worst, beta, 2 * m)
        m *= 2
    else:
        raise NumericFailureError("chord turn bound not reached", residual=worst - beta)

    start_piece = piece
    end_piece = np.roll(piece, -1) if sc.closed else piece[1:]
    if not sc.closed:
        start_piece = piece[:-1]
    runs = sc.frozen_runs()
    frozen = (runs[start_piece] >= 0) & (runs[start_piece] == runs[end_piece])
    same = (start_piece == end_piece) & sc.straight[start_piece] & (sc.den[start_piece] > 0)
    num = np.where(same, sc.num[start_piece], 0)
    den = np.where(same, sc.den[start_piece], 0)
    num = np.where(frozen, 0, num)
    den = np.where(frozen, 1, den)

    # vertices on a frozen run share its x exactly
    on_run = runs[piece] >= 0
    if on_run.any():
        first_piece = np.full(int(runs.max()) + 1, len(sc))
        np.minimum.at(first_piece, runs[runs >= 0], np.flatnonzero(runs >= 0))
        vertices[on_run, 0] = sc.start[first_piece[runs[piece[on_run]]], 0]

    logger.debug(
        "inscribed %d chords of length %.6e (residual %.3e)", len(start_piece), ell, residual
    )
    return Inscription(
        vertices=vertices,
        piece=piece,
        chord_length=ell,
        frozen=frozen,
        num=num.astype(np.int64),
        den=den.astype(np.int64),
        residual=residual,
        closed=sc.closed,
    )


def rechordalize(
    sc: SmoothCurve,
    n: int,
    a: float,
    *,
    anchor: ArrayLike | None = None,
    chords: int | None = None,
    chord_budget: int = DEFAULT_CHORD_BUDGET,
    frame: Frame | None = None,
) -> GenerationCurve:
    """
    Inscribe the equal-chord polygon of generation ``n`` in a closed smooth curve.

    Args:
        sc: Closed C^1 curve.
        n: Index of the generation being produced; consecutive chords turn
            by at most ``2**(-n-5) pi``.
        a: Smoothing scale; chords are at most ``a/200``.
        anchor: The first vertex is the curve point nearest to it.
        chords: Fixed chord count (skips the turn bound).
        chord_budget: Maximum chord count.
        frame: Frame of ``sc``.

    Returns:
        GenerationCurve with every chord equal within 1e-9 relative.

    Example:
        >>> poly = rechordalize(SmoothCurve.circle((0, 0), 1.0), 0, 1.0, chords=6)
        >>> round(poly.chord_length, 9)
        1.0
    """
    if not sc.closed:
        raise InvalidInputError("rechordalize needs a closed curve")
    ins = inscribe(sc, n, a, anchor=anchor, chords=chords, chord_budget=chord_budget)
    m = ins.chords
    return GenerationCurve(
        vertices=ins.vertices,
        generation=n,
        chord_length=ins.chord_length,
        frozen=ins.frozen,
        turns_num=ins.num,
        turns_den=ins.den,
        edge_generation=np.full(m, n, dtype=np.int64),
        fine_runs=(FineRun(0, m, ins.chord_length),),
        frame=frame if frame is not None else Frame(),
    )


# --- Frozen registry ---


@dataclass(frozen=True)
class FrozenEntry:
    """A frozen segment T (or a frozen node made of ``pieces`` equal leaves)."""

    segment: OrientedSegment
    generation: int
    coding: tuple[int, ...]
    pieces: int

    @property
    def half(self) -> OrientedSegment:
        """Middle half of T; for a multi-piece node, of its first piece."""
        s = self.segment
        t0, t1 = 0.25 / self.pieces, 0.75 / self.pieces
        return OrientedSegment(s.point_at(t0), s.point_at(t1), s.normal)


@dataclass(frozen=True, eq=False)
class RegistryBlock:
    """Frozen segments created in one generation; F is the middle half of every piece."""

    generation: int
    a: NDArray[np.float64]
    b: NDArray[np.float64]
    pieces: NDArray[np.int64]
    levels: NDArray[np.int64]
    codings: NDArray[np.uint8]
    frame: Frame
    chord_length: float

    def __len__(self) -> int:
        return len(self.a)

    @property
    def lengths(self) -> NDArray[np.float64]:
        return np.hypot(*(self.b - self.a).T)

    @cached_property
    def index(self) -> SpatialIndex | None:
        return SpatialIndex(self.a, self.b) if len(self) else None

    def entry(self, i: int) -> FrozenEntry:
        coding = tuple(int(c) for c in self.codings[i, : self.levels[i]])
        segment = OrientedSegment(Point(*self.a[i]), Point(*self.b[i]), AngleRecord.vertical())
        return FrozenEntry(segment, self.generation, coding, int(self.pieces[i]))

    @property
    def entries(self) -> list[FrozenEntry]:
        return [self.entry(i) for i in range(len(self))]

    def sample_points(self) -> NDArray[np.float64]:
        """Points of F: the 1/4, 1/2 and 3/4 marks of the first, middle and last piece."""
        if not len(self):
            return np.empty((0, 2))
        p = self.pieces.astype(np.float64)
        which = np.stack([np.zeros_like(p), np.floor(p / 2), p - 1], axis=1)
        marks = np.array([0.25, 0.5, 0.75])
        t = (which[:, :, None] + marks[None, None, :]) / p[:, None, None]
        t = t.reshape(len(self), -1)
        return (self.a[:, None, :] + t[..., None] * (self.b - self.a)[:, None, :]).reshape(-1, 2)

    def contains(self, points: ArrayLike, tol: float | None = None) -> NDArray[np.bool_]:
        """Whether points (in this block's frame) lie on F."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.index is None:
            return np.zeros(len(pts), dtype=bool)
        if tol is None:
            tol = 1e-6 * float(np.median(self.lengths / self.pieces))
        dist, edge, foot = self.index.nearest(pts)
        t, _, _ = project_onto_segments(foot, self.a[edge], self.b[edge])
        position = t * self.pieces[edge]
        frac = position - np.floor(position)
        frac = np.where(position >= self.pieces[edge], 1.0, frac)
        return (dist <= tol) & (frac >= 0.25) & (frac <= 0.75)


@dataclass(frozen=True, eq=False)
class FrozenRegistry:
    """The set F, one block per generation."""

    blocks: tuple[RegistryBlock, ...] = ()

    def __len__(self) -> int:
        return sum(len(block) for block in self.blocks)

    @property
    def generations(self) -> tuple[int, ...]:
        return tuple(block.generation for block in self.blocks)

    def with_block(self, block: RegistryBlock) -> FrozenRegistry:
        if block.generation in self.generations:
            raise InvalidInputError(f"generation {block.generation} already registered")
        return FrozenRegistry((*self.blocks, block))

    def block(self, generation: int) -> RegistryBlock:
        for block in self.blocks:
            if block.generation == generation:
                return block
        raise KeyError(generation)

    def entries(self, generation: int | None = None) -> list[FrozenEntry]:
        blocks = self.blocks if generation is None else (self.block(generation),)
        return [entry for block in blocks for entry in block.entries]

    def contains(
        self, points: ArrayLike, frame: Frame | None = None, tol: float | None = None
    ) -> NDArray[np.bool_]:
        """Whether points given in ``frame`` lie on F (any generation)."""
        frame = frame if frame is not None else Frame()
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        hit = np.zeros(len(pts), dtype=bool)
        for block in self.blocks:
            hit |= block.contains(frame.map_to(pts, block.frame), tol)
        return hit


def _registry_block(assembled: AssembledCurve, chord_length: float) -> RegistryBlock:
    keep = assembled.frozen & assembled.expanded
    levels = assembled.levels[keep]
    pieces = np.array([4 ** (assembled.depth - int(level)) for level in levels], dtype=np.int64)
    return RegistryBlock(
        generation=assembled.generation,
        a=assembled.a[keep],
        b=assembled.b[keep],
        pieces=pieces,
        levels=levels,
        codings=assembled.codings[keep],
        frame=assembled.frame,
        chord_length=chord_length,
    )


# --- Refinement steps ---


def _snap_frozen(vertices: NDArray[np.float64], frozen: NDArray[np.bool_]) -> None:
    """Give every vertex of a run of frozen edges the x of the run's first vertex."""
    n = len(vertices)
    if frozen.all() or not frozen.any():
        return
    shift = int(np.argmin(frozen))
    f = np.roll(frozen, -shift)
    starts = f & ~np.concatenate([[False], f[:-1]])
    run = np.cumsum(starts) - 1
    idx = np.flatnonzero(f)
    first = (np.flatnonzero(starts) + shift) % n
    x0 = vertices[first, 0]
    edge = (idx + shift) % n
    vertices[edge, 0] = x0[run[idx]]
    vertices[(edge + 1) % n, 0] = x0[run[idx]]


def _tracked_leaf(prev: GenerationCurve, assembled: AssembledCurve) -> int | None:
    e = prev.tracked_edge
    if e is None:
        return None
    nodes = np.flatnonzero(assembled.root == e)
    if len(nodes) == 0:
        return None
    first = int(nodes[0])
    if not assembled.expanded[first]:
        return first
    if assembled.levels[first] != assembled.depth or np.any(assembled.codings[first] != 1):
        return None
    return first


def advance(
    prev: GenerationCurve,
    M: int,
    registry: FrozenRegistry | None = None,
    *,
    window: Ball | None = None,
    depth: int | None = None,
    leaf_budget: int = DEFAULT_LEAF_BUDGET,
    chord_budget: int = DEFAULT_CHORD_BUDGET,
) -> tuple[GenerationCurve, FrozenRegistry]:
    """
    Build generation n + 1 from generation n.

    next = rechordalize(smooth(assemble_G(prev, M))) globally, or inside
    twice ``window`` only. Every frozen node of the new Gamma curves is
    added to the registry.

    Returns:
        ``(next, registry')``.
    """
    registry = registry if registry is not None else FrozenRegistry()
    n = prev.generation + 1
    assembled = assemble_G(prev, M, depth=depth, window=window, leaf_budget=leaf_budget)
    if window is not None and not assembled.expanded.any():
        logger.info("window misses generation %d; curve unchanged", prev.generation)
        unchanged = replace(prev, generation=n, stats=None)
        block = _registry_block(assembled, prev.chord_length)
        return unchanged, registry.with_block(replace(block, frame=prev.frame))

    a_scale = assembled.min_length
    leaf = _tracked_leaf(prev, assembled)
    tracked: int | None = None
    residuals: list[float] = []

    if assembled.closed:
        sc = smooth(assembled, a_scale, closed=True)
        anchor = prev.frame.map_to(prev.vertices[0], assembled.frame)
        ins = inscribe(sc, n, a_scale, anchor=anchor, chord_budget=chord_budget)
        if ins.chords < assembled.nominal:
            raise ConstructionError(f"{ins.chords} chords for {assembled.nominal} segments")
        vertices = ins.vertices.copy()
        frozen, num, den = ins.frozen, ins.num, ins.den
        edge_generation = np.full(ins.chords, n, dtype=np.int64)
        fine_runs: list[FineRun] = [FineRun(0, ins.chords, ins.chord_length)]
        residuals.append(ins.residual)
        if leaf is not None:
            tracked = ins.chord_on(2 * leaf)
    else:
        shift = int(np.argmin(assembled.fine)) if assembled.fine.any() else 0
        assembled = assembled.rolled(shift)
        if leaf is not None:
            leaf = (leaf - shift) % len(assembled)
        parts_v: list[NDArray[np.float64]] = []
        parts_f: list[NDArray[np.bool_]] = []
        parts_num: list[NDArray[np.int64]] = []
        parts_den: list[NDArray[np.int64]] = []
        parts_gen: list[NDArray[np.int64]] = []
        fine_runs = []
        count = 0
        cursor = 0
        budget = chord_budget

        def keep(start: int, stop: int) -> int | None:
            """Copy nodes start:stop verbatim; returns the new index of the tracked leaf."""
            nonlocal count
            part = slice(start, stop)
            parts_v.append(assembled.a[part])
            parts_f.append(assembled.frozen[part])
            parts_num.append(assembled.num[part])
            parts_den.append(assembled.den[part])
            old = prev.edge_generation[assembled.root[part]]
            parts_gen.append(np.where(assembled.expanded[part], n, old))
            found = count + (leaf - start) if leaf is not None and start <= leaf < stop else None
            count += stop - start
            return found

        for start, stop in assembled.fine_ranges():
            found = keep(cursor, start)
            if found is not None:
                tracked = found
            sc = smooth(assembled.chain(start, stop), a_scale, closed=False)
            ins = inscribe(sc, n, a_scale, chord_budget=budget)
            budget -= ins.chords
            if leaf is not None and start <= leaf < stop:
                local = ins.chord_on(2 * (leaf - start))
                tracked = None if local is None else count + local
            parts_v.append(ins.vertices[:-1])
            parts_f.append(ins.frozen)
            parts_num.append(ins.num)
            parts_den.append(ins.den)
            parts_gen.append(np.full(ins.chords, n, dtype=np.int64))
            fine_runs.append(FineRun(count, count + ins.chords, ins.chord_length))
            residuals.append(ins.residual)
            count += ins.chords
            cursor = stop
        found = keep(cursor, len(assembled))
        if found is not None:
            tracked = found
        vertices = np.concatenate(parts_v)
        frozen = np.concatenate(parts_f)
        num = np.concatenate(parts_num)
        den = np.concatenate(parts_den)
        edge_generation = np.concatenate(parts_gen)

    if prev.tracked_edge is not None and tracked is None:
        logger.warning("tracked edge of generation %d was not carried over", prev.generation)
    _snap_frozen(vertices, frozen)

    if fine_runs:
        owning = [r for r in fine_runs if tracked is not None and r.start <= tracked < r.stop]
        chord_length = (owning or [min(fine_runs, key=lambda r: r.chord_length)])[0].chord_length
    else:
        chord_length = prev.chord_length

    stats = BuildStats(
        generation=n,
        M=M,
        depth=assembled.depth,
        nominal_segments=assembled.nominal,
        built_segments=len(assembled),
        min_segment=a_scale,
        chords=sum(len(run) for run in fine_runs),
        chord_lengths=tuple(run.chord_length for run in fine_runs),
        vertical_exact=exact_vertical_ratio(prev, M, assembled.depth),
        vertical_tagged=_tagged_ratio(assembled),
        closure_residual=max((abs(r) for r in residuals), default=0.0),
        windowed=window is not None,
    )
    curve = GenerationCurve(
        vertices=vertices,
        generation=n,
        chord_length=chord_length,
        frozen=frozen,
        turns_num=num,
        turns_den=den,
        edge_generation=edge_generation,
        fine_runs=tuple(fine_runs),
        tracked_edge=tracked,
        frame=assembled.frame,
        stats=stats,
    )
    registry = registry.with_block(_registry_block(assembled, chord_length))
    logger.info(
        "generation %d: %d edges, %d chords in %d runs, chord length %.3e, registry %d",
        n,
        len(curve),
        stats.chords,
        len(fine_runs),
        chord_length,
        len(registry),
    )
    return curve, registry


def advance_windowed(
    prev: GenerationCurve,
    M: int,
    window: Ball,
    *,
    depth: int | None = None,
    leaf_budget: int = DEFAULT_LEAF_BUDGET,
    chord_budget: int = DEFAULT_CHORD_BUDGET,
) -> GenerationCurve:
    """
    Refine only the edges of ``prev`` that meet twice ``window``.

    Edges farther away are kept verbatim; the refined part is expressed in
    a frame centered at the window.
    """
    curve, _ = advance(
        prev,
        M,
        window=window,
        depth=depth,
        leaf_budget=leaf_budget,
        chord_budget=chord_budget,
    )
    return curve


def exact_vertical_ratio(prev: GenerationCurve, M: int, depth: int | None = None) -> float:
    """Length fraction of frozen segments in the full G_{n+1} of ``prev`` (exact DP)."""
    depth = M * M if depth is None else depth
    a, b = prev.edges
    roots = Roots.from_edges(a, b, prev.turns_num, prev.turns_den, M)
    total, vertical = vertical_mass_table(M, depth, roots.alpha, roots.sign, roots.num, roots.den)
    lengths = prev.edge_lengths
    return float(np.dot(lengths, vertical) / np.dot(lengths, total))


def _tagged_ratio(assembled: AssembledCurve) -> float:
    part = assembled.expanded
    lengths = assembled.lengths[part]
    if not len(lengths):
        return 0.0
    return float(lengths[assembled.frozen[part]].sum() / lengths.sum())


# --- Checks ---


@dataclass(frozen=True)
class PersistenceCheck:
    """Distance from the F of one generation to a later curve."""

    generation: int
    residual: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.tolerance


def persistence_residuals(
    registry: FrozenRegistry, curve: GenerationCurve
) -> list[PersistenceCheck]:
    """
    Check that every registered middle half still lies on ``curve``.

    The tolerance for generation k is ``2 * sum(l_j for k < j <= n)`` plus
    1e-9 of the longest entry.
    """
    index = curve.index
    lengths = {block.generation: block.chord_length for block in registry.blocks}
    checks = []
    for block in registry.blocks:
        if block.generation > curve.generation or not len(block):
            continue
        pts = block.frame.map_to(block.sample_points(), curve.frame)
        residual = float(index.distance(pts).max())
        later = sum(
            ell for gen, ell in lengths.items() if block.generation < gen <= curve.generation
        )
        tolerance = 2.0 * later + 1e-9 * float(block.lengths.max())
        checks.append(PersistenceCheck(block.generation, residual, tolerance))
    return checks


def frozen_coverage(
    registry: FrozenRegistry, curve: GenerationCurve, generation: int | None = None
) -> NDArray[np.float64]:
    """Fraction of each registered T covered by frozen edges of ``curve`` along T's line."""
    block = registry.block(curve.generation if generation is None else generation)
    if not len(block):
        return np.empty(0)
    ta = block.frame.map_to(block.a, curve.frame)
    tb = block.frame.map_to(block.b, curve.frame)
    a, b = curve.edges
    fa, fb = a[curve.frozen], b[curve.frozen]
    if not len(fa):
        return np.zeros(len(block))
    index = SpatialIndex(fa, fb)
    out = np.zeros(len(block))
    for i in range(len(block)):
        d = tb[i] - ta[i]
        length = float(np.hypot(*d))
        u = d / length
        tol = 1e-9 * length
        near = index.edges_near(0.5 * (ta[i] + tb[i]), 0.5 * length + tol)
        if not len(near):
            continue
        rel_a, rel_b = fa[near] - ta[i], fb[near] - ta[i]
        off_a = np.abs(rel_a[:, 0] * u[1] - rel_a[:, 1] * u[0])
        off_b = np.abs(rel_b[:, 0] * u[1] - rel_b[:, 1] * u[0])
        on_line = (off_a <= tol) & (off_b <= tol)
        s0 = rel_a[on_line] @ u
        s1 = rel_b[on_line] @ u
        lo = np.clip(np.minimum(s0, s1), 0.0, length)
        hi = np.clip(np.maximum(s0, s1), 0.0, length)
        order = np.argsort(lo)
        covered, reach = 0.0, 0.0
        for left, right in zip(lo[order], hi[order]):
            left = max(left, reach)
            if right > left:
                covered += right - left
                reach = right
        out[i] = covered / length
    return out


@dataclass(frozen=True)
class ProximityCheck:
    """Hausdorff distance between the changed part of a curve and its predecessor."""

    distance: float
    scale: float

    @property
    def constant(self) -> float:
        """distance / (l_n / M)."""
        return self.distance / self.scale


def boundary_proximity(prev: GenerationCurve, nxt: GenerationCurve, M: int) -> ProximityCheck:
    """Two-sided distance between the edges built in ``nxt`` and ``prev``, in ``nxt``'s frame."""
    scale = prev.chord_length / M
    changed = nxt.edge_generation == nxt.generation
    if not changed.any():
        return ProximityCheck(0.0, scale)
    pv = prev.in_frame(nxt.frame)
    pa, pb = pv, np.roll(pv, -1, axis=0)
    na, nb = nxt.edges
    forward = float(SpatialIndex(pa, pb).distance(np.vstack([na[changed], nb[changed]])).max())
    new_index = SpatialIndex(na[changed], nb[changed])
    lo = np.minimum(na[changed].min(axis=0), nb[changed].min(axis=0)) - forward
    hi = np.maximum(na[changed].max(axis=0), nb[changed].max(axis=0)) + forward
    inside = np.all((pv >= lo) & (pv <= hi), axis=1)
    backward = float(new_index.distance(pv[inside]).max()) if inside.any() else 0.0
    return ProximityCheck(max(forward, backward), scale)


__all__ = [
    "DEFAULT_CHORD_BUDGET",
    "AssembledCurve",
    "BuildStats",
    "FineRun",
    "Frame",
    "FrozenEntry",
    "FrozenRegistry",
    "GenerationCurve",
    "Inscription",
    "PersistenceCheck",
    "ProximityCheck",
    "RegistryBlock",
    "SegmentChain",
    "SmoothCurve",
    "advance",
    "advance_windowed",
    "assemble_G",
    "boundary_proximity",
    "edge_length_ratios",
    "exact_vertical_ratio",
    "frozen_coverage",
    "initial_polygon",
    "inscribe",
    "lookahead_window",
    "persistence_residuals",
    "polygon_curve",
    "rechordalize",
    "reduce_turns_array",
    "smooth",
]
