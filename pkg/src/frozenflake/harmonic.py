"""
Harmonic measure by walk on spheres.

A walk started at the pole jumps to a uniform point of the largest circle
around it that stays in the domain, until it comes within epsilon of the
boundary; the nearest boundary point is the absorption point. Exterior walks
that stray beyond ``sphere_cap`` from the boundary center are put back on
that circle with the exact exterior Poisson kernel, so they stay unbiased
and terminate (planar Brownian motion is recurrent).

Walk w draws from its own Philox stream: the key comes from the seed and
the counter starts at block w. Walks are simulated in chunks on a thread
pool and merged in walk order, so results depend on neither the chunk size
nor the number of workers.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Literal

import numpy as np

from frozenflake.errors import (
    EmptyWindowError,
    InsufficientSamplesWarning,
    InvalidInputError,
    InvalidParameterError,
    WalkTimeoutWarning,
)
from frozenflake.geometry import TAU, Ball, Point, classify_points, point_set_diameter
from frozenflake.refine import Frame
from frozenflake.regularity import FlatnessResult
from frozenflake.spatial import SpatialIndex


if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from numpy.typing import ArrayLike, NDArray

    from frozenflake.geometry import PointLike
    from frozenflake.refine import FrozenRegistry, GenerationCurve

    _Chunk = tuple[NDArray[np.float64], NDArray[np.int64], NDArray[np.int64]]


logger = logging.getLogger(__name__)

Side = Literal["interior", "exterior"]

TIMEOUT_TOLERANCE = 1e-3
STREAM_BLOCK = 32
BOUNDARY_BAND = 1e-9
MIN_ABSORPTIONS = 10_000
Z95 = 1.959963984540054


# --- Configuration ---


@dataclass(frozen=True)
class WosConfig:
    """
    Walk parameters.

    ``epsilon`` (absolute) overrides ``epsilon_fraction``, which is taken
    relative to the length of the nearest edge. ``chunk_size`` walks are
    simulated together per task; walk results depend on ``seed`` only.
    """

    walks: int = 100_000
    epsilon_fraction: float = 0.25
    epsilon: float | None = None
    max_steps: int = 1_000_000
    sphere_cap_factor: float = 10.0
    seed: int = 0
    workers: int = 1
    chunk_size: int = 10_000

    def __post_init__(self) -> None:
        if self.walks < 1:
            raise InvalidParameterError(f"walks must be positive, got {self.walks}")
        if not self.epsilon_fraction > 0:
            raise InvalidParameterError(
                f"epsilon_fraction must be positive, got {self.epsilon_fraction}"
            )
        if self.epsilon is not None and not self.epsilon > 0:
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_steps < 1:
            raise InvalidParameterError(f"max_steps must be positive, got {self.max_steps}")
        if self.sphere_cap_factor < 1.0:
            raise InvalidParameterError(
                f"sphere_cap_factor must be >= 1, got {self.sphere_cap_factor}"
            )
        if self.workers < 1 or self.chunk_size < 1:
            raise InvalidParameterError("workers and chunk_size must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


# --- Boundary ---


@dataclass(frozen=True, eq=False)
class WosBoundary:
    """Immutable boundary for walks: edges, tags, per-edge absorption distance."""

    vertices: NDArray[np.float64]
    frozen: NDArray[np.bool_]
    eps: NDArray[np.float64]
    index: SpatialIndex
    frame: Frame = field(default_factory=Frame)

    @classmethod
    def from_curve(cls, curve: GenerationCurve, cfg: WosConfig | None = None) -> WosBoundary:
        cfg = cfg if cfg is not None else WosConfig()
        if cfg.epsilon is not None:
            eps = np.full(len(curve), cfg.epsilon)
        else:
            eps = cfg.epsilon_fraction * curve.edge_lengths
        return cls(
            vertices=np.asarray(curve.vertices),
            frozen=np.asarray(curve.frozen),
            eps=eps,
            index=curve.index,
            frame=curve.frame,
        )

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    @cached_property
    def normals(self) -> NDArray[np.float64]:
        """Unit outer normals; exactly (1, 0) on frozen edges."""
        a, b = self.edges
        d = b - a
        d /= np.hypot(d[:, 0], d[:, 1])[:, None]
        n = np.column_stack([-d[:, 1], d[:, 0]])
        n[self.frozen] = (1.0, 0.0)
        return n

    @cached_property
    def cumulative_length(self) -> NDArray[np.float64]:
        """Arc length at the start of each edge, plus the total at the end."""
        return np.concatenate([[0.0], np.cumsum(self.edge_lengths)])

    @cached_property
    def center(self) -> NDArray[np.float64]:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return 0.5 * (lo + hi)

    @cached_property
    def diameter(self) -> float:
        return point_set_diameter(self.vertices)

    @cached_property
    def edge_lengths(self) -> NDArray[np.float64]:
        a, b = self.edges
        return np.hypot(*(b - a).T)

    def classify(self, points: ArrayLike) -> NDArray[np.int8]:
        """1 inside, 0 outside, -1 within a band of 1e-9 of the nearest edge length."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        _, edge, _ = self.index.nearest(pts)
        return classify_points(pts, self.vertices, BOUNDARY_BAND * self.edge_lengths[edge])

    def arc_position(
        self, edges: NDArray[np.int64], points: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        """Arc length coordinate of points lying on the given edges."""
        a = self.vertices[edges]
        return self.cumulative_length[edges] + np.hypot(*(points - a).T)

    def point_at(self, s: ArrayLike) -> NDArray[np.float64]:
        """Points at arc length ``s`` (taken modulo the total length)."""
        cum = self.cumulative_length
        s = np.mod(np.asarray(s, dtype=np.float64), cum[-1])
        e = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(self) - 1)
        a, b = self.edges
        t = (s - cum[e]) / (cum[e + 1] - cum[e])
        return a[e] + t[:, None] * (b[e] - a[e])


# --- Walks ---


@dataclass(frozen=True, eq=False)
class WalkResult:
    """Absorption points and edges of a batch of walks; timeouts have edge -1."""

    side: Side
    pole: Point
    points: NDArray[np.float64]
    edges: NDArray[np.int64]
    steps: NDArray[np.int64]

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def absorbed(self) -> NDArray[np.bool_]:
        return self.edges >= 0

    @property
    def timeouts(self) -> int:
        return int(np.count_nonzero(self.edges < 0))


def _check_pole(boundary: WosBoundary, pole: NDArray[np.float64], side: Side) -> None:
    code = int(boundary.classify(pole)[0])
    want = 1 if side == "interior" else 0
    if code != want:
        where = {1: "inside", 0: "outside", -1: "on the boundary"}[code]
        raise InvalidInputError(f"{side} pole ({pole[0]}, {pole[1]}) lies {where}")
    dist, edge, _ = boundary.index.nearest(pole)
    if dist[0] <= boundary.eps[edge[0]]:
        raise InvalidInputError(
            f"pole is within epsilon {boundary.eps[edge[0]]:.3e} of the boundary"
        )


class _WalkStreams:
    """
    One Philox stream per walk, read in blocks of ``STREAM_BLOCK`` uniforms.

    Walk ``first + i`` starts at counter ``(first + i) * 2**128`` under the
    seed's key, so its draws are the same whichever chunk it runs in.
    """

    def __init__(self, key: NDArray[np.uint64], first: int, count: int) -> None:
        self._generators = [
            np.random.Generator(np.random.Philox(key=key, counter=(first + i) << 128))
            for i in range(count)
        ]
        self._buffer = np.empty((count, STREAM_BLOCK))

    def draw(self, walks: NDArray[np.int64], step: int) -> NDArray[np.float64]:
        """The uniform of each walk (chunk-local index) at ``step``."""
        column = step % STREAM_BLOCK
        if column == 0:
            for w in walks.tolist():
                self._buffer[w] = self._generators[w].random(STREAM_BLOCK)
        return self._buffer[walks, column]


def _stream_key(seed: int) -> NDArray[np.uint64]:
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def _enter_cap(
    rel: NDArray[np.float64], cap: float, u: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Hitting point on the cap circle for walkers outside it (exterior Poisson kernel)."""
    z = (rel[:, 0] + 1j * rel[:, 1]) / cap
    a = 1.0 / np.conj(z)
    zeta = np.exp(1j * TAU * u)
    w = (zeta + a) / (1.0 + np.conj(a) * zeta)
    return cap * np.column_stack([w.real, w.imag])


def _walk_chunk(
    boundary: WosBoundary,
    start: NDArray[np.float64],
    exterior: bool,
    count: int,
    max_steps: int,
    cap: float,
    streams: _WalkStreams,
) -> _Chunk:
    x = np.tile(start, (count, 1))
    points = np.full((count, 2), np.nan)
    edges = np.full(count, -1, dtype=np.int64)
    steps = np.full(count, max_steps, dtype=np.int64)
    alive = np.arange(count)
    eps_max = float(boundary.eps.max())
    origin = boundary.center

    for step in range(max_steps):
        if not alive.size:
            break
        p = x[alive]
        lower, upper = boundary.index.distance_bounds(p)
        radius = lower
        exact = np.flatnonzero((lower <= eps_max) | (lower < 0.5 * upper))
        done = np.zeros(len(alive), dtype=bool)
        if exact.size:
            d, e, foot = boundary.index.nearest(p[exact])
            hit = d <= boundary.eps[e]
            rows = alive[exact[hit]]
            points[rows] = foot[hit]
            edges[rows] = e[hit]
            steps[rows] = step
            done[exact[hit]] = True
            radius[exact] = d
        live = ~done
        alive, p, radius = alive[live], p[live], radius[live]
        if not alive.size:
            break

        u = streams.draw(alive, step)
        jump = np.zeros(len(alive), dtype=bool)
        if exterior:
            rel = p - origin
            jump = np.hypot(rel[:, 0], rel[:, 1]) > cap
            if jump.any():
                p[jump] = origin + _enter_cap(rel[jump], cap, u[jump])
            radius = np.minimum(radius, cap)
        move = ~jump
        theta = TAU * u[move]
        p[move, 0] += radius[move] * np.cos(theta)
        p[move, 1] += radius[move] * np.sin(theta)
        x[alive] = p

    return points, edges, steps


def run_walks(
    boundary: WosBoundary,
    pole: PointLike,
    side: Side = "interior",
    cfg: WosConfig | None = None,
    *,
    walks: int | None = None,
) -> WalkResult:
    """
    Simulate ``walks`` (default ``cfg.walks``) walks from ``pole``.

    Raises:
        InvalidInputError: If the pole is not strictly on ``side`` or lies
            within epsilon of the boundary.

    Warns:
        WalkTimeoutWarning: If at least 0.1% of the walks hit ``max_steps``.
    """
    cfg = cfg if cfg is not None else WosConfig()
    if side not in ("interior", "exterior"):
        raise InvalidParameterError(f"side must be 'interior' or 'exterior', got {side!r}")
    start = np.array(Point.of(pole).as_array())
    _check_pole(boundary, start, side)
    n = cfg.walks if walks is None else walks
    cap = cfg.sphere_cap_factor * boundary.diameter
    size = cfg.chunk_size
    chunks = [(k * size, min(size, n - k * size)) for k in range(-(-n // size))]
    key = _stream_key(cfg.seed)

    def task(chunk: tuple[int, int]) -> _Chunk:
        first, count = chunk
        streams = _WalkStreams(key, first, count)
        return _walk_chunk(
            boundary, start, side == "exterior", count, cfg.max_steps, cap, streams
        )

    if cfg.workers == 1:
        parts = [task(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(task, chunks))

    result = WalkResult(
        side=side,
        pole=Point(*start),
        points=np.concatenate([part[0] for part in parts]),
        edges=np.concatenate([part[1] for part in parts]),
        steps=np.concatenate([part[2] for part in parts]),
    )
    if result.timeouts >= TIMEOUT_TOLERANCE * n:
        warnings.warn(
            f"{result.timeouts} of {n} walks exceeded {cfg.max_steps} steps",
            WalkTimeoutWarning,
            stacklevel=2,
        )
    logger.info(
        "%d %s walks from (%.6g, %.6g): %d timeouts, mean %.1f steps",
        n,
        side,
        start[0],
        start[1],
        result.timeouts,
        float(result.steps[result.absorbed].mean()) if result.absorbed.any() else math.nan,
    )
    return result


def wos_absorb(
    boundary: WosBoundary, pole: PointLike, side: Side = "interior", cfg: WosConfig | None = None
) -> tuple[Point | None, int]:
    """
    One walk: the absorption point and the index of its nearest edge.

    A timed-out walk returns ``(None, -1)``.
    """
    result = run_walks(boundary, pole, side, cfg, walks=1)
    if not result.absorbed[0]:
        return None, -1
    return Point(*result.points[0]), int(result.edges[0])


# --- Poles ---


def interior_pole(boundary: WosBoundary, grid: int = 64) -> Point:
    """Interior grid point farthest from the boundary."""
    lo, hi = boundary.vertices.min(axis=0), boundary.vertices.max(axis=0)
    return _farthest(boundary, _grid(lo, hi, grid), 1)


def exterior_pole(boundary: WosBoundary) -> Point:
    """Point 1.5 diameters to the right of the boundary center."""
    c = boundary.center
    return Point(float(c[0] + 1.5 * boundary.diameter), float(c[1]))


def corkscrew_pole(
    boundary: WosBoundary, ball: Ball, side: Side = "interior", grid: int = 48
) -> Point:
    """
    Grid point of ``ball`` on ``side`` farthest from the boundary.

    Raises:
        EmptyWindowError: If no grid point of the ball lies on that side.
    """
    c, r = ball.center.as_array(), ball.radius
    pts = _grid(c - r, c + r, grid)
    pts = pts[np.hypot(*(pts - c).T) <= r]
    return _farthest(boundary, pts, 1 if side == "interior" else 0)


def _grid(lo: NDArray[np.float64], hi: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    xs = np.linspace(lo[0], hi[0], n + 2)[1:-1]
    ys = np.linspace(lo[1], hi[1], n + 2)[1:-1]
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def _farthest(boundary: WosBoundary, pts: NDArray[np.float64], code: int) -> Point:
    keep = pts[boundary.classify(pts) == code] if len(pts) else pts
    if not len(keep):
        raise EmptyWindowError("no candidate pole on the requested side")
    d = boundary.index.distance(keep)
    return Point(*keep[int(np.argmax(d))])


# --- Estimates ---


@dataclass(frozen=True)
class MeasureEstimate:
    """
    Hit counts of boundary targets out of ``total_walks`` absorbed walks.

    For a conditional estimate ``total_walks`` counts the walks absorbed in
    the conditioning set and ``walks`` the walks run.
    """

    total_walks: int
    hits: Mapping[str, int]
    epsilon: float
    timeouts: int = 0
    walks: int = 0

    def _target(self, target: str | None) -> str:
        return next(iter(self.hits)) if target is None else target

    def fraction(self, target: str | None = None) -> float:
        if self.total_walks == 0:
            return math.nan
        return self.hits[self._target(target)] / self.total_walks

    def half_width(self, target: str | None = None) -> float:
        """95% normal-approximation half-width 1.96 sqrt(p (1 - p) / n)."""
        if self.total_walks == 0:
            return math.nan
        p = self.fraction(target)
        return Z95 * math.sqrt(p * (1.0 - p) / self.total_walks)

    def interval(self, target: str | None = None) -> tuple[float, float]:
        p, h = self.fraction(target), self.half_width(target)
        return (p - h, p + h)


def estimate(
    result: WalkResult, targets: Mapping[str, NDArray[np.bool_]], epsilon: float
) -> MeasureEstimate:
    """Turn per-walk target masks (over absorbed walks) into a MeasureEstimate."""
    ok = result.absorbed
    hits = {name: int(np.count_nonzero(mask)) for name, mask in targets.items()}
    return MeasureEstimate(
        total_walks=int(np.count_nonzero(ok)),
        hits=hits,
        epsilon=epsilon,
        timeouts=result.timeouts,
        walks=len(result),
    )


def measure_of_F(
    boundary: WosBoundary,
    registry: FrozenRegistry | None,
    cfg: WosConfig | None = None,
    *,
    window: Ball | None = None,
    pole: PointLike | None = None,
) -> MeasureEstimate:
    """
    Interior harmonic measure of F, or of F inside ``window`` relative to the window.

    An absorption counts for F when its nearest edge is frozen and, with a
    registry, its foot lies on the middle half of a registered piece.
    Without a window the pole is the interior grid point farthest from the
    boundary; with one, the corkscrew point of the window.

    Raises:
        EmptyWindowError: If the window does not meet the boundary.
    """
    cfg = cfg if cfg is not None else WosConfig()
    if window is not None:
        c = window.center.as_array()
        if float(boundary.index.distance(c)[0]) > window.radius:
            raise EmptyWindowError(
                f"window at ({c[0]:.6g}, {c[1]:.6g}) with radius {window.radius:.3e} "
                "misses the boundary"
            )
    if pole is None:
        pole = interior_pole(boundary) if window is None else corkscrew_pole(boundary, window)
    result = run_walks(boundary, pole, "interior", cfg)
    ok = result.absorbed
    feet, e = result.points[ok], result.edges[ok]
    in_f = boundary.frozen[e]
    if registry is not None and in_f.any():
        rows = np.flatnonzero(in_f)
        in_f[rows] = registry.contains(feet[rows], frame=boundary.frame)
    eps = float(np.median(boundary.eps))

    if window is None:
        est = estimate(result, {"F": in_f}, eps)
    else:
        inside = np.hypot(*(feet - window.center.as_array()).T) <= window.radius
        est = MeasureEstimate(
            total_walks=int(np.count_nonzero(inside)),
            hits={"F": int(np.count_nonzero(in_f & inside))},
            epsilon=eps,
            timeouts=result.timeouts,
            walks=len(result),
        )
        if est.total_walks == 0:
            warnings.warn(
                "no walk was absorbed inside the window", InsufficientSamplesWarning, stacklevel=2
            )
    logger.info(
        "omega(F) = %.4f +- %.4f over %d walks", est.fraction(), est.half_width(), est.total_walks
    )
    return est


@dataclass(frozen=True)
class LocalMeasure:
    """Conditional omega(F) in one ball around a frozen piece of ``generation``."""

    ball: Ball
    generation: int
    estimate: MeasureEstimate


def localized_measure_of_F(
    boundary: WosBoundary,
    registry: FrozenRegistry,
    cfg: WosConfig | None = None,
    *,
    scales: Sequence[float] = (1.0, 0.5),
) -> list[LocalMeasure]:
    """
    omega(F inside B) / omega(B) at nested balls around the finest frozen piece.

    The balls share the midpoint of the longest piece of the finest
    generation that registered any, with radius ``s`` times its length for
    each ``s`` in ``scales``. Each ball is measured from its own corkscrew
    pole; a ball without one is skipped with a warning.

    Raises:
        EmptyWindowError: If the registry has no frozen piece.
        InvalidParameterError: If a scale is not positive.
    """
    if any(not s > 0 for s in scales):
        raise InvalidParameterError(f"scales must be positive, got {tuple(scales)}")
    blocks = [block for block in registry.blocks if len(block)]
    if not blocks:
        raise EmptyWindowError("registry has no frozen piece")
    block = blocks[-1]
    i = int(np.argmax(block.lengths))
    length = float(block.lengths[i])
    mid = block.frame.map_to(0.5 * (block.a[i] + block.b[i]), boundary.frame)
    center = Point(float(mid[0]), float(mid[1]))

    out = []
    for s in scales:
        ball = Ball(center, s * length)
        try:
            est = measure_of_F(boundary, registry, cfg, window=ball)
        except EmptyWindowError as e:
            logger.warning("skipping ball of radius %.3e: %s", ball.radius, e)
            continue
        out.append(LocalMeasure(ball, block.generation, est))
    return out


# --- Normal oscillation ---


@dataclass(frozen=True)
class NormalOscillation:
    """
    omega-weighted oscillation of the outer normal in one ball.

    ``mean_oscillation`` is the average of |N - mean N| and
    ``line_oscillation`` the average of |N - N_B| over absorptions in the
    ball (None when no N_B was supplied).
    """

    ball: Ball
    absorbed: int
    mean_normal: tuple[float, float]
    mean_oscillation: float
    line_oscillation: float | None = None
    line_normal: tuple[float, float] | None = None


def _no_absorptions(ball: Ball, line_normal: tuple[float, float] | None) -> NormalOscillation:
    return NormalOscillation(ball, 0, (math.nan, math.nan), math.nan, None, line_normal)


def omega_weighted_normal_oscillation(
    boundary: WosBoundary,
    balls: Sequence[Ball | FlatnessResult],
    cfg: WosConfig | None = None,
    *,
    pole: PointLike | None = None,
    min_absorptions: int = MIN_ABSORPTIONS,
) -> list[NormalOscillation]:
    """
    Average deviation of N from its omega-mean and from N_B, per ball.

    Each absorbed point carries the normal of its nearest edge. Unless a
    pole is given, each ball gets its own corkscrew pole.

    Warns:
        InsufficientSamplesWarning: If fewer than ``min_absorptions`` walks
            end inside a ball.
    """
    cfg = cfg if cfg is not None else WosConfig()
    shared = run_walks(boundary, pole, "interior", cfg) if pole is not None else None
    out = []
    for item in balls:
        ball = item.ball if isinstance(item, FlatnessResult) else item
        line_normal = item.line_normal if isinstance(item, FlatnessResult) else None
        if shared is not None:
            result = shared
        else:
            try:
                start = corkscrew_pole(boundary, ball)
            except EmptyWindowError as e:
                logger.warning("skipping ball of radius %.3e: %s", ball.radius, e)
                out.append(_no_absorptions(ball, line_normal))
                continue
            result = run_walks(boundary, start, "interior", cfg)
        ok = result.absorbed
        feet, e = result.points[ok], result.edges[ok]
        inside = np.hypot(*(feet - ball.center.as_array()).T) <= ball.radius
        normals = boundary.normals[e[inside]]
        count = len(normals)
        if count < min_absorptions:
            warnings.warn(
                f"only {count} absorptions inside ball of radius {ball.radius:.3e}",
                InsufficientSamplesWarning,
                stacklevel=2,
            )
        if count == 0:
            out.append(_no_absorptions(ball, line_normal))
            continue
        mean = normals.mean(axis=0)
        spread = float(np.hypot(*(normals - mean).T).mean())
        against = None
        if line_normal is not None:
            against = float(np.hypot(*(normals - np.asarray(line_normal)).T).mean())
        out.append(
            NormalOscillation(
                ball=ball,
                absorbed=count,
                mean_normal=(float(mean[0]), float(mean[1])),
                mean_oscillation=spread,
                line_oscillation=against,
                line_normal=line_normal,
            )
        )
    return out


# --- Two-sided density ratio ---


@dataclass(frozen=True)
class DensityOscillation:
    """
    Mean oscillation of log(omega- / omega+) over boundary arcs of length ``scale``.

    ``values[i]`` is the statistic of the ball of radius 5 ``scale``
    centered at ``centers[i]``; ``statistic`` is their maximum.
    """

    scale: float
    statistic: float
    centers: NDArray[np.float64]
    values: NDArray[np.float64]
    arcs: int
    excluded_arcs: int
    walks: int

    @property
    def worst_center(self) -> Point | None:
        if not len(self.values) or np.all(np.isnan(self.values)):
            return None
        return Point(*self.centers[int(np.nanargmax(self.values))])


def density_ratio_oscillation(
    boundary: WosBoundary,
    scale: float,
    cfg: WosConfig | None = None,
    *,
    interior: PointLike | None = None,
    exterior: PointLike | None = None,
    balls: Sequence[Ball] | None = None,
    max_balls: int = 256,
) -> DensityOscillation:
    """
    sup over balls B of sum_{I in B} omega+(I) |log(omega-(I)/omega+(I)) - m_B|^2 / omega+(B).

    The boundary is cut into arcs of length ``scale`` by arc length. Arcs
    with no hit on either side are left out and counted. Balls have radius
    5 ``scale``; by default they are centered at evenly chosen arc midpoints.
    """
    if not scale > 0:
        raise InvalidParameterError(f"scale must be positive, got {scale}")
    cfg = cfg if cfg is not None else WosConfig()
    interior = interior_pole(boundary) if interior is None else interior
    exterior = exterior_pole(boundary) if exterior is None else exterior
    total = float(boundary.cumulative_length[-1])
    arcs = max(1, math.ceil(total / scale))

    def arc_mass(side: Side, pole: PointLike) -> NDArray[np.float64]:
        result = run_walks(boundary, pole, side, cfg)
        ok = result.absorbed
        s = boundary.arc_position(result.edges[ok], result.points[ok])
        k = np.minimum((s / scale).astype(np.int64), arcs - 1)
        counts = np.bincount(k, minlength=arcs).astype(np.float64)
        return counts / max(int(np.count_nonzero(ok)), 1)

    plus = arc_mass("interior", interior)
    minus = arc_mass("exterior", exterior)
    valid = (plus > 0) & (minus > 0)
    log_ratio = np.zeros(arcs)
    log_ratio[valid] = np.log(minus[valid] / plus[valid])
    mids = boundary.point_at((np.arange(arcs) + 0.5) * scale)
    mids[-1] = boundary.point_at(np.array([0.5 * ((arcs - 1) * scale + total)]))[0]

    if balls is None:
        picks = np.unique(np.linspace(0, arcs - 1, min(max_balls, arcs)).astype(np.int64))
        centers = mids[picks]
        radii = np.full(len(centers), 5.0 * scale)
    else:
        centers = np.array([b.center.as_array() for b in balls]).reshape(-1, 2)
        radii = np.array([b.radius for b in balls], dtype=np.float64)
    values = np.full(len(centers), np.nan)
    for i, (c, r) in enumerate(zip(centers, radii)):
        member = valid & (np.hypot(*(mids - c).T) + 0.5 * scale <= r)
        w = plus[member]
        if w.sum() <= 0:
            continue
        m = float(np.dot(w, log_ratio[member]) / w.sum())
        values[i] = float(np.dot(w, (log_ratio[member] - m) ** 2) / w.sum())

    statistic = float(np.nanmax(values)) if np.any(~np.isnan(values)) else math.nan
    excluded = int(np.count_nonzero(~valid))
    logger.info(
        "density ratio oscillation at scale %.3e: %.4f (%d arcs, %d excluded)",
        scale,
        statistic,
        arcs,
        excluded,
    )
    return DensityOscillation(
        scale=scale,
        statistic=statistic,
        centers=centers,
        values=values,
        arcs=arcs,
        excluded_arcs=excluded,
        walks=cfg.walks,
    )


__all__ = [
    "MIN_ABSORPTIONS",
    "DensityOscillation",
    "LocalMeasure",
    "MeasureEstimate",
    "NormalOscillation",
    "WalkResult",
    "WosBoundary",
    "WosConfig",
    "corkscrew_pole",
    "density_ratio_oscillation",
    "estimate",
    "exterior_pole",
    "interior_pole",
    "localized_measure_of_F",
    "measure_of_F",
    "omega_weighted_normal_oscillation",
    "run_walks",
    "wos_absorb",
]
