"""
Quantitative checks on generated boundaries.

    ahlfors_scan            H^1(curve in B(x, r)) / 2r over sampled balls
    reifenberg_profile      per-radius sup of the two-sided flatness D(x, r)
    flatness_failure_balls  the balls around the tracked horizontal chords
    vertical_mass_per_generation  frozen length fractions

All scans are read-only over immutable curves. Balls are evaluated in the
frame of the curve being scanned.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from frozenflake.errors import (
    ConstructionError,
    DegenerateInputError,
    InvalidParameterError,
    ResolutionWarning,
)
from frozenflake.geometry import (
    Ball,
    Point,
    best_fit_line,
    classify_points,
    clip_segments,
    clipped_lengths,
    sample_segments,
)


if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray

    from frozenflake.refine import FrozenRegistry, GenerationCurve


logger = logging.getLogger(__name__)

AHLFORS_BOUNDS = (0.4, 4.0)
VERTICAL_MASS_FLOOR = 0.02
NORMAL_DEVIATION_FLOOR = 1.2

_MAX_SAMPLE_POINTS = 40_000


# --- Results ---


@dataclass(frozen=True)
class FlatnessResult:
    """
    Best-fit line of the boundary in one ball.

    ``line_normal`` is the unit normal N_B of the best line, oriented toward
    the exterior. ``contained`` is False when the ball had to be moved by
    more than a tenth of its radius to sit on the curve.
    """

    center: Point
    radius: float
    D: float
    line_normal: tuple[float, float]
    generation: int | None = None
    contained: bool = True

    @property
    def normal_deviation(self) -> float:
        """|N_B - (1, 0)|."""
        nx, ny = self.line_normal
        return math.hypot(nx - 1.0, ny)

    @property
    def ball(self) -> Ball:
        return Ball(self.center, self.radius)


@dataclass(frozen=True)
class ReifenbergProfile:
    """sup_x D(x, r) per radius, radii in decreasing order."""

    radii: NDArray[np.float64]
    sup: NDArray[np.float64]
    argmax: NDArray[np.float64]
    centers: int

    def __len__(self) -> int:
        return len(self.radii)

    def decays(self) -> bool:
        """Value at the finest radius does not exceed the value at the coarsest."""
        return bool(len(self.sup) == 0 or self.sup[-1] <= self.sup[0])

    def spread(self) -> float:
        """max - min of the profile; small for a scale-invariant corner."""
        return float(np.ptp(self.sup)) if len(self.sup) else 0.0


@dataclass(frozen=True)
class VerticalMass:
    """Frozen length fraction of one generation."""

    generation: int
    tagged: float
    exact: float | None = None
    registered_length: float | None = None

    @property
    def ratio(self) -> float:
        """The exact DP value where available, the tag count otherwise."""
        return self.exact if self.exact is not None else self.tagged


@dataclass(frozen=True)
class RegularityReport:
    """
    Ahlfors samples plus whatever other scans were attached.

    Samples are stored column-wise: ``centers[i]``, ``radii[i]`` and
    ``ratios[i]`` describe ball i.
    """

    centers: NDArray[np.float64]
    radii: NDArray[np.float64]
    ratios: NDArray[np.float64]
    skipped_radii: tuple[float, ...] = ()
    profile: ReifenbergProfile | None = None
    vertical: tuple[VerticalMass, ...] = ()
    failure_balls: tuple[FlatnessResult, ...] = ()
    generation: int | None = None
    bounds: tuple[float, float] = field(default=AHLFORS_BOUNDS)

    def __len__(self) -> int:
        return len(self.ratios)

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min()) if len(self) else math.nan

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max()) if len(self) else math.nan

    def worst(self) -> tuple[Point, float, float] | None:
        """Ball whose ratio is farthest (in log scale) from 1."""
        if not len(self):
            return None
        i = int(np.argmax(np.abs(np.log(self.ratios))))
        return Point(*self.centers[i]), float(self.radii[i]), float(self.ratios[i])

    def within(self, lo: float | None = None, hi: float | None = None) -> bool:
        lo = self.bounds[0] if lo is None else lo
        hi = self.bounds[1] if hi is None else hi
        return bool(np.all((self.ratios >= lo) & (self.ratios <= hi)))

    def by_radius(self) -> dict[float, tuple[float, float]]:
        """``{r: (min ratio, max ratio)}``."""
        out: dict[float, tuple[float, float]] = {}
        for r in np.unique(self.radii)[::-1]:
            part = self.ratios[self.radii == r]
            out[float(r)] = (float(part.min()), float(part.max()))
        return out


# --- Ahlfors regularity ---


def ahlfors_ratio(curve: GenerationCurve, center: ArrayLike, radius: float) -> float:
    """H^1(curve in B(center, radius)) / (2 radius), with exact segment clipping."""
    if not radius > 0:
        raise InvalidParameterError(f"radius must be positive, got {radius}")
    a, b = curve.edges
    near = curve.index.edges_near(center, radius)
    if not len(near):
        return 0.0
    length = float(clipped_lengths(a[near], b[near], center, radius).sum())
    return length / (2.0 * radius)


def dyadic_radii(
    curve: GenerationCurve, smallest: float, largest: float | None = None
) -> list[float]:
    """largest, largest/2, ... down to ``smallest``; ``largest`` defaults to diam/4."""
    if largest is None:
        largest = curve.polyline.diameter / 4.0
    radii = []
    r = largest
    while r >= smallest and len(radii) < 64:
        radii.append(r)
        r /= 2.0
    return radii


def ahlfors_scan(
    curve: GenerationCurve,
    samples: int = 100,
    radii: Sequence[float] | None = None,
    *,
    resolution: float | None = None,
) -> RegularityReport:
    """
    Ahlfors ratios at evenly spaced vertices over a list of radii.

    Args:
        curve: Closed boundary to scan.
        samples: Number of ball centers (vertices, evenly spaced by index).
        radii: Radii to test; defaults to the dyadic radii from diam/4
            down to twice the resolution.
        resolution: Smallest meaningful length; defaults to the shortest
            chord length of the curve's fine runs.

    Returns:
        RegularityReport with one sample per (center, radius).

    Warns:
        ResolutionWarning: For radii below twice the resolution (skipped).

    Example:
        >>> from frozenflake.fixtures import circle
        >>> report = ahlfors_scan(circle(), samples=8, radii=[0.05])
        >>> abs(report.max_ratio - 1.0) < 1e-3
        True
    """
    if samples < 1:
        raise InvalidParameterError(f"need at least one sample, got {samples}")
    ell = _resolution(curve) if resolution is None else resolution
    if radii is None:
        radii = dyadic_radii(curve, 2.0 * ell)
    usable, skipped = _split_radii(radii, 2.0 * ell)

    n = len(curve)
    picks = np.unique(np.linspace(0, n - 1, min(samples, n)).astype(np.int64))
    centers = curve.vertices[picks]
    rows_c, rows_r, rows_q = [], [], []
    for r in usable:
        for c in centers:
            rows_c.append(c)
            rows_r.append(r)
            rows_q.append(ahlfors_ratio(curve, c, r))
    report = RegularityReport(
        centers=np.array(rows_c).reshape(-1, 2),
        radii=np.array(rows_r, dtype=np.float64),
        ratios=np.array(rows_q, dtype=np.float64),
        skipped_radii=tuple(skipped),
        generation=curve.generation,
    )
    logger.info(
        "ahlfors scan of generation %d: %d balls, ratios in [%.4f, %.4f]",
        curve.generation,
        len(report),
        report.min_ratio,
        report.max_ratio,
    )
    return report


# --- Flatness ---


def boundary_sample(
    curve: GenerationCurve, center: ArrayLike, reach: float, spacing: float
) -> NDArray[np.float64]:
    """Points of the curve within ``reach`` of ``center``, at most about ``spacing`` apart."""
    a, b = curve.edges
    near = curve.index.edges_near(center, reach)
    if not len(near):
        return np.empty((0, 2))
    ca, cb = clip_segments(a[near], b[near], center, reach)
    lengths = np.hypot(*(cb - ca).T)
    long = lengths > spacing
    pts = np.vstack([ca[~long], cb[~long], sample_segments(ca[long], cb[long], spacing)])
    if len(pts) > _MAX_SAMPLE_POINTS:
        cells = np.floor(pts / (0.5 * spacing)).astype(np.int64)
        _, first = np.unique(cells, axis=0, return_index=True)
        pts = pts[np.sort(first)]
    return pts


def flatness_at(
    curve: GenerationCurve,
    center: ArrayLike,
    radius: float,
    *,
    spacing_fraction: float = 1.0 / 500.0,
) -> FlatnessResult:
    """
    Two-sided flatness D(center, radius) of the curve, with N_B toward the exterior.

    E is sampled at ``radius * spacing_fraction`` within 1.25 radius so that
    distances from the line near the sphere see the curve just outside.

    Raises:
        DegenerateInputError: If the ball holds fewer than 2 curve points.
    """
    c = np.asarray(center, dtype=np.float64)
    pts = boundary_sample(curve, c, 1.25 * radius, radius * spacing_fraction)
    ball = Ball(Point(*c), radius)
    fit = best_fit_line(pts, ball, spacing_fraction=spacing_fraction)
    nu = np.asarray(fit.normal)
    outward = fit.point.as_array() + 0.5 * radius * nu
    if classify_points(outward, curve.vertices)[0] == 1:
        nu = -nu
    return FlatnessResult(
        center=ball.center,
        radius=radius,
        D=fit.deviation,
        line_normal=(float(nu[0]), float(nu[1])),
        generation=curve.generation,
    )


def reifenberg_profile(
    curve: GenerationCurve,
    radii: Sequence[float] | None = None,
    *,
    max_centers: int = 64,
    spacing_fraction: float = 1.0 / 500.0,
    resolution: float | None = None,
    generation: int | None = None,
) -> ReifenbergProfile:
    """
    sup over sampled centers of D(x, r), for each radius.

    Centers are every 4th vertex plus the midpoints of frozen edges,
    thinned evenly to ``max_centers``. Radii below four times the
    resolution are skipped with a ResolutionWarning. With ``generation``,
    only balls that meet edges of that generation alone count, and radii
    without such a ball are left out of the profile.

    Example:
        >>> from frozenflake.fixtures import circle
        >>> profile = reifenberg_profile(circle(), [0.2], max_centers=4)
        >>> float(profile.sup[0]) < 0.1
        True
    """
    ell = _resolution(curve) if resolution is None else resolution
    if radii is None:
        radii = dyadic_radii(curve, 4.0 * ell)
    usable, _ = _split_radii(radii, 4.0 * ell)
    centers = profile_centers(curve, max_centers, generation)

    kept, sups, where = [], [], []
    for r in usable:
        pool = centers if generation is None else fresh_centers(curve, centers, r, generation)
        if not len(pool):
            logger.debug("reifenberg r=%.3e: no ball on generation %s alone", r, generation)
            continue
        best, best_c = -1.0, pool[0]
        for c in pool:
            try:
                value = flatness_at(curve, c, r, spacing_fraction=spacing_fraction).D
            except DegenerateInputError:
                continue
            if value > best:
                best, best_c = value, c
        kept.append(r)
        sups.append(max(best, 0.0))
        where.append(best_c)
        logger.debug("reifenberg r=%.3e: sup D=%.4f", r, best)
    return ReifenbergProfile(
        radii=np.array(kept, dtype=np.float64),
        sup=np.array(sups, dtype=np.float64),
        argmax=np.array(where).reshape(-1, 2),
        centers=len(centers),
    )


def generation_flatness(
    curve: GenerationCurve,
    radius: float | None = None,
    *,
    max_centers: int = 64,
    spacing_fraction: float = 1.0 / 500.0,
) -> float:
    """
    sup of D(x, radius) over vertices whose ball only meets edges of this generation.

    ``radius`` defaults to 16 chord lengths, the scale at which successive
    generations are compared.

    Raises:
        DegenerateInputError: If no vertex qualifies.
    """
    r = 16.0 * curve.chord_length if radius is None else radius
    idx = np.flatnonzero(curve.edge_generation == curve.generation)
    fresh = fresh_centers(curve, curve.vertices[idx], r, curve.generation)
    if not len(fresh):
        raise DegenerateInputError(
            f"no ball of radius {r:.3e} sits on edges of generation {curve.generation}"
        )
    picks = np.unique(np.linspace(0, len(fresh) - 1, min(max_centers, len(fresh))).astype(np.int64))
    best = 0.0
    for c in fresh[picks]:
        try:
            best = max(best, flatness_at(curve, c, r, spacing_fraction=spacing_fraction).D)
        except DegenerateInputError:
            continue
    logger.debug("generation %d flatness at r=%.3e: %.4f", curve.generation, r, best)
    return best


def fresh_centers(
    curve: GenerationCurve, centers: ArrayLike, radius: float, generation: int
) -> NDArray[np.float64]:
    """Centers whose ball of 1.25 ``radius`` meets edges of ``generation`` only."""
    pts = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    keep = [
        bool(np.all(curve.edge_generation[curve.index.edges_near(c, 1.25 * radius)] == generation))
        for c in pts
    ]
    return pts[np.asarray(keep, dtype=bool)]


def profile_centers(
    curve: GenerationCurve, max_centers: int, generation: int | None = None
) -> NDArray[np.float64]:
    """Every 4th vertex plus frozen edge midpoints, thinned evenly to ``max_centers``."""
    a, b = curve.edges
    starts, frozen = np.ones(len(curve), dtype=bool), curve.frozen
    if generation is not None:
        starts = curve.edge_generation == generation
        frozen = frozen & starts
    mids = 0.5 * (a[frozen] + b[frozen])
    centers = np.vstack([curve.vertices[starts][::4], mids])
    if len(centers) > max_centers:
        centers = centers[np.unique(np.linspace(0, len(centers) - 1, max_centers).astype(np.int64))]
    return centers


# --- Flatness failure ---


def flatness_failure_balls(
    curves: Sequence[GenerationCurve], *, spacing_fraction: float = 1.0 / 500.0
) -> list[FlatnessResult]:
    """
    Balls around the tracked horizontal chords, measured on the finest curve.

    For generation n the tracked chord L_n (outer normal (0, 1)) gives the
    ball B_n = B(mid L_n, |L_n| / 4). The ball is recentered at the nearest
    point of the finest curve with radius 0.9 |L_n| / 4, and the best-fit
    line there yields N_B. A move of more than a tenth of the radius marks
    the result ``contained=False``.

    Raises:
        ConstructionError: If a curve has no tracked edge or the tracked
            edge is not horizontal with normal (0, 1).
    """
    if not curves:
        return []
    finest = curves[-1]
    results = []
    for curve in curves:
        e = curve.tracked_edge
        if e is None:
            raise ConstructionError(f"generation {curve.generation} lost the tracked edge")
        if (int(curve.turns_num[e]), int(curve.turns_den[e])) != (1, 4):
            raise ConstructionError(
                f"tracked edge {e} of generation {curve.generation} is not horizontal "
                f"(turns {curve.turns_num[e]}/{curve.turns_den[e]})"
            )
        a, b = curve.edges
        radius = 0.25 * float(np.hypot(*(b[e] - a[e])))
        mid = curve.frame.map_to(0.5 * (a[e] + b[e]), finest.frame)
        dist, _, foot = finest.index.nearest(mid)
        result = flatness_at(finest, foot[0], 0.9 * radius, spacing_fraction=spacing_fraction)
        results.append(
            replace(result, generation=curve.generation, contained=bool(dist[0] <= 0.1 * radius))
        )
        logger.info(
            "failure ball of generation %d: r=%.3e D=%.4f |N_B-(1,0)|=%.4f",
            curve.generation,
            0.9 * radius,
            result.D,
            result.normal_deviation,
        )
    return results


# --- Vertical mass ---


def vertical_mass_per_generation(
    curves: Sequence[GenerationCurve], registry: FrozenRegistry | None = None
) -> list[VerticalMass]:
    """
    Length fraction of frozen segments per generation.

    Built generations report the exact DP value and the tag count of the
    built part; curves without build statistics report the length fraction
    of their own frozen edges.
    """
    registered = {}
    if registry is not None:
        registered = {block.generation: float(block.lengths.sum()) for block in registry.blocks}
    out = []
    for curve in curves:
        if curve.stats is not None:
            tagged, exact = curve.stats.vertical_tagged, curve.stats.vertical_exact
        else:
            lengths = curve.edge_lengths
            tagged, exact = float(lengths[curve.frozen].sum() / lengths.sum()), None
        out.append(VerticalMass(curve.generation, tagged, exact, registered.get(curve.generation)))
    return out


def hausdorff_distance(points: ArrayLike, curve: GenerationCurve) -> float:
    """One-sided distance sup_p dist(p, curve)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if not len(pts):
        return 0.0
    return float(curve.index.distance(pts).max())


# --- Helpers ---


def _resolution(curve: GenerationCurve) -> float:
    if curve.fine_runs:
        return min(run.chord_length for run in curve.fine_runs)
    return curve.chord_length


def _split_radii(radii: Sequence[float], floor: float) -> tuple[list[float], list[float]]:
    ordered = sorted({float(r) for r in radii}, reverse=True)
    usable = [r for r in ordered if r >= floor]
    skipped = [r for r in ordered if r < floor]
    if skipped:
        warnings.warn(
            f"skipping radii below resolution {floor:.3e}: "
            + ", ".join(f"{r:.3e}" for r in skipped),
            ResolutionWarning,
            stacklevel=3,
        )
    return usable, skipped


__all__ = [
    "AHLFORS_BOUNDS",
    "NORMAL_DEVIATION_FLOOR",
    "VERTICAL_MASS_FLOOR",
    "FlatnessResult",
    "RegularityReport",
    "ReifenbergProfile",
    "VerticalMass",
    "ahlfors_ratio",
    "ahlfors_scan",
    "boundary_sample",
    "dyadic_radii",
    "flatness_at",
    "flatness_failure_balls",
    "fresh_centers",
    "generation_flatness",
    "hausdorff_distance",
    "profile_centers",
    "reifenberg_profile",
    "vertical_mass_per_generation",
]
