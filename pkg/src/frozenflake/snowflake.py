"""
The replacement operator, the freeze rule, and the exact oracles for how
much of a generated curve ends up vertical.

A segment S with outer normal angle gamma is replaced by four equal
segments whose middle vertex bumps out along the outer normal by
``s * sin(alpha)``, with ``s = |S| / (2 (1 + cos alpha))`` and
``alpha = |gamma| / M``. The children rotate the normal by
``(0, +alpha, -alpha, 0)``. Once a node's normal becomes (1, 0) it is frozen:
it is only ever quadrisected afterwards. Repeating ``M**2`` times gives the
curve Gamma(S) with ``4**(M**2)`` segments.

Rotations are tracked as integer counts, so the freeze test is exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from frozenflake.errors import InvalidParameterError, ResourceLimitError
from frozenflake.geometry import TAU, AngleRecord, OrientedSegment, Point, rot90


if TYPE_CHECKING:
    from numpy.typing import NDArray

    from frozenflake.geometry import Ball


logger = logging.getLogger(__name__)

#: Normal rotation of children 1..4, in units of alpha.
CHILD_STEPS = (0, 1, -1, 0)

DEFAULT_LEAF_BUDGET = 10**8

_STEP_ARRAY = np.array(CHILD_STEPS, dtype=np.int64)


# --- Data Classes ---


@dataclass(frozen=True)
class GeneratorParams:
    """Parameters of one Gamma curve.

    ``depth`` defaults to ``M**2``; other depths are allowed for tests and
    are flagged non-canonical.
    """

    M: int
    source: OrientedSegment
    depth: int = -1
    leaf_budget: int = DEFAULT_LEAF_BUDGET
    wrap_around: bool = True

    def __post_init__(self) -> None:
        if self.M < 1:
            raise InvalidParameterError(f"M must be >= 1, got {self.M}")
        if self.depth == -1:
            object.__setattr__(self, "depth", self.M * self.M)
        if self.depth < 0:
            raise InvalidParameterError(f"depth must be >= 0, got {self.depth}")

    @property
    def canonical(self) -> bool:
        return self.depth == self.M * self.M

    @property
    def root(self) -> AngleRecord:
        return self.source.normal.subdivided(self.M)

    @property
    def alpha(self) -> float:
        return self.root.step


@dataclass(frozen=True)
class SegmentNode:
    """Node S_{i1..ik} of the replacement tree."""

    coding: tuple[int, ...]
    segment: OrientedSegment
    frozen: bool
    rotation_count: int


@dataclass(frozen=True, eq=False)
class GammaCurve:
    """Generated curve Gamma(source), stored as arrays in tree order.

    When built with a window, nodes away from it are left unexpanded and
    ``levels`` is below ``depth`` for them.
    """

    source: OrientedSegment
    M: int
    depth: int
    alpha: float
    a: NDArray[np.float64]
    b: NDArray[np.float64]
    frozen: NDArray[np.bool_]
    counts: NDArray[np.int64]
    freeze_level: NDArray[np.int64]
    wrapped: NDArray[np.bool_]
    levels: NDArray[np.int64]
    codings: NDArray[np.uint8] | None

    @property
    def leaf_count(self) -> int:
        return len(self.a)

    @property
    def is_complete(self) -> bool:
        return bool(np.all(self.levels == self.depth))

    @property
    def lengths(self) -> NDArray[np.float64]:
        return np.hypot(*(self.b - self.a).T)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    @property
    def vertical_mass(self) -> float:
        """Total length of frozen leaves."""
        return float(self.lengths[self.frozen].sum())

    @property
    def wrap_mass(self) -> float:
        """Length of leaves frozen through a wrap-around solution."""
        return float(self.lengths[self.frozen & self.wrapped].sum())

    @property
    def vertices(self) -> NDArray[np.float64]:
        return np.vstack([self.a, self.b[-1:]])

    def node(self, i: int) -> SegmentNode:
        coding: tuple[int, ...] = ()
        if self.codings is not None:
            coding = tuple(int(c) for c in self.codings[i, : self.levels[i]])
        count = int(self.counts[i])
        if self.frozen[i]:
            record = AngleRecord.vertical()
        else:
            record = self.source.normal.subdivided(self.M).rotated(count)
        segment = OrientedSegment(Point(*self.a[i]), Point(*self.b[i]), record)
        return SegmentNode(coding, segment, bool(self.frozen[i]), count)

    @property
    def leaves(self) -> list[SegmentNode]:
        return [self.node(i) for i in range(self.leaf_count)]


# --- Replacement operator ---


def replace_segment(s: OrientedSegment, alpha: float) -> tuple[OrientedSegment, ...]:
    """
    Replace a segment by four segments with a bump along its outer normal.

    Args:
        s: Segment to replace.
        alpha: Bump angle in [0, pi/2].

    Returns:
        Four segments chaining from ``s.a`` to ``s.b``, each of length
        ``|s| / (2 (1 + cos alpha))``, with normal counts (0, +1, -1, 0)
        relative to ``s``.

    Raises:
        InvalidParameterError: If alpha is outside [0, pi/2].

    Example:
        >>> seg = OrientedSegment.between((0, 0), (1, 0))
        >>> [round(c.length, 7) for c in replace_segment(seg, 0.0)]
        [0.25, 0.25, 0.25, 0.25]
    """
    if not 0.0 <= alpha <= math.pi / 2:
        raise InvalidParameterError(f"alpha must lie in [0, pi/2], got {alpha}")
    a = s.a.as_array()[None, :]
    b = s.b.as_array()[None, :]
    points = bump_points(a, b, np.array([alpha]))[0]
    lineage = s.normal if s.normal.step == alpha else _restep(s.normal, alpha)
    return tuple(
        OrientedSegment(Point(*points[k]), Point(*points[k + 1]), lineage.rotated(step))
        for k, step in enumerate(CHILD_STEPS)
    )


def bump_points(
    a: NDArray[np.float64], b: NDArray[np.float64], alpha: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Breakpoints y0..y4 of the replacement of each [a_i, b_i], shape ``(n, 5, 2)``."""
    d = b - a
    length = np.hypot(d[:, 0], d[:, 1])
    u = d / length[:, None]
    s = length / (2.0 * (1.0 + np.cos(alpha)))
    out = np.empty((len(a), 5, 2))
    out[:, 0] = a
    out[:, 1] = a + s[:, None] * u
    out[:, 2] = 0.5 * (a + b) + (s * np.sin(alpha))[:, None] * rot90(u)
    out[:, 3] = b - s[:, None] * u
    out[:, 4] = b
    return out


def _restep(record: AngleRecord, alpha: float) -> AngleRecord:
    theta = record.angle
    divisions = max(1, round(abs(theta) / alpha)) if alpha > 0 else 1
    return AngleRecord(
        base=theta, step=alpha, count=0, divisions=divisions, turns=record.exact_turns
    )


# --- Freeze predicate ---


def zero_mask(
    counts: NDArray[np.int64],
    M: int,
    sign: NDArray[np.int64],
    num: NDArray[np.int64],
    den: NDArray[np.int64],
    *,
    wraps: bool = True,
) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
    """
    Vectorized freeze test ``gamma + count * alpha == 0 (mod 2 pi)``.

    ``num / den`` is gamma in exact turns (``den == 0`` when unknown, in
    which case only the principal solution ``count * sign == -M`` counts).

    Returns:
        ``(zero, wrapped)`` masks.
    """
    principal = sign * counts == -M
    zero = (sign == 0) | principal
    wrapped = np.zeros_like(zero)
    if wraps:
        known = (den > 0) & (sign != 0)
        safe_den = np.where(known, den, 1)
        hit = known & ((num * (M + sign * counts)) % (safe_den * M) == 0)
        wrapped = hit & ~zero
        zero = zero | hit
    return zero, wrapped


# --- Tree expansion ---


@dataclass(frozen=True, eq=False)
class Roots:
    """Source segments of one expansion pass, with their angle data."""

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    sign: NDArray[np.int64]
    alpha: NDArray[np.float64]
    num: NDArray[np.int64]
    den: NDArray[np.int64]

    @classmethod
    def from_edges(
        cls,
        a: NDArray[np.float64],
        b: NDArray[np.float64],
        num: NDArray[np.int64],
        den: NDArray[np.int64],
        M: int,
    ) -> Roots:
        """Angle data for edges whose exact turns are ``num / den`` where ``den > 0``."""
        d = b - a
        measured = np.arctan2(d[:, 0], -d[:, 1])
        measured = np.where(measured <= -math.pi, measured + TAU, measured)
        known = den > 0
        gamma = np.where(known, TAU * num / np.where(known, den, 1), measured)
        sign = np.where(known, np.sign(num), np.sign(gamma)).astype(np.int64)
        return cls(
            a=np.asarray(a, dtype=np.float64),
            b=np.asarray(b, dtype=np.float64),
            sign=sign,
            alpha=np.abs(gamma) / M,
            num=np.asarray(num, dtype=np.int64),
            den=np.asarray(den, dtype=np.int64),
        )

    @classmethod
    def from_segment(cls, s: OrientedSegment, M: int) -> Roots:
        turns = s.normal.exact_turns
        num, den = (turns.numerator, turns.denominator) if turns is not None else (0, 0)
        roots = cls.from_edges(
            s.a.as_array()[None, :],
            s.b.as_array()[None, :],
            np.array([num], dtype=np.int64),
            np.array([den], dtype=np.int64),
            M,
        )
        if turns is None:
            gamma = s.normal.angle
            roots = replace(
                roots,
                sign=np.array([(gamma > 0) - (gamma < 0)], dtype=np.int64),
                alpha=np.array([abs(gamma) / M]),
            )
        return roots

    def __len__(self) -> int:
        return len(self.a)


@dataclass(frozen=True, eq=False)
class Expansion:
    """Flat arrays of the nodes of one or more replacement trees, in order."""

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    root: NDArray[np.int64]
    counts: NDArray[np.int64]
    frozen: NDArray[np.bool_]
    freeze_level: NDArray[np.int64]
    wrapped: NDArray[np.bool_]
    levels: NDArray[np.int64]
    codings: NDArray[np.uint8] | None
    depth: int

    def __len__(self) -> int:
        return len(self.a)

    @property
    def is_leaf(self) -> NDArray[np.bool_]:
        return self.levels == self.depth


def expand(
    roots: Roots,
    M: int,
    depth: int,
    *,
    window: Ball | None = None,
    leaf_budget: int = DEFAULT_LEAF_BUDGET,
    wraps: bool = True,
    keep_codings: bool = True,
) -> Expansion:
    """
    Expand every root to ``depth`` levels, level by level.

    With ``window``, a node S is expanded only if B(mid S, |S|) meets the
    doubled window; every descendant of S lies in that ball.

    Raises:
        ResourceLimitError: If the node count would exceed ``leaf_budget``.
    """
    n_roots = len(roots)
    if window is None and n_roots * 4**depth > leaf_budget:
        raise ResourceLimitError(
            f"Gamma expansion to depth {depth} needs too many leaves",
            required=n_roots * 4**depth,
            budget=leaf_budget,
        )

    a, b = roots.a.copy(), roots.b.copy()
    root = np.arange(n_roots, dtype=np.int64)
    counts = np.zeros(n_roots, dtype=np.int64)
    frozen, wrapped = zero_mask(counts, M, roots.sign, roots.num, roots.den, wraps=wraps)
    freeze_level = np.where(frozen, 0, -1).astype(np.int64)
    levels = np.zeros(n_roots, dtype=np.int64)
    codings = np.zeros((n_roots, depth), dtype=np.uint8) if keep_codings else None
    reach = 0.0
    center = np.zeros(2)
    if window is not None:
        center = window.center.as_array()
        reach = 2.0 * window.radius

    for level in range(depth):
        grow = levels == level
        if window is not None:
            lengths = np.hypot(*(b - a).T)
            mid = 0.5 * (a + b)
            grow &= np.hypot(*(mid - center).T) <= lengths + reach
        n_grow = int(grow.sum())
        if n_grow == 0:
            break
        total = len(a) + 3 * n_grow
        if total > leaf_budget:
            raise ResourceLimitError(
                f"Gamma expansion at level {level + 1} needs too many nodes",
                required=total,
                budget=leaf_budget,
            )

        reps = np.where(grow, 4, 1)
        parent = np.repeat(np.arange(len(a)), reps)
        starts = np.cumsum(reps) - reps
        sub = np.arange(total) - np.repeat(starts, reps)
        child = grow[parent]

        grown = np.flatnonzero(grow)
        points = np.empty((n_grow, 5, 2))
        gfrozen = frozen[grown]
        ga, gb = a[grown], b[grown]
        if gfrozen.any():
            quarters = np.arange(5)[None, :, None] / 4.0
            points[gfrozen] = ga[gfrozen, None, :] + quarters * (gb - ga)[gfrozen, None, :]
        active = ~gfrozen
        if active.any():
            points[active] = bump_points(ga[active], gb[active], roots.alpha[root[grown][active]])

        row = np.cumsum(grow) - 1
        new_a = a[parent]
        new_b = b[parent]
        c_rows = row[parent[child]]
        c_sub = sub[child]
        new_a[child] = points[c_rows, c_sub]
        new_b[child] = points[c_rows, c_sub + 1]

        new_root = root[parent]
        new_counts = counts[parent]
        new_frozen = frozen[parent]
        new_wrapped = wrapped[parent]
        new_freeze = freeze_level[parent]
        new_levels = levels[parent]
        new_levels[child] = level + 1

        bend = child & ~new_frozen
        new_counts[bend] += _STEP_ARRAY[sub[bend]]
        r = new_root[bend]
        hit, hit_wrap = zero_mask(
            new_counts[bend], M, roots.sign[r], roots.num[r], roots.den[r], wraps=wraps
        )
        idx = np.flatnonzero(bend)
        new_frozen[idx[hit]] = True
        new_wrapped[idx[hit]] = hit_wrap[hit]
        new_freeze[idx[hit]] = level + 1

        if codings is not None:
            codings = codings[parent]
            codings[child, level] = (sub[child] + 1).astype(np.uint8)

        a, b, root, counts = new_a, new_b, new_root, new_counts
        frozen, wrapped, freeze_level, levels = new_frozen, new_wrapped, new_freeze, new_levels

    logger.debug("expanded %d roots to %d nodes (depth %d)", n_roots, len(a), depth)
    return Expansion(
        a=a,
        b=b,
        root=root,
        counts=counts,
        frozen=frozen,
        freeze_level=freeze_level,
        wrapped=wrapped,
        levels=levels,
        codings=codings,
        depth=depth,
    )


def generate_gamma(
    params: GeneratorParams,
    *,
    window: Ball | None = None,
    keep_codings: bool = True,
) -> GammaCurve:
    """
    Generate Gamma(source) by ``params.depth`` rounds of replacement.

    Args:
        params: M, source segment, depth and leaf budget.
        window: Optional ball; only nodes that can reach twice the ball are
            expanded.
        keep_codings: Store the coding word of every node.

    Returns:
        GammaCurve whose leaves chain from ``source.a`` to ``source.b``.

    Raises:
        ResourceLimitError: If ``4**depth`` exceeds the leaf budget.

    Example:
        >>> src = OrientedSegment.between((0, 1), (0, 0))  # normal (1, 0)
        >>> g = generate_gamma(GeneratorParams(M=2, source=src, depth=4))
        >>> g.leaf_count, bool(g.frozen.all())
        (256, True)
    """
    roots = Roots.from_segment(params.source, params.M)
    if params.alpha > math.pi / 2 + 1e-12:
        raise InvalidParameterError(f"alpha {params.alpha} exceeds pi/2; increase M")
    tree = expand(
        roots,
        params.M,
        params.depth,
        window=window,
        leaf_budget=params.leaf_budget,
        wraps=params.wrap_around,
        keep_codings=keep_codings,
    )
    return GammaCurve(
        source=params.source,
        M=params.M,
        depth=params.depth,
        alpha=params.alpha,
        a=tree.a,
        b=tree.b,
        frozen=tree.frozen,
        counts=tree.counts,
        freeze_level=tree.freeze_level,
        wrapped=tree.wrapped,
        levels=tree.levels,
        codings=tree.codings,
    )


def vertical_mass_ratio(g: GammaCurve) -> float:
    """Fraction of the length of ``g`` carried by frozen leaves."""
    return g.vertical_mass / g.total_length


# --- Exact oracles ---


def _zero_counts(M: int, depth: int, turns: Fraction | None, wraps: bool) -> NDArray[np.bool_]:
    """Freeze mask over counts -depth..depth for a root with positive angle."""
    counts = np.arange(-depth, depth + 1, dtype=np.int64)
    if turns is None:
        num, den = np.zeros_like(counts), np.zeros_like(counts)
        sign = np.ones_like(counts)
    else:
        num = np.full_like(counts, turns.numerator)
        den = np.full_like(counts, turns.denominator)
        sign = np.full_like(counts, (turns > 0) - (turns < 0))
    zero, _ = zero_mask(counts, M, sign, num, den, wraps=wraps)
    return zero


def freeze_probability(
    M: int,
    depth: int | None = None,
    turns: Fraction | None = Fraction(1, 4),
    *,
    wraps: bool = True,
) -> Fraction:
    """
    Exact probability that a uniformly chosen coding freezes within ``depth`` steps.

    Steps are 0 (probability 1/2) or +-1 (1/4 each); absorption happens at
    every count where the normal becomes (1, 0).
    """
    if M < 1:
        raise InvalidParameterError(f"M must be >= 1, got {M}")
    depth = M * M if depth is None else depth
    if turns == 0:
        return Fraction(1)
    zero = _zero_counts(M, depth, turns, wraps).tolist()
    dist = [0] * (2 * depth + 1)
    dist[depth] = 1
    absorbed = 0
    for k in range(1, depth + 1):
        padded = [0, *dist, 0]
        dist = [2 * padded[j + 1] + padded[j] + padded[j + 2] for j in range(2 * depth + 1)]
        for j, is_zero in enumerate(zero):
            if is_zero and dist[j]:
                absorbed += dist[j] * 4 ** (depth - k)
                dist[j] = 0
    return Fraction(absorbed, 4**depth)


def freeze_hit_exact(M: int) -> Fraction:
    """
    Probability that the running rotation count hits ``-M`` within ``M**2`` steps.

    Example:
        >>> freeze_hit_exact(2)
        Fraction(23, 128)
    """
    return freeze_probability(M, M * M, Fraction(1, 4), wraps=False)


def clt_tail_exact(M: int) -> Fraction:
    """
    Probability that the sum of ``M**2`` steps (0 w.p. 1/2, +-1 w.p. 1/4) is ``<= -M``.

    Example:
        >>> clt_tail_exact(2)
        Fraction(37, 256)
    """
    if M < 1:
        raise InvalidParameterError(f"M must be >= 1, got {M}")
    steps = M * M
    dist = [1]
    for _ in range(steps):
        padded = [0, 0, *dist, 0, 0]
        dist = [padded[j] + 2 * padded[j + 1] + padded[j + 2] for j in range(len(dist) + 2)]
    # dist[j] counts sums equal to j - steps
    tail = sum(dist[: steps - M + 1])
    return Fraction(tail, 4**steps)


def vertical_mass_table(
    M: int,
    depth: int,
    alpha: NDArray[np.float64],
    sign: NDArray[np.int64],
    num: NDArray[np.int64],
    den: NDArray[np.int64],
    *,
    wraps: bool = True,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Exact total and vertical length of full Gamma curves per unit source length.

    Every non-frozen node has four children of relative length
    c = 1/(2(1 + cos alpha)); frozen nodes keep their length. The DP runs over
    rotation counts for all sources at once.

    Returns:
        ``(total, vertical)`` arrays, one entry per source.
    """
    n = len(alpha)
    width = 2 * depth + 1
    counts = np.arange(-depth, depth + 1, dtype=np.int64)
    zero, _ = zero_mask(
        counts[None, :],
        M,
        sign[:, None],
        num[:, None],
        den[:, None],
        wraps=wraps,
    )
    c = 1.0 / (2.0 * (1.0 + np.cos(alpha)))
    mass = np.zeros((n, width))
    mass[:, depth] = 1.0
    vertical = np.zeros(n)
    start_zero = zero[:, depth]
    vertical[start_zero] = 1.0
    mass[start_zero] = 0.0
    for _ in range(depth):
        shifted = np.zeros((n, width + 2))
        shifted[:, 1:-1] = mass
        mass = c[:, None] * (2.0 * mass + shifted[:, :-2] + shifted[:, 2:])
        vertical += np.where(zero, mass, 0.0).sum(axis=1)
        mass[zero] = 0.0
    return vertical + mass.sum(axis=1), vertical


def vertical_mass_exact(
    M: int,
    depth: int | None = None,
    turns: Fraction | None = Fraction(1, 4),
    *,
    gamma: float | None = None,
    wraps: bool = True,
) -> float:
    """
    Exact vertical-mass ratio of the full Gamma of one source.

    The source angle is ``turns`` (exact) or ``gamma`` (radians, principal
    freeze solution only).
    """
    depth = M * M if depth is None else depth
    if turns is not None:
        theta = float(TAU * turns)
        num, den = turns.numerator, turns.denominator
    elif gamma is not None:
        theta, num, den = gamma, 0, 0
    else:
        raise InvalidParameterError("need turns or gamma")
    sign = (theta > 0) - (theta < 0)
    total, vertical = vertical_mass_table(
        M,
        depth,
        np.array([abs(theta) / M]),
        np.array([sign], dtype=np.int64),
        np.array([num], dtype=np.int64),
        np.array([den], dtype=np.int64),
        wraps=wraps,
    )
    return float(vertical[0] / total[0])


@dataclass(frozen=True)
class MassSample:
    """Monte Carlo estimate of the vertical-mass ratio."""

    ratio: float
    half_width: float
    samples: int

    @property
    def interval(self) -> tuple[float, float]:
        return (self.ratio - self.half_width, self.ratio + self.half_width)


def sample_vertical_mass(
    M: int,
    samples: int,
    *,
    depth: int | None = None,
    turns: Fraction = Fraction(1, 4),
    seed: int = 0,
    chunk: int = 100_000,
) -> MassSample:
    """
    Estimate the vertical-mass ratio from uniformly sampled codings.

    Each sampled leaf is weighted by its length, so the ratio estimator
    ``sum(len * frozen) / sum(len)`` targets the length-weighted ratio; the
    95% half-width uses the delta method.
    """
    depth = M * M if depth is None else depth
    theta = float(TAU * turns)
    c4 = 4.0 / (2.0 * (1.0 + math.cos(abs(theta) / M)))
    zero = _zero_counts(M, depth, abs(turns), True)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    sum_y = sum_x = sum_yy = sum_xx = sum_xy = 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        steps = _STEP_ARRAY[rng.integers(0, 4, size=(n, depth))]
        path = np.cumsum(steps, axis=1)
        hits = zero[path + depth]
        frozen = hits.any(axis=1)
        tau = np.where(frozen, hits.argmax(axis=1) + 1, depth)
        # lengths scaled by 4**depth
        x = c4 ** tau.astype(np.float64)
        y = np.where(frozen, x, 0.0)
        sum_x += float(x.sum())
        sum_y += float(y.sum())
        sum_xx += float((x * x).sum())
        sum_yy += float((y * y).sum())
        sum_xy += float((x * y).sum())
        done += n

    mean_x, mean_y = sum_x / done, sum_y / done
    ratio = mean_y / mean_x
    var_y = sum_yy / done - mean_y**2
    var_x = sum_xx / done - mean_x**2
    cov = sum_xy / done - mean_x * mean_y
    var = (var_y - 2 * ratio * cov + ratio**2 * var_x) / (mean_x**2 * done)
    return MassSample(ratio=ratio, half_width=1.96 * math.sqrt(max(var, 0.0)), samples=done)


__all__ = [
    "CHILD_STEPS",
    "DEFAULT_LEAF_BUDGET",
    "Expansion",
    "GammaCurve",
    "GeneratorParams",
    "MassSample",
    "Roots",
    "SegmentNode",
    "bump_points",
    "clt_tail_exact",
    "expand",
    "freeze_hit_exact",
    "freeze_probability",
    "generate_gamma",
    "replace_segment",
    "sample_vertical_mass",
    "vertical_mass_exact",
    "vertical_mass_ratio",
    "vertical_mass_table",
    "zero_mask",
]
