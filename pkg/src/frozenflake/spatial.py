"""
Spatial index over boundary edges.

Edges are bucketed by length class (powers of two of the half-length) and
each bucket keeps a k-d tree over edge midpoints. An edge with midpoint m
and half-length h is at distance >= |x - m| - h from x, which gives both a
cheap lower bound on the boundary distance and a certificate that no
unseen edge can beat the current nearest one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.spatial import cKDTree

from frozenflake.errors import InvalidInputError
from frozenflake.geometry import project_onto_segments


if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Bucket:
    index: NDArray[np.int64]
    tree: cKDTree
    max_half: float


class SpatialIndex:
    """
    Nearest-edge and distance queries over a fixed set of segments.

    The index is immutable once built and safe to query from several
    threads.

    Args:
        a: ``(n, 2)`` segment start points.
        b: ``(n, 2)`` segment end points.
        neighbors: Midpoints inspected per bucket before certification.

    Example:
        >>> a = np.array([[-1.0, 0.0]])
        >>> b = np.array([[1.0, 0.0]])
        >>> SpatialIndex(a, b).distance([[2.0, 1.0]])
        array([1.41421356])
    """

    def __init__(self, a: ArrayLike, b: ArrayLike, *, neighbors: int = 8) -> None:
        self.a = np.ascontiguousarray(a, dtype=np.float64)
        self.b = np.ascontiguousarray(b, dtype=np.float64)
        if self.a.shape != self.b.shape or self.a.ndim != 2 or len(self.a) == 0:
            raise InvalidInputError(f"need matching (n, 2) arrays, got {self.a.shape}")
        self.midpoints = 0.5 * (self.a + self.b)
        self.half_lengths = 0.5 * np.hypot(*(self.b - self.a).T)
        self.neighbors = neighbors

        classes = np.floor(np.log2(np.maximum(self.half_lengths, np.finfo(float).tiny)))
        self._buckets: list[_Bucket] = []
        for value in np.unique(classes):
            index = np.flatnonzero(classes == value)
            self._buckets.append(
                _Bucket(
                    index=index,
                    tree=cKDTree(self.midpoints[index]),
                    max_half=float(self.half_lengths[index].max()),
                )
            )
        logger.debug("indexed %d edges in %d length classes", len(self.a), len(self._buckets))

    def __len__(self) -> int:
        return len(self.a)

    @property
    def max_half_length(self) -> float:
        return max(bucket.max_half for bucket in self._buckets)

    # --- Queries ---

    def distance_bounds(
        self, points: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        Bracket the distance from each point to the edges.

        Returns:
            ``(lower, upper)``; the upper bound is the distance to the
            nearest edge midpoint.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lower = np.full(len(pts), np.inf)
        upper = np.full(len(pts), np.inf)
        for bucket in self._buckets:
            d, _ = bucket.tree.query(pts, k=1)
            np.minimum(lower, d - bucket.max_half, out=lower)
            np.minimum(upper, d, out=upper)
        return np.maximum(lower, 0.0), upper

    def distance_lower_bound(self, points: ArrayLike) -> NDArray[np.float64]:
        """Certified lower bound on the distance from each point to the edges."""
        return self.distance_bounds(points)[0]

    def nearest(
        self, points: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.int64], NDArray[np.float64]]:
        """
        Exact nearest edge for each point.

        Returns:
            ``(distance, edge, foot)`` with ``foot`` the closest boundary point.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        m = len(pts)
        best = np.full(m, np.inf)
        edge = np.full(m, -1, dtype=np.int64)
        foot = np.zeros((m, 2))
        kth: list[NDArray[np.float64]] = []

        for bucket in self._buckets:
            k = min(self.neighbors, len(bucket.index))
            dmid, j = bucket.tree.query(pts, k=k)
            dmid = dmid.reshape(m, k)
            cand = bucket.index[j.reshape(m, k)]
            self._update(pts, np.repeat(np.arange(m), k), cand.ravel(), best, edge, foot)
            if k < len(bucket.index):
                kth.append(dmid[:, -1])
            else:
                kth.append(np.full(m, np.inf))

        for bucket, dk in zip(self._buckets, kth):
            unsure = np.flatnonzero(dk - bucket.max_half < best)
            if unsure.size == 0:
                continue
            found = bucket.tree.query_ball_point(pts[unsure], r=best[unsure] + bucket.max_half)
            sizes = np.fromiter((len(hit) for hit in found), dtype=np.int64, count=len(found))
            if sizes.sum() == 0:
                continue
            owners = np.repeat(unsure, sizes)
            local = np.fromiter(
                (i for hit in found for i in hit), dtype=np.int64, count=int(sizes.sum())
            )
            self._update(pts, owners, bucket.index[local], best, edge, foot)

        return best, edge, foot

    def distance(self, points: ArrayLike) -> NDArray[np.float64]:
        """Exact distance from each point to the nearest edge."""
        return self.nearest(points)[0]

    def edges_near(self, center: ArrayLike, radius: float) -> NDArray[np.int64]:
        """Indices of edges that meet the closed disk B(center, radius), sorted."""
        c = np.asarray(center, dtype=np.float64)
        hits: list[NDArray[np.int64]] = []
        for bucket in self._buckets:
            local = bucket.tree.query_ball_point(c, r=radius + bucket.max_half)
            if local:
                hits.append(bucket.index[np.asarray(local, dtype=np.int64)])
        if not hits:
            return np.empty(0, dtype=np.int64)
        cand = np.sort(np.concatenate(hits))
        _, _, d = project_onto_segments(c, self.a[cand], self.b[cand])
        return cand[d <= radius]

    def crossing_pairs(self, *, closed: bool = True) -> NDArray[np.int64]:
        """
        Pairs of non-adjacent edges that intersect or touch.

        Edges i and i+1 (and the first and last when ``closed``) share a
        vertex and are never reported.
        """
        pieces: list[NDArray[np.int64]] = []
        for i, first in enumerate(self._buckets):
            for second in self._buckets[i:]:
                reach = first.max_half + second.max_half
                if first is second:
                    pairs = first.tree.query_pairs(reach, output_type="ndarray")
                    if len(pairs):
                        pieces.append(first.index[pairs])
                else:
                    sdm = first.tree.sparse_distance_matrix(
                        second.tree, reach, output_type="ndarray"
                    )
                    if len(sdm):
                        pieces.append(
                            np.column_stack([first.index[sdm["i"]], second.index[sdm["j"]]])
                        )
        if not pieces:
            return np.empty((0, 2), dtype=np.int64)
        pairs = np.sort(np.concatenate(pieces), axis=1)
        n = len(self.a)
        gap = pairs[:, 1] - pairs[:, 0]
        keep = gap > 1
        if closed:
            keep &= ~((pairs[:, 0] == 0) & (pairs[:, 1] == n - 1))
        pairs = pairs[keep]
        hit = _segments_intersect(
            self.a[pairs[:, 0]], self.b[pairs[:, 0]], self.a[pairs[:, 1]], self.b[pairs[:, 1]]
        )
        return pairs[hit]

    # --- Internals ---

    def _update(
        self,
        pts: NDArray[np.float64],
        owners: NDArray[np.int64],
        cand: NDArray[np.int64],
        best: NDArray[np.float64],
        edge: NDArray[np.int64],
        foot: NDArray[np.float64],
    ) -> None:
        _, f, d = project_onto_segments(pts[owners], self.a[cand], self.b[cand])
        order = np.lexsort((cand, d, owners))
        owners, d, cand, f = owners[order], d[order], cand[order], f[order]
        first = np.ones(len(owners), dtype=bool)
        first[1:] = owners[1:] != owners[:-1]
        owners, d, cand, f = owners[first], d[first], cand[first], f[first]
        better = d < best[owners]
        rows = owners[better]
        best[rows] = d[better]
        edge[rows] = cand[better]
        foot[rows] = f[better]


def _orient(
    p: NDArray[np.float64], q: NDArray[np.float64], r: NDArray[np.float64]
) -> NDArray[np.float64]:
    return (q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (r[:, 0] - p[:, 0])


def _segments_intersect(
    a1: NDArray[np.float64],
    b1: NDArray[np.float64],
    a2: NDArray[np.float64],
    b2: NDArray[np.float64],
) -> NDArray[np.bool_]:
    d1 = _orient(a1, b1, a2)
    d2 = _orient(a1, b1, b2)
    d3 = _orient(a2, b2, a1)
    d4 = _orient(a2, b2, b1)
    lo1, hi1 = np.minimum(a1, b1), np.maximum(a1, b1)
    lo2, hi2 = np.minimum(a2, b2), np.maximum(a2, b2)
    boxes = np.all(lo1 <= hi2, axis=1) & np.all(lo2 <= hi1, axis=1)
    return (d1 * d2 <= 0) & (d3 * d4 <= 0) & boxes


__all__ = ["SpatialIndex"]
