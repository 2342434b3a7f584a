"""
Multi-generation construction driver.

Starts from the regular polygon Omega_0 and applies one refinement step
per entry of the M schedule, either globally or inside the lookahead
window of the tracked horizontal edge.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

from frozenflake.errors import ConstructionError
from frozenflake.refine import (
    FrozenRegistry,
    advance,
    boundary_proximity,
    frozen_coverage,
    initial_polygon,
    lookahead_window,
    persistence_residuals,
)


if TYPE_CHECKING:
    from frozenflake.config import RunConfig
    from frozenflake.geometry import Ball
    from frozenflake.refine import GenerationCurve, PersistenceCheck, ProximityCheck


logger = logging.getLogger(__name__)

Record = dict[str, Union[str, int, float, bool]]


@dataclass(frozen=True, eq=False)
class PipelineRun:
    """
    Curves Omega_0 .. Omega_N with their registry.

    ``windows[k]`` is the window used to build generation k + 1 (None for a
    global step); ``schedule[k]`` is its M.
    """

    curves: tuple[GenerationCurve, ...]
    registry: FrozenRegistry
    schedule: tuple[int, ...]
    windows: tuple[Ball | None, ...]

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def latest(self) -> GenerationCurve:
        return self.curves[-1]

    def persistence(self) -> list[PersistenceCheck]:
        """Registry persistence against the latest curve."""
        return persistence_residuals(self.registry, self.latest)

    def coverage(self) -> dict[int, float]:
        """Worst covered fraction of a frozen T by frozen chords, per generation."""
        out: dict[int, float] = {}
        for curve in self.curves[1:]:
            fractions = frozen_coverage(self.registry, curve)
            if len(fractions):
                out[curve.generation] = float(fractions.min())
        return out

    def proximity(self) -> list[ProximityCheck]:
        return [
            boundary_proximity(prev, nxt, M)
            for prev, nxt, M in zip(self.curves, self.curves[1:], self.schedule)
        ]

    def manifest_records(self) -> list[Record]:
        """One record per generation: counts, scales and vertical-mass ratios."""
        records: list[Record] = []
        first = self.curves[0]
        records.append(
            {
                "generation": 0,
                "m": len(first),
                "chord_length": first.chord_length,
                "edges": len(first),
            }
        )
        for prev, curve, window in zip(self.curves, self.curves[1:], self.windows):
            record: Record = {
                "generation": curve.generation,
                "m": len(prev),
                "edges": len(curve),
                "chord_length": curve.chord_length,
                "frame_depth": curve.frame.depth,
                "windowed": window is not None,
                "registered": len(self.registry.block(curve.generation)),
            }
            stats = curve.stats
            if stats is not None:
                record.update(
                    M=stats.M,
                    depth=stats.depth,
                    t=stats.nominal_segments,
                    built=stats.built_segments,
                    a=stats.min_segment,
                    chords=stats.chords,
                    runs=len(stats.chord_lengths),
                    vertical_exact=stats.vertical_exact,
                    vertical_tagged=stats.vertical_tagged,
                    closure_residual=stats.closure_residual,
                )
            if window is not None:
                record.update(
                    window_x=window.center.x,
                    window_y=window.center.y,
                    window_radius=window.radius,
                )
            records.append(record)
        return records


def build_generations(config: RunConfig) -> PipelineRun:
    """
    Build every generation the config asks for.

    Raises:
        ResourceLimitError: A leaf or chord budget is exceeded (global mode
            reaches this quickly; use ``window="tracked"``).
        ConstructionError: The tracked edge is lost in windowed mode.

    Example:
        >>> from frozenflake.config import RunConfig
        >>> run = build_generations(RunConfig(generations=1))
        >>> run.manifest_records()[1]["t"]
        25600
    """
    curve = initial_polygon(config.initial_sides, config.side_length)
    curves = [curve]
    windows: list[Ball | None] = []
    registry = FrozenRegistry()
    schedule = config.schedule
    logger.info(
        "building %d generations from a %d-gon, schedule %s, window=%s",
        len(schedule),
        len(curve),
        list(schedule),
        config.window,
    )
    for M in schedule:
        window = None
        if config.window == "tracked":
            if curve.tracked_edge is None:
                raise ConstructionError(f"generation {curve.generation} lost its tracked edge")
            window = lookahead_window(curve, M, config.depth)
            logger.debug(
                "window for generation %d: center (%.6g, %.6g) radius %.3e",
                curve.generation + 1,
                window.center.x,
                window.center.y,
                window.radius,
            )
        curve, registry = advance(
            curve,
            M,
            registry,
            window=window,
            depth=config.depth,
            leaf_budget=config.leaf_budget,
            chord_budget=config.chord_budget,
        )
        curves.append(curve)
        windows.append(window)
    return PipelineRun(tuple(curves), registry, schedule, tuple(windows))


__all__ = ["PipelineRun", "Record", "build_generations"]
