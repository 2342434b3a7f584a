"""
frozenflake - a snowflake domain whose frozen vertical set carries harmonic measure.

Builds the boundary generation by generation (Koch-type replacement with
a freeze rule for segments that turn vertical), then measures it: Ahlfors
ratios, Reifenberg flatness, and harmonic measure by walk on spheres.

Example usage:
    >>> import frozenflake
    >>> run = frozenflake.build_generations(frozenflake.RunConfig(generations=1))
    >>> curve = run.latest
    >>> boundary = frozenflake.WosBoundary.from_curve(curve)
    >>> est = frozenflake.measure_of_F(boundary, run.registry)
    >>> low, high = est.interval()
"""

from __future__ import annotations

from frozenflake.config import RunConfig
from frozenflake.errors import (
    ConfigError,
    ConstructionError,
    DegenerateInputError,
    EmptyWindowError,
    InsufficientSamplesWarning,
    InvalidInputError,
    InvalidParameterError,
    NumericFailureError,
    ResolutionWarning,
    ResourceLimitError,
    SnowflakeError,
    TopologyError,
    WalkTimeoutWarning,
)
from frozenflake.geometry import (
    AngleRecord,
    Arc,
    Ball,
    ClosedPolyline,
    FitLine,
    OrientedSegment,
    Point,
    best_fit_line,
    point_in_polygon,
)
from frozenflake.harmonic import (
    LocalMeasure,
    MeasureEstimate,
    WalkResult,
    WosBoundary,
    WosConfig,
    density_ratio_oscillation,
    localized_measure_of_F,
    measure_of_F,
    omega_weighted_normal_oscillation,
    run_walks,
    wos_absorb,
)
from frozenflake.pipeline import PipelineRun, build_generations
from frozenflake.refine import (
    FrozenRegistry,
    GenerationCurve,
    SmoothCurve,
    advance,
    advance_windowed,
    assemble_G,
    initial_polygon,
    rechordalize,
    smooth,
)
from frozenflake.regularity import (
    FlatnessResult,
    RegularityReport,
    ReifenbergProfile,
    ahlfors_scan,
    flatness_failure_balls,
    reifenberg_profile,
    vertical_mass_per_generation,
)
from frozenflake.snowflake import (
    GammaCurve,
    GeneratorParams,
    clt_tail_exact,
    freeze_hit_exact,
    generate_gamma,
    replace_segment,
    vertical_mass_ratio,
)
from frozenflake.spatial import SpatialIndex


__version__ = "0.1.0"

__all__ = [
    "__version__",
    # Errors and warnings
    "ConfigError",
    "ConstructionError",
    "DegenerateInputError",
    "EmptyWindowError",
    "InsufficientSamplesWarning",
    "InvalidInputError",
    "InvalidParameterError",
    "NumericFailureError",
    "ResolutionWarning",
    "ResourceLimitError",
    "SnowflakeError",
    "TopologyError",
    "WalkTimeoutWarning",
    # Geometry
    "AngleRecord",
    "Arc",
    "Ball",
    "ClosedPolyline",
    "FitLine",
    "OrientedSegment",
    "Point",
    "SpatialIndex",
    "best_fit_line",
    "point_in_polygon",
    # Construction
    "FrozenRegistry",
    "GammaCurve",
    "GenerationCurve",
    "GeneratorParams",
    "PipelineRun",
    "RunConfig",
    "SmoothCurve",
    "advance",
    "advance_windowed",
    "assemble_G",
    "build_generations",
    "clt_tail_exact",
    "freeze_hit_exact",
    "generate_gamma",
    "initial_polygon",
    "rechordalize",
    "replace_segment",
    "smooth",
    "vertical_mass_ratio",
    # Analysis
    "FlatnessResult",
    "LocalMeasure",
    "MeasureEstimate",
    "RegularityReport",
    "ReifenbergProfile",
    "WalkResult",
    "WosBoundary",
    "WosConfig",
    "ahlfors_scan",
    "density_ratio_oscillation",
    "flatness_failure_balls",
    "localized_measure_of_F",
    "measure_of_F",
    "omega_weighted_normal_oscillation",
    "reifenberg_profile",
    "run_walks",
    "vertical_mass_per_generation",
    "wos_absorb",
]
