"""
Command-line interface.

    frozenflake generate     build generations; write snapshots, registry, manifest
    frozenflake analyze      regularity checks on a run, snapshots or a fixture
    frozenflake wos          harmonic-measure estimates by walk on spheres
    frozenflake export-svg   draw a snapshot, the latest curve of a run, or a fixture
    frozenflake report       summarize the reports saved in a run directory

Exit codes: 0 success, 1 a gating check failed, 2 a resource limit was hit,
3 invalid configuration or input.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Callable

import numpy as np

from frozenflake.config import RunConfig
from frozenflake.errors import (
    ConfigError,
    DegenerateInputError,
    EmptyWindowError,
    InvalidInputError,
    InvalidParameterError,
    ResourceLimitError,
    SnowflakeError,
)
from frozenflake.fixtures import get_fixture
from frozenflake.harmonic import (
    Side,
    WosBoundary,
    density_ratio_oscillation,
    estimate,
    exterior_pole,
    interior_pole,
    localized_measure_of_F,
    measure_of_F,
    omega_weighted_normal_oscillation,
    run_walks,
)
from frozenflake.output import (
    MANIFEST_NAME,
    Check,
    NormalOverlay,
    Report,
    curve_to_svg,
    load_manifest,
    load_registry,
    load_run,
    load_snapshot,
    save_run,
    to_svg,
)
from frozenflake.pipeline import PipelineRun, build_generations
from frozenflake.refine import FrozenRegistry
from frozenflake.regularity import (
    AHLFORS_BOUNDS,
    NORMAL_DEVIATION_FLOOR,
    VERTICAL_MASS_FLOOR,
    ahlfors_scan,
    flatness_failure_balls,
    generation_flatness,
    reifenberg_profile,
    vertical_mass_per_generation,
)


if TYPE_CHECKING:
    from collections.abc import Sequence

    from frozenflake.output import Value
    from frozenflake.regularity import FlatnessResult


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_RESOURCE = 2
EXIT_CONFIG = 3

REPORT_SUFFIX = ".report"

# RunConfig fields exposed as flags: (flag, help)
_CONFIG_FLAGS: tuple[tuple[str, str], ...] = (
    ("--generations", "number of refinement steps"),
    ("--m-schedule", "comma-separated M_n per generation, e.g. 2,3,4"),
    ("--m0", "M_0 when no schedule is given (M_n = m0 + n)"),
    ("--depth", "Gamma depth override (default M^2)"),
    ("--leaf-budget", "largest number of tree nodes per step"),
    ("--chord-budget", "largest number of chords per step"),
    ("--window", "'tracked' (lookahead window) or 'none' (global refinement)"),
    ("--initial-sides", "sides of the initial regular polygon"),
    ("--side-length", "side length of the initial polygon"),
    ("--walks", "walks per Monte Carlo run"),
    ("--epsilon-fraction", "absorption distance relative to the nearest edge"),
    ("--max-steps", "steps before a walk times out"),
    ("--sphere-cap-factor", "exterior re-entry radius in diameters"),
    ("--seed", "random seed"),
    ("--workers", "walk threads"),
    ("--chunk-size", "walks simulated together per task"),
    ("--ahlfors-samples", "ball centers of the Ahlfors scan"),
    ("--max-centers", "ball centers of the flatness profile"),
    ("--output-dir", "run directory"),
    ("--report-format", "'text' or 'structured'"),
)


# --- Argument parsing ---


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("run configuration (override the config file)")
    for flag, text in _CONFIG_FLAGS:
        group.add_argument(flag, default=argparse.SUPPRESS, help=text)


def _add_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--fixture", help="built-in curve (line, circle, disk, wedge, ...)")
    group.add_argument("--run", type=Path, help="run directory (default: output dir)")
    group.add_argument("--snapshot", type=Path, action="append", help="snapshot file")
    parser.add_argument("--registry", type=Path, help="registry file for --snapshot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frozenflake",
        description="Build and measure the frozen-snowflake domain.",
    )
    parser.add_argument("-c", "--config", type=Path, help="key=value config file")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build generations and write the run directory")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("analyze", help="Ahlfors, flatness and construction checks")
    _add_source(p)
    _add_config_flags(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("wos", help="harmonic-measure estimates")
    _add_source(p)
    p.add_argument("--arc", help="arc-length fraction range START:STOP to estimate")
    p.add_argument("--side", choices=("interior", "exterior"), default="interior")
    p.add_argument("--pole", help="walk start X,Y (default: deepest grid point)")
    p.add_argument("--expect", type=float, help="known measure of --arc")
    p.add_argument("--scales", help="comma-separated arc lengths for the density oscillation")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_wos)

    p = sub.add_parser("export-svg", help="draw a curve")
    _add_source(p)
    p.add_argument("--svg", type=Path, help="output file (default: <output dir>/<name>.svg)")
    p.add_argument("--overlay", action="store_true", help="draw failure balls and N_B")
    p.add_argument("--width", type=int, default=800)
    _add_config_flags(p)
    p.set_defaults(handler=cmd_export_svg)

    p = sub.add_parser("report", help="summarize the reports of a run directory")
    p.add_argument("--run", type=Path, help="run directory (default: output dir)")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_report)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Config file (if any) with command-line flags on top."""
    base = RunConfig.from_file(args.config) if args.config is not None else RunConfig()
    values = {}
    for flag, _ in _CONFIG_FLAGS:
        name = flag[2:].replace("-", "_")
        if hasattr(args, name):
            values[name] = str(getattr(args, name))
    return RunConfig.from_mapping(values, base)


def _source(args: argparse.Namespace, config: RunConfig) -> tuple[str, PipelineRun]:
    if args.fixture:
        curve = get_fixture(args.fixture).curve()
        return args.fixture, PipelineRun((curve,), FrozenRegistry(), (), ())
    if args.snapshot:
        loaded = [load_snapshot(p) for p in args.snapshot]
        curves = tuple(sorted(loaded, key=lambda c: c.generation))
        registry = load_registry(args.registry) if args.registry else FrozenRegistry()
        return args.snapshot[-1].stem, PipelineRun(curves, registry, (), ())
    directory = args.run if args.run is not None else config.output_dir
    return Path(directory).name, load_run(directory)


def _parse_pair(text: str, sep: str, what: str) -> tuple[float, float]:
    try:
        first, second = (float(part) for part in text.split(sep))
    except ValueError:
        raise ConfigError(f"{what} must look like A{sep}B, got {text!r}") from None
    return first, second


def _emit(report: Report, config: RunConfig, name: str) -> int:
    directory = Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = report.save(directory / f"{name}{REPORT_SUFFIX}", config.report_format)
    if config.report_format == "text":
        sys.stdout.write(report.to_text())
    else:
        sys.stdout.write(report.to_structured())
    logger.info("report written to %s", path)
    return EXIT_FAIL if report.failed else EXIT_OK


# --- Commands ---


def cmd_generate(args: argparse.Namespace, config: RunConfig) -> int:
    run = build_generations(config)
    written = save_run(run, config)
    for record in run.manifest_records():
        print(" ".join(f"{k}={v}" for k, v in record.items()))
    print(f"wrote {len(written)} files to {config.output_dir}")
    return EXIT_OK


def _failure_balls(run: PipelineRun) -> list[FlatnessResult]:
    if len(run) < 2 or any(c.tracked_edge is None for c in run.curves):
        return []
    return flatness_failure_balls(run.curves)


def analysis_report(label: str, run: PipelineRun, config: RunConfig) -> Report:
    """Regularity and construction checks of a run (or a single curve)."""
    report = Report("analyze")
    curve = run.latest
    lo, hi = AHLFORS_BOUNDS

    scan = ahlfors_scan(curve, samples=config.ahlfors_samples)
    report.add(Check("ahlfors_min", scan.min_ratio, lo, ">="))
    report.add(Check("ahlfors_max", scan.max_ratio, hi, "<="))
    report.table(
        "ahlfors",
        ({"radius": r, "min": a, "max": b} for r, (a, b) in scan.by_radius().items()),
    )

    fresh = curve.generation if curve.is_windowed else None
    profile = reifenberg_profile(curve, max_centers=config.max_centers, generation=fresh)
    report.table(
        "reifenberg",
        ({"radius": float(r), "sup_D": float(d)} for r, d in zip(profile.radii, profile.sup)),
    )
    if len(profile) >= 2:
        if label == "wedge":
            report.add(
                Check(
                    "reifenberg_spread",
                    profile.spread(),
                    0.05,
                    "<=",
                    gating=False,
                    detail="negative control: a corner does not flatten",
                )
            )
        else:
            report.add(
                Check(
                    "reifenberg_finest",
                    float(profile.sup[-1]),
                    float(profile.sup[0]),
                    "<=",
                    gating=False,
                )
            )

    if len(run) < 2:
        return report

    for c in run.curves[1:]:
        n = c.generation
        report.add(Check(f"equal_chords_g{n}", c.chord_spread(), 1e-9, "<="))
        report.add(Check(f"chord_turn_g{n}", c.max_chord_turn(), 2.0 ** (-n - 4) * math.pi, "<="))
    for p in run.persistence():
        report.add(Check(f"persistence_g{p.generation}", p.residual, p.tolerance, "<="))
    for generation, fraction in run.coverage().items():
        report.add(Check(f"coverage_g{generation}", fraction, 0.9, ">="))
    report.table(
        "proximity",
        (
            {"generation": c.generation, "distance": p.distance, "constant": p.constant}
            for c, p in zip(run.curves[1:], run.proximity())
        ),
    )
    for p, c in zip(run.proximity(), run.curves[1:]):
        report.add(Check(f"proximity_g{c.generation}", p.constant, 10.0, "<=", gating=False))

    for v in vertical_mass_per_generation(run.curves[1:], run.registry):
        report.add(
            Check(f"vertical_mass_g{v.generation}", v.ratio, VERTICAL_MASS_FLOOR, gating=False)
        )
        report.table(
            "vertical_mass",
            [{"generation": v.generation, "ratio": v.ratio, "tagged": v.tagged}],
        )

    balls = _failure_balls(run)
    for b in balls:
        report.table(
            "failure_balls",
            [
                {
                    "generation": b.generation if b.generation is not None else -1,
                    "radius": b.radius,
                    "D": b.D,
                    "deviation": b.normal_deviation,
                    "contained": b.contained,
                }
            ],
        )
        report.add(
            Check(
                f"failure_normal_g{b.generation}",
                b.normal_deviation,
                NORMAL_DEVIATION_FLOOR,
                gating=False,
            )
        )

    sups = []
    for c in run.curves[1:]:
        try:
            sups.append(generation_flatness(c, max_centers=config.max_centers))
        except DegenerateInputError as e:
            logger.warning("%s", e)
            continue
        report.table(
            "generation_flatness",
            [{"generation": c.generation, "radius": 16.0 * c.chord_length, "sup_D": sups[-1]}],
        )
    if len(sups) >= 2 and min(sups[:-1]) > 0:
        worst = max(b / a for a, b in zip(sups, sups[1:]))
        report.add(Check("flatness_decrease", worst, 1.0, "<=", gating=False))
    return report


def cmd_analyze(args: argparse.Namespace, config: RunConfig) -> int:
    label, run = _source(args, config)
    return _emit(analysis_report(label, run, config), config, "analyze")


def wos_report(
    run: PipelineRun,
    config: RunConfig,
    *,
    arc: tuple[float, float] | None = None,
    side: str = "interior",
    pole: tuple[float, float] | None = None,
    expect: float | None = None,
    scales: Sequence[float] = (),
) -> Report:
    """Walk-on-spheres estimates for the latest curve of a run."""
    report = Report("wos")
    cfg = config.wos()
    boundary = WosBoundary.from_curve(run.latest, cfg)
    eps = float(np.median(boundary.eps))
    has_f = len(run.registry) > 0
    if arc is None and not has_f and not scales:
        arc = (0.0, 0.25)

    if arc is not None:
        walk_side: Side = "exterior" if side == "exterior" else "interior"
        start = pole
        if start is None:
            p = exterior_pole(boundary) if walk_side == "exterior" else interior_pole(boundary)
            start = (p.x, p.y)
        result = run_walks(boundary, start, walk_side, cfg)
        ok = result.absorbed
        total = float(boundary.cumulative_length[-1])
        s = boundary.arc_position(result.edges[ok], result.points[ok]) / total
        est = estimate(result, {"arc": (s >= arc[0]) & (s < arc[1])}, eps)
        report.table(
            "arc",
            [
                {
                    "side": walk_side,
                    "start": arc[0],
                    "stop": arc[1],
                    "fraction": est.fraction(),
                    "half_width": est.half_width(),
                    "walks": est.walks,
                    "timeouts": est.timeouts,
                }
            ],
        )
        if expect is not None:
            deviation = abs(est.fraction() - expect) / max(est.half_width(), 1e-300)
            report.add(Check("arc_vs_expected", deviation, 3.0, "<=", detail="in half-widths"))

    if has_f:
        est = measure_of_F(boundary, run.registry, cfg)
        low, high = est.interval()
        report.table("omega_F_global", [{"fraction": est.fraction(), "low": low, "high": high}])

        local = localized_measure_of_F(boundary, run.registry, cfg)
        for m in local:
            lo_m, hi_m = m.estimate.interval()
            report.table(
                "omega_F_local",
                [
                    {
                        "generation": m.generation,
                        "radius": m.ball.radius,
                        "fraction": m.estimate.fraction(),
                        "low": lo_m,
                        "high": hi_m,
                        "absorbed": m.estimate.total_walks,
                    }
                ],
            )
        if local and local[0].estimate.total_walks > 0:
            outer = local[0].estimate
            report.add(Check("omega_F", outer.fraction(), 0.2, gating=False))
            report.add(Check("omega_F_low", outer.interval()[0], 0.1, gating=False))
        fractions = [m.estimate.fraction() for m in local]
        if len(fractions) == 2 and min(fractions) > 0:
            ratio = max(fractions) / min(fractions)
            report.add(Check("conditional_ratio", ratio, 2.0, "<=", gating=False))

        balls = _failure_balls(run)
        for b, osc in zip(balls, omega_weighted_normal_oscillation(boundary, balls, cfg)):
            report.table(
                "normal_oscillation",
                [
                    {
                        "generation": b.generation or 0,
                        "radius": b.radius,
                        "contained": b.contained,
                        "absorbed": osc.absorbed,
                        "mean_oscillation": osc.mean_oscillation,
                        "line_oscillation": math.nan
                        if osc.line_oscillation is None
                        else osc.line_oscillation,
                    }
                ],
            )
            if osc.absorbed == 0:
                continue
            report.add(
                Check(f"bprime_g{b.generation}", osc.mean_oscillation, 0.3, "<=", gating=False)
            )
            if osc.line_oscillation is not None:
                report.add(Check(f"b_g{b.generation}", osc.line_oscillation, 1.0, gating=False))

    for scale in scales:
        d = density_ratio_oscillation(boundary, scale, cfg)
        report.table(
            "density_oscillation",
            [
                {
                    "scale": scale,
                    "statistic": d.statistic,
                    "arcs": d.arcs,
                    "excluded": d.excluded_arcs,
                }
            ],
        )
    return report


def cmd_wos(args: argparse.Namespace, config: RunConfig) -> int:
    _, run = _source(args, config)
    report = wos_report(
        run,
        config,
        arc=_parse_pair(args.arc, ":", "--arc") if args.arc else None,
        side=args.side,
        pole=_parse_pair(args.pole, ",", "--pole") if args.pole else None,
        expect=args.expect,
        scales=_parse_scales(args.scales),
    )
    return _emit(report, config, "wos")


def _parse_scales(text: str | None) -> list[float]:
    if not text:
        return []
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--scales must be comma-separated numbers, got {text!r}") from None


def cmd_export_svg(args: argparse.Namespace, config: RunConfig) -> int:
    if args.fixture:
        fixture = get_fixture(args.fixture)
        label = fixture.name
        svg = to_svg(
            fixture.vertices,
            frozen=fixture.frozen if len(fixture.frozen) else None,
            closed=fixture.closed,
            width=args.width,
            title=fixture.name,
        )
    else:
        label, run = _source(args, config)
        balls, normals = [], []
        if args.overlay:
            for b in _failure_balls(run):
                balls.append(b.ball)
                normals.append(NormalOverlay((b.center.x, b.center.y), b.line_normal, b.radius))
        svg = curve_to_svg(run.latest, balls=balls, normals=normals, width=args.width)
    path = args.svg if args.svg is not None else Path(config.output_dir) / f"{label}.svg"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace, config: RunConfig) -> int:
    directory = Path(args.run if args.run is not None else config.output_dir)
    if not directory.is_dir():
        raise InvalidInputError(f"no run directory {directory}")
    failed = False
    manifest = directory / MANIFEST_NAME
    if manifest.exists():
        summary = Report("manifest")
        rows: list[dict[str, Value]] = [dict(r) for r in load_manifest(manifest)]
        summary.table("generations", rows)
        sys.stdout.write(summary.to_text())
    for path in sorted(directory.glob(f"*{REPORT_SUFFIX}")):
        text = path.read_text()
        if text.startswith("report="):
            report = Report.from_structured(text)
            failed |= report.failed
            structured = config.report_format == "structured"
            text = report.to_structured() if structured else report.to_text()
        elif any(line.rstrip().endswith("FAIL") for line in text.splitlines()):
            failed = True
        sys.stdout.write(f"\n== {path.name}\n{text}")
    return EXIT_FAIL if failed else EXIT_OK


# --- Entry point ---

_EXIT_CODES: tuple[tuple[type[Exception], int], ...] = (
    (ResourceLimitError, EXIT_RESOURCE),
    (ConfigError, EXIT_CONFIG),
    (InvalidInputError, EXIT_CONFIG),
    (InvalidParameterError, EXIT_CONFIG),
    (EmptyWindowError, EXIT_CONFIG),
    (SnowflakeError, EXIT_FAIL),
)


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the command line.

    Returns:
        Exit code: 0 ok, 1 failed check, 2 resource limit, 3 bad config or input.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)

    handler: Callable[[argparse.Namespace, RunConfig], int] = args.handler
    try:
        config = load_config(args)
        return handler(args, config)
    except SnowflakeError as e:
        code = next(code for kind, code in _EXIT_CODES if isinstance(e, kind))
        print(f"frozenflake: error: {e}", file=sys.stderr)
        return code


__all__ = [
    "EXIT_CONFIG",
    "EXIT_FAIL",
    "EXIT_OK",
    "EXIT_RESOURCE",
    "analysis_report",
    "build_parser",
    "load_config",
    "main",
    "wos_report",
]
