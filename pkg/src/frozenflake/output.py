"""
Output formatters for frozenflake runs.

Supports:
- Curve snapshots (text, 17 significant digits, bit-exact round trip)
- Registry files (one ``# generation k`` block per generation)
- Manifests and reports (human-readable text or key=value records)
- SVG drawings of a curve with optional ball and normal overlays
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Literal, Union

import numpy as np

from frozenflake.errors import InvalidInputError
from frozenflake.geometry import Ball, Point
from frozenflake.pipeline import PipelineRun
from frozenflake.refine import (
    BuildStats,
    FineRun,
    Frame,
    FrozenRegistry,
    GenerationCurve,
    RegistryBlock,
)


if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from numpy.typing import NDArray

    from frozenflake.config import RunConfig


logger = logging.getLogger(__name__)

Value = Union[str, int, float, bool]
ReportFormat = Literal["text", "structured"]

SNAPSHOT_SUFFIX = ".curve"


def _get_version() -> str:
    from frozenflake import __version__

    return __version__


def format_value(value: Value | None) -> str:
    """17 significant digits for floats; lowercase booleans; ``none`` for None."""
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def format_record(record: dict[str, Value]) -> str:
    return " ".join(f"{key}={format_value(value)}" for key, value in record.items())


def parse_record(line: str) -> dict[str, str]:
    """Inverse of :func:`format_record` (values stay strings)."""
    out: dict[str, str] = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise InvalidInputError(f"expected key=value, got {token!r}")
        out[key] = value
    return out


# --- Run-length codes ---


def _rle(values: Iterable[str]) -> str:
    parts: list[str] = []
    last, count = None, 0
    for value in values:
        if value == last:
            count += 1
            continue
        if last is not None:
            parts.append(f"{last}*{count}")
        last, count = value, 1
    if last is not None:
        parts.append(f"{last}*{count}")
    return ",".join(parts)


def _unrle(text: str) -> list[str]:
    out: list[str] = []
    for part in filter(None, text.split(",")):
        value, _, count = part.rpartition("*")
        out.extend([value] * int(count))
    return out


# --- Curve snapshots ---


def to_snapshot(curve: GenerationCurve) -> str:
    """
    Serialize a generation curve.

    Header lines start with ``#``; then one ``x y`` vertex per line, the
    closing vertex implied.

    Returns:
        Snapshot text.
    """
    frozen = ",".join(str(i) for i in np.flatnonzero(curve.frozen))
    lines = [
        f"# frozenflake {_get_version()}",
        f"# generation {curve.generation}",
        f"# chord_length {curve.chord_length:.17g}",
        f"# frozen {frozen}",
        f"# tracked {format_value(curve.tracked_edge)}",
        "# frame " + ";".join(f"{x:.17g},{y:.17g}" for x, y in curve.frame.offsets),
        "# runs " + ",".join(f"{r.start}:{r.stop}:{r.chord_length:.17g}" for r in curve.fine_runs),
        "# turns " + _rle(f"{n}/{d}" for n, d in zip(curve.turns_num, curve.turns_den)),
        "# edge_generation " + _rle(str(g) for g in curve.edge_generation),
    ]
    if curve.stats is not None:
        stats = asdict(curve.stats)
        stats["chord_lengths"] = ":".join(f"{c:.17g}" for c in curve.stats.chord_lengths)
        lines.append("# stats " + format_record(stats))
    lines.extend(f"{x:.17g} {y:.17g}" for x, y in curve.vertices)
    return "\n".join(lines) + "\n"


def from_snapshot(text: str) -> GenerationCurve:
    """Parse snapshot text written by :func:`to_snapshot`."""
    headers: dict[str, str] = {}
    rows: list[tuple[float, float]] = []
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            headers[key] = value.strip()
            continue
        try:
            x, y = line.split()
            rows.append((float(x), float(y)))
        except ValueError:
            raise InvalidInputError(f"line {number}: expected 'x y', got {line!r}") from None
    if "generation" not in headers or "chord_length" not in headers:
        raise InvalidInputError("snapshot lacks generation or chord_length header")
    if len(rows) < 3:
        raise InvalidInputError(f"snapshot has {len(rows)} vertices, need at least 3")

    vertices = np.array(rows, dtype=np.float64)
    n = len(vertices)
    generation = int(headers["generation"])
    chord_length = float(headers["chord_length"])
    frozen = np.zeros(n, dtype=bool)
    frozen[[int(i) for i in filter(None, headers.get("frozen", "").split(","))]] = True

    turns = _unrle(headers.get("turns", ""))
    if turns:
        pairs = [t.split("/") for t in turns]
        num = np.array([int(p) for p, _ in pairs], dtype=np.int64)
        den = np.array([int(q) for _, q in pairs], dtype=np.int64)
    else:
        num = np.zeros(n, dtype=np.int64)
        den = np.zeros(n, dtype=np.int64)
    gens = _unrle(headers.get("edge_generation", ""))
    edge_generation = (
        np.array([int(g) for g in gens], dtype=np.int64)
        if gens
        else np.full(n, generation, dtype=np.int64)
    )
    runs = tuple(
        FineRun(int(start), int(stop), float(length))
        for start, stop, length in (
            part.split(":") for part in filter(None, headers.get("runs", "").split(","))
        )
    ) or (FineRun(0, n, chord_length),)
    offsets = tuple(
        (float(x), float(y))
        for x, y in (part.split(",") for part in filter(None, headers.get("frame", "").split(";")))
    )
    tracked = headers.get("tracked", "none")
    return GenerationCurve(
        vertices=vertices,
        generation=generation,
        chord_length=chord_length,
        frozen=frozen,
        turns_num=num,
        turns_den=den,
        edge_generation=edge_generation,
        fine_runs=runs,
        tracked_edge=None if tracked == "none" else int(tracked),
        frame=Frame(offsets),
        stats=_parse_stats(headers["stats"]) if "stats" in headers else None,
    )


def _parse_stats(text: str) -> BuildStats:
    raw = parse_record(text)
    return BuildStats(
        generation=int(raw["generation"]),
        M=int(raw["M"]),
        depth=int(raw["depth"]),
        nominal_segments=int(raw["nominal_segments"]),
        built_segments=int(raw["built_segments"]),
        min_segment=float(raw["min_segment"]),
        chords=int(raw["chords"]),
        chord_lengths=tuple(float(c) for c in filter(None, raw["chord_lengths"].split(":"))),
        vertical_exact=float(raw["vertical_exact"]),
        vertical_tagged=float(raw["vertical_tagged"]),
        closure_residual=float(raw["closure_residual"]),
        windowed=raw["windowed"] == "true",
    )


def snapshot_path(directory: Path | str, generation: int) -> Path:
    return Path(directory) / f"generation-{generation:03d}{SNAPSHOT_SUFFIX}"


def save_snapshot(curve: GenerationCurve, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(to_snapshot(curve))
    logger.debug("wrote %s (%d vertices)", path, len(curve))
    return path


def load_snapshot(path: Path | str) -> GenerationCurve:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InvalidInputError(f"cannot read snapshot {path}: {e}") from e
    return from_snapshot(text)


# --- Registry ---


def to_registry(registry: FrozenRegistry) -> str:
    """Serialize the frozen registry, one block per generation."""
    lines = [f"# frozenflake {_get_version()}"]
    for block in registry.blocks:
        lines.append(f"# generation {block.generation}")
        lines.append(f"# chord_length {block.chord_length:.17g}")
        lines.append("# frame " + ";".join(f"{x:.17g},{y:.17g}" for x, y in block.frame.offsets))
        for i in range(len(block)):
            coding = "".join(str(c) for c in block.codings[i, : block.levels[i]]) or "-"
            (ax, ay), (bx, by) = block.a[i], block.b[i]
            lines.append(
                f"{ax:.17g} {ay:.17g} {bx:.17g} {by:.17g} {int(block.pieces[i])} {coding}"
            )
    return "\n".join(lines) + "\n"


def from_registry(text: str) -> FrozenRegistry:
    """Parse registry text written by :func:`to_registry`."""
    registry = FrozenRegistry()
    current: dict[str, str] | None = None
    rows: list[list[str]] = []

    def flush() -> None:
        nonlocal registry
        if current is not None:
            registry = registry.with_block(_registry_block(current, rows))

    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            if key == "generation":
                flush()
                current, rows = {"generation": value.strip()}, []
            elif current is not None:
                current[key] = value.strip()
            continue
        parts = line.split()
        if current is None or len(parts) != 6:
            raise InvalidInputError(f"line {number}: malformed registry row {line!r}")
        rows.append(parts)
    flush()
    return registry


def _registry_block(header: dict[str, str], rows: list[list[str]]) -> RegistryBlock:
    n = len(rows)
    coords = np.array([[float(v) for v in row[:4]] for row in rows], dtype=np.float64)
    coords = coords.reshape(n, 4)
    codings = ["" if row[5] == "-" else row[5] for row in rows]
    width = max([len(c) for c in codings] + [1])
    table = np.zeros((n, width), dtype=np.uint8)
    for i, coding in enumerate(codings):
        table[i, : len(coding)] = [int(c) for c in coding]
    offsets = tuple(
        (float(x), float(y))
        for x, y in (part.split(",") for part in filter(None, header.get("frame", "").split(";")))
    )
    return RegistryBlock(
        generation=int(header["generation"]),
        a=coords[:, :2].copy(),
        b=coords[:, 2:].copy(),
        pieces=np.array([int(row[4]) for row in rows], dtype=np.int64),
        levels=np.array([len(c) for c in codings], dtype=np.int64),
        codings=table,
        frame=Frame(offsets),
        chord_length=float(header.get("chord_length", "nan")),
    )


def save_registry(registry: FrozenRegistry, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(to_registry(registry))
    return path


def load_registry(path: Path | str) -> FrozenRegistry:
    path = Path(path)
    try:
        return from_registry(path.read_text())
    except OSError as e:
        raise InvalidInputError(f"cannot read registry {path}: {e}") from e


# --- Manifest ---


def to_manifest(records: Sequence[dict[str, Value]]) -> str:
    return "\n".join(format_record(r) for r in records) + "\n"


def load_manifest(path: Path | str) -> list[dict[str, str]]:
    lines = Path(path).read_text().splitlines()
    return [parse_record(line) for line in lines if line.strip() and not line.startswith("#")]


# --- Run directories ---

MANIFEST_NAME = "manifest.txt"
REGISTRY_NAME = "registry.txt"
CONFIG_NAME = "config.txt"


def save_run(run: PipelineRun, config: RunConfig) -> list[Path]:
    """
    Write a run to ``config.output_dir``.

    Writes one snapshot per generation, the registry, the manifest and the
    config that produced them.

    Returns:
        Paths written, snapshots first.
    """
    directory = Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = [
        save_snapshot(curve, snapshot_path(directory, curve.generation)) for curve in run.curves
    ]
    written.append(save_registry(run.registry, directory / REGISTRY_NAME))
    manifest = directory / MANIFEST_NAME
    manifest.write_text(to_manifest(run.manifest_records()))
    written.append(manifest)
    settings = directory / CONFIG_NAME
    settings.write_text("\n".join(config.to_lines()) + "\n")
    written.append(settings)
    logger.info("wrote %d files to %s", len(written), directory)
    return written


def load_run(directory: Path | str) -> PipelineRun:
    """Read a run written by :func:`save_run`."""
    directory = Path(directory)
    paths = sorted(directory.glob(f"generation-*{SNAPSHOT_SUFFIX}"))
    if not paths:
        raise InvalidInputError(f"no snapshots in {directory}")
    curves = tuple(load_snapshot(p) for p in paths)
    registry_file = directory / REGISTRY_NAME
    registry = load_registry(registry_file) if registry_file.exists() else FrozenRegistry()
    schedule = tuple(c.stats.M for c in curves[1:] if c.stats is not None)
    windows: list[Ball | None] = [None] * (len(curves) - 1)
    manifest = directory / MANIFEST_NAME
    if manifest.exists():
        for record in load_manifest(manifest):
            k = int(record["generation"]) - curves[0].generation - 1
            if 0 <= k < len(windows) and "window_radius" in record:
                windows[k] = Ball(
                    Point(float(record["window_x"]), float(record["window_y"])),
                    float(record["window_radius"]),
                )
    return PipelineRun(curves, registry, schedule, tuple(windows))


# --- Reports ---


@dataclass(frozen=True)
class Check:
    """
    One PASS/FAIL line of a report.

    A non-gating check is reported but never fails the run; pilot-calibrated
    thresholds are non-gating.
    """

    name: str
    value: float
    threshold: float
    relation: Literal["<=", ">="] = ">="
    gating: bool = True
    detail: str = ""

    @property
    def passed(self) -> bool:
        if math.isnan(self.value):
            return False
        if self.relation == ">=":
            return self.value >= self.threshold
        return self.value <= self.threshold

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def record(self) -> dict[str, Value]:
        out: dict[str, Value] = {
            "check": self.name,
            "value": self.value,
            "relation": self.relation,
            "threshold": self.threshold,
            "status": self.status,
            "gating": self.gating,
        }
        if self.detail:
            out["detail"] = self.detail.replace(" ", "_")
        return out


@dataclass
class Report:
    """
    Checks plus measured tables of one command.

    Example:
        >>> report = Report("analyze")
        >>> report.add(Check("ahlfors_min", 0.9, 0.4))
        >>> report.failed
        False
    """

    title: str
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[dict[str, Value]]] = field(default_factory=dict)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    def table(self, name: str, rows: Iterable[dict[str, Value]]) -> None:
        self.tables.setdefault(name, []).extend(rows)

    @property
    def failed(self) -> bool:
        """Whether any gating check failed."""
        return any(c.gating and not c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"frozenflake {_get_version()} {self.title} report", ""]
        if self.checks:
            width = max(len(c.name) for c in self.checks)
            for c in self.checks:
                tag = c.status if c.gating else f"{c.status} (pilot)"
                lines.append(
                    f"  {c.name:<{width}}  {c.value:12.6g} {c.relation} {c.threshold:<10.6g} {tag}"
                )
                if c.detail:
                    lines.append(f"  {'':<{width}}  {c.detail}")
        for name, rows in self.tables.items():
            lines.extend(["", f"[{name}]"])
            lines.extend("  " + format_record(row) for row in rows)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_structured(cls, text: str) -> Report:
        """Parse text written by :meth:`to_structured`; table values stay strings."""
        report = cls("")
        for line in text.splitlines():
            if not line.strip():
                continue
            record = parse_record(line)
            if "report" in record:
                report.title = record["report"]
            elif "check" in record:
                relation = record.get("relation", ">=")
                report.add(
                    Check(
                        name=record["check"],
                        value=float(record["value"]),
                        threshold=float(record["threshold"]),
                        relation="<=" if relation == "<=" else ">=",
                        gating=record.get("gating", "true") == "true",
                        detail=record.get("detail", "").replace("_", " "),
                    )
                )
            elif "table" in record:
                name = record.pop("table")
                row: dict[str, Value] = dict(record)
                report.table(name, [row])
        return report

    def to_structured(self) -> str:
        lines = [format_record({"report": self.title, "version": _get_version()})]
        lines.extend(format_record(c.record()) for c in self.checks)
        for name, rows in self.tables.items():
            lines.extend(format_record({"table": name, **row}) for row in rows)
        return "\n".join(lines) + "\n"

    def save(self, path: Path | str, format: ReportFormat = "text") -> Path:
        """
        Write the report.

        Args:
            path: Output file path.
            format: ``"text"`` or ``"structured"`` (one key=value record per line).
        """
        path = Path(path)
        if format == "text":
            path.write_text(self.to_text())
        elif format == "structured":
            path.write_text(self.to_structured())
        else:
            raise ValueError(f"Unknown format: {format}")
        return path


# --- SVG ---


@dataclass(frozen=True)
class NormalOverlay:
    """An arrow of length ``length`` from ``origin`` along unit vector ``normal``."""

    origin: tuple[float, float]
    normal: tuple[float, float]
    length: float


def to_svg(
    vertices: NDArray[np.float64],
    *,
    frozen: NDArray[np.bool_] | None = None,
    closed: bool = True,
    balls: Sequence[Ball] = (),
    normals: Sequence[NormalOverlay] = (),
    width: int = 800,
    title: str = "",
) -> str:
    """
    Render a polyline as SVG.

    The path is drawn in one ``curve`` path; frozen edges are drawn again
    in class ``frozen``. The viewBox fits the bounding box of everything
    drawn with a 5% margin; y is flipped so the picture reads upright.
    """
    v = np.asarray(vertices, dtype=np.float64)
    if v.ndim != 2 or len(v) < 2:
        raise InvalidInputError(f"need at least 2 vertices, got shape {v.shape}")
    pts = [v]
    for b in balls:
        c = b.center.as_array()
        pts.append(np.array([c - b.radius, c + b.radius]))
    for o in normals:
        pts.append(np.array([o.origin, np.add(o.origin, np.multiply(o.normal, o.length))]))
    allpts = np.vstack(pts)
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = np.maximum(hi - lo, np.finfo(float).tiny)
    margin = 0.05 * span
    lo, span = lo - margin, span + 2 * margin
    height = max(1, round(width * span[1] / span[0]))
    stroke = 0.002 * float(span.max())

    def xy(p: Sequence[float]) -> str:
        return f"{p[0]:.10g},{-p[1]:.10g}"

    d = "M" + " L".join(xy(p) for p in v) + (" Z" if closed else "")
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{lo[0]:.10g} {-(lo[1] + span[1]):.10g} {span[0]:.10g} {span[1]:.10g}">',
        f"<title>{title or 'frozenflake curve'}</title>",
        "<style>"
        f".curve{{fill:none;stroke:#222;stroke-width:{stroke:.6g}}}"
        f".frozen{{fill:none;stroke:#d62728;stroke-width:{2 * stroke:.6g}}}"
        f".ball{{fill:none;stroke:#1f77b4;stroke-width:{stroke:.6g}}}"
        f".normal{{stroke:#2ca02c;stroke-width:{stroke:.6g}}}"
        "</style>",
        f'<path class="curve" d="{d}"/>',
    ]
    if frozen is not None and np.any(frozen):
        nxt = np.roll(v, -1, axis=0)
        segs = " ".join(f"M{xy(v[i])} L{xy(nxt[i])}" for i in np.flatnonzero(frozen))
        lines.append(f'<path class="frozen" d="{segs}"/>')
    for b in balls:
        lines.append(
            f'<circle class="ball" cx="{b.center.x:.10g}" cy="{-b.center.y:.10g}" '
            f'r="{b.radius:.10g}"/>'
        )
    for o in normals:
        tip = np.add(o.origin, np.multiply(o.normal, o.length))
        lines.append(
            f'<line class="normal" x1="{o.origin[0]:.10g}" y1="{-o.origin[1]:.10g}" '
            f'x2="{tip[0]:.10g}" y2="{-tip[1]:.10g}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def curve_to_svg(
    curve: GenerationCurve,
    *,
    balls: Sequence[Ball] = (),
    normals: Sequence[NormalOverlay] = (),
    width: int = 800,
) -> str:
    """SVG of a generation curve in its own frame."""
    return to_svg(
        curve.vertices,
        frozen=curve.frozen,
        balls=balls,
        normals=normals,
        width=width,
        title=f"generation {curve.generation}",
    )


__all__ = [
    "CONFIG_NAME",
    "MANIFEST_NAME",
    "REGISTRY_NAME",
    "SNAPSHOT_SUFFIX",
    "Check",
    "NormalOverlay",
    "Report",
    "curve_to_svg",
    "format_record",
    "format_value",
    "from_registry",
    "from_snapshot",
    "load_manifest",
    "load_registry",
    "load_run",
    "load_snapshot",
    "parse_record",
    "save_registry",
    "save_run",
    "save_snapshot",
    "snapshot_path",
    "to_manifest",
    "to_registry",
    "to_snapshot",
    "to_svg",
]
