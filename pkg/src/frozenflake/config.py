"""
Run configuration.

A :class:`RunConfig` can be built directly, from ``key=value`` lines (the
config file format, ``#`` starts a comment), or from command-line flags
layered on top of a file. Every invalid value raises ``ConfigError``.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal, get_args

from frozenflake.errors import ConfigError, InvalidParameterError
from frozenflake.harmonic import WosConfig
from frozenflake.refine import DEFAULT_CHORD_BUDGET
from frozenflake.snowflake import DEFAULT_LEAF_BUDGET


if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping


logger = logging.getLogger(__name__)

WindowMode = Literal["tracked", "none"]
ReportFormat = Literal["text", "structured"]

_INT_FIELDS = {
    "m0",
    "generations",
    "leaf_budget",
    "chord_budget",
    "initial_sides",
    "walks",
    "max_steps",
    "seed",
    "workers",
    "chunk_size",
    "ahlfors_samples",
    "max_centers",
}
_FLOAT_FIELDS = {"side_length", "epsilon_fraction", "sphere_cap_factor"}


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a run needs.

    ``m_schedule`` lists M_n per generation; when empty, M_n = m0 + n.
    ``depth`` overrides the canonical Gamma depth M^2 (None keeps it).
    ``window="tracked"`` builds each generation inside the lookahead window
    of the tracked horizontal edge; ``"none"`` refines globally.
    """

    m_schedule: tuple[int, ...] = ()
    m0: int = 2
    generations: int = 1
    depth: int | None = None
    leaf_budget: int = DEFAULT_LEAF_BUDGET
    chord_budget: int = DEFAULT_CHORD_BUDGET
    window: WindowMode = "tracked"
    initial_sides: int = 100
    side_length: float = 1.0
    walks: int = 100_000
    epsilon_fraction: float = 0.25
    max_steps: int = 1_000_000
    sphere_cap_factor: float = 10.0
    seed: int = 0
    workers: int = 1
    chunk_size: int = 10_000
    ahlfors_samples: int = 100
    max_centers: int = 64
    output_dir: Path = field(default_factory=lambda: Path("frozenflake-run"))
    report_format: ReportFormat = "text"

    def __post_init__(self) -> None:
        if any(m < 1 for m in self.m_schedule):
            raise ConfigError(f"M values must be positive, got {list(self.m_schedule)}")
        if any(b < a for a, b in zip(self.m_schedule, self.m_schedule[1:])):
            raise ConfigError(f"M schedule must be non-decreasing, got {list(self.m_schedule)}")
        if self.m0 < 1:
            raise ConfigError(f"m0 must be positive, got {self.m0}")
        if self.generations < 0:
            raise ConfigError(f"generations must be >= 0, got {self.generations}")
        if self.m_schedule and self.generations > len(self.m_schedule):
            raise ConfigError(
                f"{self.generations} generations need {self.generations} M values, "
                f"schedule has {len(self.m_schedule)}"
            )
        if self.depth is not None and self.depth < 1:
            raise ConfigError(f"depth must be positive, got {self.depth}")
        if self.leaf_budget < 1 or self.chord_budget < 1:
            raise ConfigError("budgets must be positive")
        if self.window not in get_args(WindowMode):
            raise ConfigError(f"window must be 'tracked' or 'none', got {self.window!r}")
        if self.report_format not in get_args(ReportFormat):
            raise ConfigError(
                f"report_format must be 'text' or 'structured', got {self.report_format!r}"
            )
        if self.initial_sides < 3:
            raise ConfigError(f"initial_sides must be >= 3, got {self.initial_sides}")
        if not self.side_length > 0:
            raise ConfigError(f"side_length must be positive, got {self.side_length}")
        if self.ahlfors_samples < 1 or self.max_centers < 1:
            raise ConfigError("ahlfors_samples and max_centers must be positive")
        try:
            self.wos()
        except InvalidParameterError as e:
            raise ConfigError(str(e)) from e

    @property
    def schedule(self) -> tuple[int, ...]:
        """M_n for n = 0 .. generations - 1."""
        if self.m_schedule:
            return self.m_schedule[: self.generations]
        return tuple(self.m0 + n for n in range(self.generations))

    def wos(self) -> WosConfig:
        return WosConfig(
            walks=self.walks,
            epsilon_fraction=self.epsilon_fraction,
            max_steps=self.max_steps,
            sphere_cap_factor=self.sphere_cap_factor,
            seed=self.seed,
            workers=self.workers,
            chunk_size=self.chunk_size,
        )

    # --- Serialization ---

    @classmethod
    def from_mapping(cls, values: Mapping[str, str], base: RunConfig | None = None) -> RunConfig:
        """Apply string values (file or flags) on top of ``base``."""
        base = base if base is not None else cls()
        known = {f.name for f in dataclasses.fields(cls)}
        changes: dict[str, Any] = {}
        for key, raw in values.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            changes[name] = _parse(name, raw.strip())
        return dataclasses.replace(base, **changes)

    @classmethod
    def from_lines(cls, lines: Iterable[str], base: RunConfig | None = None) -> RunConfig:
        values: dict[str, str] = {}
        for number, line in enumerate(lines, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"line {number}: expected key=value, got {line.strip()!r}")
            values[key.strip()] = value
        return cls.from_mapping(values, base)

    @classmethod
    def from_file(cls, path: Path | str, base: RunConfig | None = None) -> RunConfig:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        logger.debug("loading config from %s", path)
        return cls.from_lines(text.splitlines(), base)

    def to_lines(self) -> list[str]:
        """``key=value`` lines that ``from_lines`` reads back to an equal config."""
        out = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "m_schedule":
                text = ",".join(str(m) for m in value)
            elif value is None:
                text = "none"
            else:
                text = str(value)
            out.append(f"{f.name}={text}")
        return out


def _parse(name: str, raw: str) -> Any:
    try:
        if name == "m_schedule":
            return tuple(int(part) for part in raw.replace(" ", "").split(",") if part)
        if name == "depth":
            return None if raw.lower() in ("", "none") else int(raw)
        if name in _INT_FIELDS:
            return int(raw)
        if name in _FLOAT_FIELDS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {raw!r}") from None
    if name == "output_dir":
        return Path(raw)
    return raw


__all__ = ["ReportFormat", "RunConfig", "WindowMode"]
