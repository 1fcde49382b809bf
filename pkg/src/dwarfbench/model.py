"""Vocabulary types: size classes, device profiles, regions, benchmark specs,
samples and summaries, plus the benchmark registry.

Everything here is immutable after construction.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import (
    ConfigError,
    NonPositiveBudget,
    OrderingViolation,
    UnknownBenchmark,
)

KIB = 1024
MIB = 1024 * KIB
GIB = 1024 * MIB


@enum.unique
class SizeClass(enum.Enum):
    TINY = "tiny"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"

    @property
    def rank(self) -> int:
        return _CLASS_ORDER.index(self)

    def __lt__(self, other: SizeClass) -> bool:
        if not isinstance(other, SizeClass):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other: SizeClass) -> bool:
        if not isinstance(other, SizeClass):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other: SizeClass) -> bool:
        if not isinstance(other, SizeClass):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other: SizeClass) -> bool:
        if not isinstance(other, SizeClass):
            return NotImplemented
        return self.rank >= other.rank

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> SizeClass:
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ConfigError(f"unknown size class {text!r}") from None


_CLASS_ORDER = (SizeClass.TINY, SizeClass.SMALL, SizeClass.MEDIUM, SizeClass.LARGE)
SIZE_CLASSES: tuple[SizeClass, ...] = _CLASS_ORDER


@enum.unique
class Region(enum.Enum):
    SETUP = "setup"
    TRANSFER_IN = "transfer_in"
    COMPUTE = "compute"
    TRANSFER_OUT = "transfer_out"
    TEARDOWN = "teardown"

    def __str__(self) -> str:
        return self.value


ALL_REGIONS: tuple[Region, ...] = tuple(Region)


# -- key=value text files ------------------------------------------------------

def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def format_key_values(pairs: Mapping[str, object], comment: str | None = None) -> str:
    lines = [f"# {comment}"] if comment else []
    lines.extend(f"{k}={v}" for k, v in pairs.items())
    return "\n".join(lines) + "\n"


# -- device profiles -------------------------------------------------------------

@dataclass(frozen=True)
class DeviceProfile:
    id: str
    l1_bytes: int
    llc_bytes: int
    dram_bytes: int
    description: str = ""

    def __post_init__(self):
        if not self.id or any(c in self.id for c in ",\n\r="):
            raise ConfigError(f"invalid device id {self.id!r}")
        budgets = (self.l1_bytes, self.llc_bytes, self.dram_bytes)
        for name, value in zip(("l1_bytes", "llc_bytes", "dram_bytes"), budgets):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer byte count, got {value!r}")
            if value <= 0:
                raise NonPositiveBudget(f"{name} must be > 0, got {value}")
        if not (self.l1_bytes < self.llc_bytes < self.dram_bytes):
            raise OrderingViolation(
                "budgets must satisfy l1_bytes < llc_bytes < dram_bytes, got "
                f"{self.l1_bytes} / {self.llc_bytes} / {self.dram_bytes}"
            )

    def to_text(self) -> str:
        pairs = {
            "id": self.id,
            "l1_bytes": self.l1_bytes,
            "llc_bytes": self.llc_bytes,
            "dram_bytes": self.dram_bytes,
        }
        if self.description:
            pairs["description"] = self.description
        return format_key_values(pairs)

    def digest(self) -> str:
        """Short stable hash of the budgets, recorded in run log headers."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _as_byte_count(name: str, value: object) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name}: not a byte count: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value) or value != int(value):
            raise ConfigError(f"{name}: not an integral byte count: {value!r}")
        return int(value)
    if isinstance(value, str):
        text = value.strip().replace("_", "")
        try:
            return int(text)
        except ValueError:
            pass
        try:
            return _as_byte_count(name, float(text))
        except ValueError:
            raise ConfigError(f"{name}: not a byte count: {value!r}") from None
    raise ConfigError(f"{name}: not a byte count: {value!r}")


def validate_device_profile(raw: Mapping[str, object]) -> DeviceProfile:
    """Build a :class:`DeviceProfile` from a loose field mapping.

    Byte counts may be ints, integral floats or numeric strings. Raises
    ``NonPositiveBudget`` or ``OrderingViolation`` on bad budgets and
    ``ConfigError`` on missing or unknown keys.
    """
    required = ("l1_bytes", "llc_bytes", "dram_bytes")
    missing = [k for k in required if k not in raw]
    if missing:
        raise ConfigError(f"device profile missing keys: {', '.join(missing)}")
    unknown = set(raw) - {"id", "description", *required}
    if unknown:
        raise ConfigError(f"device profile has unknown keys: {', '.join(sorted(unknown))}")
    budgets = {k: _as_byte_count(k, raw[k]) for k in required}
    return DeviceProfile(
        id=str(raw.get("id", "device")),
        description=str(raw.get("description", "")),
        **budgets,
    )


def load_device_profile(path: str | Path) -> DeviceProfile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read device profile {path}: {exc}") from exc
    return validate_device_profile(parse_key_values(text))


# Placeholder budgets, not measured from any particular device.
DEFAULT_PROFILE = DeviceProfile(
    id="default",
    description="generic host: 32 KiB L1, 8 MiB LLC, 16 GiB DRAM",
    l1_bytes=32 * KIB,
    llc_bytes=8 * MIB,
    dram_bytes=16 * GIB,
)


# -- benchmarks ---------------------------------------------------------------------

DWARF_CLASSES = (
    "dense-linear-algebra",
    "sparse-linear-algebra",
    "spectral",
    "dynamic-programming",
    "map-reduce",
    "combinational-logic",
    "graph-traversal",
    "structured-grid",
)


@dataclass(frozen=True)
class ParamBounds:
    name: str
    low: int
    high: int

    def check(self, value: int) -> bool:
        return self.low <= value <= self.high


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    dwarf_class: str
    param_schema: tuple[ParamBounds, ...]
    regions: tuple[Region, ...]
    growth_param: str
    description: str = ""

    def __post_init__(self):
        if self.dwarf_class not in DWARF_CLASSES:
            raise ValueError(f"unknown dwarf class {self.dwarf_class!r}")
        if not self.param_schema:
            raise ValueError(f"{self.name}: empty parameter schema")
        if Region.COMPUTE not in self.regions:
            raise ValueError(f"{self.name}: every benchmark must emit a compute region")
        order = [ALL_REGIONS.index(r) for r in self.regions]
        if order != sorted(set(order)):
            raise ValueError(f"{self.name}: regions must follow the canonical order")
        if self.growth_param not in self.param_names:
            raise ValueError(f"{self.name}: growth parameter not in schema")

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.param_schema)

    def bounds(self, name: str) -> ParamBounds:
        for p in self.param_schema:
            if p.name == name:
                return p
        raise KeyError(name)


def _spec(name, dwarf, params, growth, regions=ALL_REGIONS, description=""):
    schema = tuple(ParamBounds(n, lo, hi) for n, lo, hi in params)
    return BenchmarkSpec(name, dwarf, schema, tuple(regions), growth, description)


_REGISTRY: dict[str, BenchmarkSpec] = {}


def _register(spec: BenchmarkSpec) -> None:
    if spec.name in _REGISTRY:
        raise ValueError(f"duplicate benchmark name {spec.name!r}")
    _REGISTRY[spec.name] = spec


for _s in (
    _spec("lud", "dense-linear-algebra", [("n", 1, 1 << 17)], "n",
          description="LU decomposition without pivoting"),
    _spec("csr_spmv", "sparse-linear-algebra",
          [("rows", 1, 1 << 30), ("nnz", 0, 1 << 36)], "rows",
          description="CSR sparse matrix-vector product"),
    _spec("fft", "spectral", [("n", 2, 1 << 32)], "n",
          description="iterative radix-2 FFT"),
    _spec("nw", "dynamic-programming", [("m", 1, 1 << 17)], "m",
          description="Needleman-Wunsch global alignment"),
    _spec("kmeans", "map-reduce", [("points", 8, 1 << 32)], "points",
          description="Lloyd's k-means, 16 dims, k=8"),
    _spec("crc32", "combinational-logic", [("n", 0, 1 << 38)], "n",
          regions=(Region.TRANSFER_IN, Region.COMPUTE, Region.TRANSFER_OUT),
          description="CRC-32 (IEEE 802.3)"),
    _spec("bfs", "graph-traversal",
          [("nodes", 1, 1 << 30), ("edges", 0, 1 << 36)], "nodes",
          description="level-synchronous breadth-first search"),
    _spec("srad", "structured-grid", [("r", 2, 1 << 17), ("c", 2, 1 << 17)], "r",
          description="speckle-reducing anisotropic diffusion"),
):
    _register(_s)
del _s


def registry_lookup(name: str) -> BenchmarkSpec:
    try:
        return _REGISTRY[name]
    except (KeyError, TypeError):
        raise UnknownBenchmark(f"unknown benchmark {name!r}") from None


def benchmark_names() -> list[str]:
    return sorted(_REGISTRY)


# -- observations -------------------------------------------------------------------

def _check_identifier(label: str, value: str) -> None:
    if not isinstance(value, str) or not value or any(c in value for c in ",\n\r"):
        raise ValueError(f"invalid {label} {value!r}")


@dataclass(frozen=True)
class Sample:
    """One timed observation of one region of one repetition."""

    benchmark: str
    size_class: SizeClass
    device: str
    region: Region
    repetition: int
    duration_ns: int
    energy_uj: float | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        _check_identifier("benchmark", self.benchmark)
        _check_identifier("device", self.device)
        if not isinstance(self.size_class, SizeClass):
            raise ValueError(f"size_class must be a SizeClass, got {self.size_class!r}")
        if not isinstance(self.region, Region):
            raise ValueError(f"region must be a Region, got {self.region!r}")
        if isinstance(self.repetition, bool) or not isinstance(self.repetition, int) or self.repetition < 0:
            raise ValueError(f"repetition must be an int >= 0, got {self.repetition!r}")
        if isinstance(self.duration_ns, bool) or not isinstance(self.duration_ns, int) or self.duration_ns < 0:
            raise ValueError(f"duration_ns must be an int >= 0, got {self.duration_ns!r}")
        if self.energy_uj is not None:
            e = self.energy_uj
            if isinstance(e, bool) or not isinstance(e, (int, float)) or not math.isfinite(e) or e < 0:
                raise ValueError(f"energy_uj must be finite and >= 0, got {e!r}")
        for f in self.flags:
            if not f or any(c in f for c in ",|\n\r"):
                raise ValueError(f"invalid flag {f!r}")


@dataclass(frozen=True)
class Summary:
    """Statistical digest of one set of durations.

    ``outliers`` holds values beyond 1.5 IQR of the quartiles (sorted, never
    removed from the statistics). ``warnings`` carries order-dependent
    diagnostics such as serial correlation, so it is excluded from equality.
    """

    n: int
    mean_ns: float
    median_ns: float
    min_ns: float
    max_ns: float
    stddev_ns: float
    ci_low_ns: float
    ci_high_ns: float
    ci_level: float
    degenerate: bool = False
    outliers: tuple[float, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def ci_halfwidth_ns(self) -> float:
        return (self.ci_high_ns - self.ci_low_ns) / 2
