"""dwarfbench: a portable benchmark harness for computational dwarf kernels.

Eight kernels (one per dwarf class) run with per-region timing, repetition
policies backed by Student t confidence intervals, size classes derived
from a device's memory hierarchy, and optional energy attribution.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DEFAULT_PROFILE,
    BenchmarkSpec,
    DeviceProfile,
    Region,
    Sample,
    SizeClass,
    Summary,
    registry_lookup,
    validate_device_profile,
)
from .results import RunLog, parse_log, write_log  # noqa: E402
from .sizing import build_size_plan, solve_params, working_set_bytes  # noqa: E402
from .stats import RepetitionPolicy, summarize  # noqa: E402

__all__ = [
    "DEFAULT_PROFILE",
    "BenchmarkSpec",
    "DeviceProfile",
    "Region",
    "RepetitionPolicy",
    "RunLog",
    "Sample",
    "SizeClass",
    "Summary",
    "build_size_plan",
    "parse_log",
    "registry_lookup",
    "solve_params",
    "summarize",
    "validate_device_profile",
    "working_set_bytes",
    "write_log",
]
