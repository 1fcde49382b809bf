"""End-to-end orchestration: plan, generate, repeat, measure, verify, log.

Also builds summary and scaling reports from one or more run logs.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .dwarfs import get_kernel, output_digest
from .energy import select_provider
from .errors import ConfigError, EmptyLogs, MixedFormatVersions
from .model import (
    ALL_REGIONS,
    DEFAULT_PROFILE,
    SIZE_CLASSES,
    DeviceProfile,
    Region,
    SizeClass,
    benchmark_names,
    load_device_profile,
    registry_lookup,
)
from .results import FORMAT_VERSION, RunLog, write_log
from .sizing import build_size_plan, format_size_plan
from .stats import RepetitionPolicy, required_repetitions, summarize
from .timing import RegionRecorder, get_calibration

log = logging.getLogger(__name__)

DEFAULT_CLASSES = (SizeClass.TINY, SizeClass.SMALL, SizeClass.MEDIUM)
FLAG_VERIFIED = "verified"
FLAG_VERIFY_FAIL = "verify_fail"


@dataclass
class RunConfig:
    benchmarks: Sequence[str] | str = "all"
    size_classes: Sequence[SizeClass | str] | None = None
    device_profile: DeviceProfile | str | Path | None = None
    seed: int = 0
    policy: RepetitionPolicy = field(default_factory=RepetitionPolicy)
    energy: str = "off"
    output: str | Path | None = None
    include_large: bool = False

    def resolve_benchmarks(self) -> list[str]:
        if self.benchmarks == "all" or list(self.benchmarks) == ["all"]:
            return benchmark_names()
        names = [str(b) for b in self.benchmarks]
        for name in names:
            registry_lookup(name)
        if not names:
            raise ConfigError("no benchmarks selected")
        return list(dict.fromkeys(names))

    def resolve_classes(self) -> list[SizeClass]:
        if self.size_classes is None:
            classes = list(DEFAULT_CLASSES)
        else:
            classes = [c if isinstance(c, SizeClass) else SizeClass.parse(c)
                       for c in self.size_classes]
        if self.include_large and SizeClass.LARGE not in classes:
            classes.append(SizeClass.LARGE)
        if not classes:
            raise ConfigError("no size classes selected")
        return sorted(set(classes))

    def resolve_profile(self) -> DeviceProfile:
        if self.device_profile is None:
            return DEFAULT_PROFILE
        if isinstance(self.device_profile, DeviceProfile):
            return self.device_profile
        return load_device_profile(self.device_profile)

    def validate(self) -> tuple[list[str], list[SizeClass], DeviceProfile]:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        return self.resolve_benchmarks(), self.resolve_classes(), self.resolve_profile()


def _pair_key(bench: str, cls: SizeClass) -> str:
    return f"{bench}.{cls.value}"


def _run_pair(bench, cls, params, cfg, profile, provider, header, on_progress):
    kernel = get_kernel(bench)
    spec = registry_lookup(bench)
    policy = cfg.policy
    inp = kernel.generate(params, cfg.seed)

    def one(rep):
        rec = RegionRecorder(bench, cls, profile.id, rep, energy=provider)
        out = kernel.run(inp, rec)
        if [s.region for s in rec.samples] != list(spec.regions):
            raise RuntimeError(f"{bench} emitted regions out of declared order")
        return out, rec.samples

    one(0)  # warm-up, never logged
    samples = []
    out = None
    for rep in range(policy.min_reps):
        out, s = one(rep)
        samples.extend(s)
    count = policy.min_reps
    if policy.adaptive:
        pilot = [s.duration_ns for s in samples if s.region is Region.COMPUTE]
        est = required_repetitions(pilot, policy)
        count = est.count
        header[f"ci_target.{_pair_key(bench, cls)}"] = "met" if est.attainable else "unattainable"
        for rep in range(policy.min_reps, count):
            out, s = one(rep)
            samples.extend(s)
    header[f"reps.{_pair_key(bench, cls)}"] = str(count)

    result = kernel.verify(inp, out)
    header[f"verify.{_pair_key(bench, cls)}"] = "pass" if result.passed else f"fail: {result.detail}"
    header[f"digest.{_pair_key(bench, cls)}"] = output_digest(out)
    flag = FLAG_VERIFIED if result.passed else FLAG_VERIFY_FAIL
    if on_progress:
        on_progress(f"{bench}/{cls}: {count} reps, verify {'ok' if result.passed else 'FAILED'}")
    return [dataclasses.replace(s, flags=(flag,)) for s in samples], result.passed


def run(config: RunConfig, on_progress: Callable[[str], None] | None = None) -> RunLog:
    """Execute every selected (benchmark, size class) pair and return the log.

    Configuration problems raise before anything executes. A pair whose
    size class is infeasible on the device is skipped and noted in the
    header; a pair that fails verification or raises is flagged and the
    suite continues.
    """
    benches, classes, profile = config.validate()
    provider = select_provider(config.energy)
    get_calibration()
    header = {
        "format": FORMAT_VERSION,
        "suite_version": __version__,
        "device": profile.id,
        "seed": str(config.seed),
        "profile_hash": profile.digest(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "policy": config.policy.describe(),
        "energy": config.energy or "off",
        "benchmarks": ",".join(benches),
        "classes": ",".join(c.value for c in classes),
    }
    records = []
    for bench in benches:
        plan = build_size_plan(bench, profile, strict=False)
        for cls in classes:
            key = _pair_key(bench, cls)
            if cls not in plan.entries:
                header[f"skipped.{key}"] = "infeasible: " + plan.infeasible[cls]
                if on_progress:
                    on_progress(f"{bench}/{cls}: skipped (infeasible)")
                continue
            entry = plan.entries[cls]
            header[f"params.{key}"] = ";".join(f"{k}={v}" for k, v in entry.params.items())
            try:
                samples, _ = _run_pair(bench, cls, entry.params, config, profile,
                                       provider, header, on_progress)
            except MemoryError as exc:
                header[f"verify.{key}"] = f"error: out of memory ({exc})"
                continue
            except Exception as exc:  # kernel failure: flag and keep going
                log.exception("%s/%s failed", bench, cls)
                header[f"verify.{key}"] = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
                continue
            records.extend(samples)
    result = RunLog(header=header, records=records)
    if config.output is not None:
        write_log(result, config.output)
    return result


def verify_failures(run_log: RunLog) -> list[str]:
    """Pairs whose verification failed or raised, as ``bench.class`` keys."""
    return sorted(k[len("verify."):] for k, v in run_log.header.items()
                  if k.startswith("verify.") and v != "pass")


# -- reports -------------------------------------------------------------------------

@dataclass
class Report:
    kind: str
    csv: str
    charts: dict[str, str] = field(default_factory=dict)

    def write(self, directory: str | Path) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = [d / f"{self.kind}.csv"]
        paths[0].write_text(self.csv, encoding="utf-8")
        for name, svg in self.charts.items():
            p = d / f"scaling_{name}.svg"
            p.write_text(svg, encoding="utf-8")
            paths.append(p)
        return paths


def _fmt(v: float | None) -> str:
    return "" if v is None else format(v, ".10g")


def _check_logs(logs: Sequence[RunLog]) -> None:
    if not logs:
        raise EmptyLogs("report needs at least one run log")
    versions = {lg.header.get("format") for lg in logs}
    if len(versions) > 1:
        raise MixedFormatVersions(f"logs use different formats: {sorted(map(str, versions))}")


def _grouped(logs: Iterable[RunLog]):
    groups: dict[tuple, list] = defaultdict(list)
    for lg in logs:
        for s in lg.records:
            groups[(s.benchmark, s.size_class, s.region, s.device)].append(s)
    region_rank = {r: i for i, r in enumerate(ALL_REGIONS)}
    return sorted(groups.items(),
                  key=lambda kv: (kv[0][0], kv[0][1].rank, region_rank[kv[0][2]], kv[0][3]))


def summary_report(logs: Sequence[RunLog], ci_level: float = 0.95) -> Report:
    _check_logs(logs)
    cols = ["device", "benchmark", "size_class", "region", "n", "mean_ns", "median_ns",
            "min_ns", "max_ns", "stddev_ns", "ci_low_ns", "ci_high_ns", "ci_level",
            "outliers", "energy_median_uj", "verify", "warnings"]
    lines = [",".join(cols)]
    for (bench, cls, region, device), samples in _grouped(logs):
        s = summarize([x.duration_ns for x in samples], ci_level)
        energies = [x.energy_uj for x in samples if x.energy_uj is not None]
        energy = float(np.median(energies)) if energies else None
        failed = any(FLAG_VERIFY_FAIL in x.flags for x in samples)
        lines.append(",".join([
            device, bench, cls.value, region.value, str(s.n), _fmt(s.mean_ns), _fmt(s.median_ns),
            _fmt(s.min_ns), _fmt(s.max_ns), _fmt(s.stddev_ns), _fmt(s.ci_low_ns),
            _fmt(s.ci_high_ns), _fmt(s.ci_level), str(len(s.outliers)), _fmt(energy),
            "fail" if failed else "pass", " / ".join(s.warnings).replace(",", ";"),
        ]))
    return Report("summary", "\n".join(lines) + "\n")


def scaling_table(logs: Sequence[RunLog]) -> dict[str, dict[str, dict[SizeClass, float]]]:
    """benchmark -> device -> size class -> median compute duration (ns)."""
    table: dict = defaultdict(lambda: defaultdict(dict))
    for (bench, cls, region, device), samples in _grouped(logs):
        if region is Region.COMPUTE:
            table[bench][device][cls] = float(np.median([x.duration_ns for x in samples]))
    return table


def scaling_report(logs: Sequence[RunLog]) -> Report:
    _check_logs(logs)
    table = scaling_table(logs)
    lines = ["device,benchmark,size_class,median_compute_ns,ratio_to_smallest"]
    charts = {}
    for bench in sorted(table):
        for device in sorted(table[bench]):
            series = table[bench][device]
            base = series[min(series)] if series else None
            for cls in sorted(series):
                ratio = series[cls] / base if base else None
                lines.append(f"{device},{bench},{cls.value},{_fmt(series[cls])},{_fmt(ratio)}")
        charts[bench] = scaling_chart(bench, table[bench])
    return Report("scaling", "\n".join(lines) + "\n", charts)


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def scaling_chart(bench: str, series: dict[str, dict[SizeClass, float]],
                  width: int = 480, height: int = 320) -> str:
    """Minimal SVG line chart: size class on x, median compute ns on a linear
    y axis starting at zero. Each point carries its value in ``data-value``."""
    left, right, top, bottom = 70, 20, 30, 40
    pw, ph = width - left - right, height - top - bottom
    base_y = top + ph
    ymax = max((v for s in series.values() for v in s.values()), default=1.0) or 1.0
    xstep = pw / (len(SIZE_CLASSES) - 1)

    def xy(cls: SizeClass, v: float) -> tuple[float, float]:
        return left + cls.rank * xstep, base_y - v / ymax * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" data-baseline="{base_y}" data-ymax="{ymax!r}">',
        f'<text x="{left}" y="18" font-family="sans-serif" font-size="13">'
        f'{escape(bench)}: median compute time by size class</text>',
        f'<line x1="{left}" y1="{base_y}" x2="{left + pw}" y2="{base_y}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{base_y}" stroke="black"/>',
        f'<text x="4" y="{top + 4}" font-family="sans-serif" font-size="10">{ymax / 1e6:.4g} ms</text>',
        f'<text x="4" y="{base_y}" font-family="sans-serif" font-size="10">0</text>',
    ]
    for cls in SIZE_CLASSES:
        x = left + cls.rank * xstep
        parts.append(f'<text x="{x:.2f}" y="{base_y + 16}" font-family="sans-serif" '
                     f'font-size="10" text-anchor="middle">{cls.value}</text>')
    for i, device in enumerate(sorted(series)):
        colour = _PALETTE[i % len(_PALETTE)]
        pts = [(cls, v) for cls, v in sorted(series[device].items())]
        coords = " ".join(f"{x:.4f},{y:.4f}" for x, y in (xy(c, v) for c, v in pts))
        parts.append(f'<polyline fill="none" stroke="{colour}" points="{coords}" '
                     f'data-device="{escape(device)}"/>')
        for cls, v in pts:
            x, y = xy(cls, v)
            parts.append(f'<circle cx="{x:.4f}" cy="{y:.6f}" r="3" fill="{colour}" '
                         f'data-device="{escape(device)}" data-class="{cls.value}" '
                         f'data-value="{v!r}"/>')
        parts.append(f'<text x="{left + pw - 90}" y="{top + 14 * (i + 1)}" fill="{colour}" '
                     f'font-family="sans-serif" font-size="10">{escape(device)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def report(logs: Sequence[RunLog], kind: str = "summary") -> Report:
    if kind == "summary":
        return summary_report(logs)
    if kind == "scaling":
        return scaling_report(logs)
    raise ConfigError(f"unknown report kind {kind!r} (expected summary or scaling)")


# -- listings --------------------------------------------------------------------------

def listing(what: str, profile: DeviceProfile | None = None) -> str:
    if what == "benchmarks":
        rows = [f"{n:<10} {registry_lookup(n).dwarf_class}" for n in benchmark_names()]
    elif what == "classes":
        rows = [c.value for c in SIZE_CLASSES]
    elif what in ("sizes", "sizes-for-profile"):
        profile = profile or DEFAULT_PROFILE
        return "\n".join(format_size_plan(build_size_plan(n, profile, strict=False))
                         for n in benchmark_names())
    else:
        raise ConfigError(f"cannot list {what!r} (expected benchmarks, classes, sizes)")
    return "\n".join(rows) + "\n"
