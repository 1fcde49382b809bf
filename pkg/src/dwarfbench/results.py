"""Run logs: a versioned, diff-able text format with exact round-tripping.

Layout::

    # format=1
    # suite_version=0.1.0
    # device=default
    # seed=42
    # ...any further key=value metadata...
    benchmark,size_class,device,region,rep,duration_ns,energy_uj,flags
    lud,tiny,default,compute,0,51234,,verified

Energies are written with ``repr`` so floats survive the round trip bit for
bit. Multiple flags are joined with ``|``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Union

from .errors import (
    IoFailure,
    MalformedHeader,
    MalformedRecord,
    VersionMismatch,
)
from .model import Region, Sample, SizeClass

FORMAT_MAJOR = 1
FORMAT_VERSION = "1"
MANDATORY_KEYS = ("format", "suite_version", "device", "seed")
COLUMNS = ("benchmark", "size_class", "device", "region", "rep",
           "duration_ns", "energy_uj", "flags")
COLUMN_HEADER = ",".join(COLUMNS)

Destination = Union[str, Path, BinaryIO, None]


@dataclass
class RunLog:
    header: dict[str, str] = field(default_factory=dict)
    records: list[Sample] = field(default_factory=list)


def _check_header(header: dict[str, str]) -> None:
    for k, v in header.items():
        if not isinstance(k, str) or not k or "=" in k or any(c in k for c in "\r\n# "):
            raise MalformedHeader(f"header key {k!r} cannot be represented")
        if not isinstance(v, str) or any(c in v for c in "\r\n"):
            raise MalformedHeader(f"header value for {k!r} cannot be represented")
    missing = [k for k in MANDATORY_KEYS if k not in header]
    if missing:
        raise MalformedHeader(f"header missing mandatory keys: {', '.join(missing)}")


def _format_record(s: Sample) -> str:
    energy = "" if s.energy_uj is None else repr(float(s.energy_uj))
    return ",".join((s.benchmark, s.size_class.value, s.device, s.region.value,
                     str(s.repetition), str(s.duration_ns), energy, "|".join(s.flags)))


def render_log(log: RunLog) -> str:
    _check_header(log.header)
    lines = [f"# format={log.header['format']}"]
    lines += [f"# {k}={v}" for k, v in log.header.items() if k != "format"]
    lines.append(COLUMN_HEADER)
    lines += [_format_record(s) for s in log.records]
    return "\n".join(lines) + "\n"


def write_log(log: RunLog, destination: Destination = None) -> bytes:
    """Serialize ``log``; also write it to ``destination`` when one is given."""
    data = render_log(log).encode("utf-8")
    if destination is None:
        return data
    try:
        if isinstance(destination, (str, Path)):
            Path(destination).write_bytes(data)
        else:
            destination.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write run log: {exc}") from exc
    return data


def export_csv(log: RunLog) -> str:
    """The sample table without header comments."""
    return "\n".join([COLUMN_HEADER, *(_format_record(s) for s in log.records)]) + "\n"


def _parse_int(text: str, lineno: int, what: str) -> int:
    if not text.isascii() or not text.isdigit():
        raise MalformedRecord(lineno, f"{what} is not a non-negative integer: {text!r}")
    return int(text)


def _parse_record(line: str, lineno: int) -> Sample:
    fields = line.split(",")
    if len(fields) != len(COLUMNS):
        raise MalformedRecord(lineno, f"expected {len(COLUMNS)} fields, got {len(fields)}")
    bench, cls, device, region, rep, dur, energy, flags = fields
    try:
        size_class = SizeClass(cls)
    except ValueError:
        raise MalformedRecord(lineno, f"unknown size class {cls!r}") from None
    try:
        reg = Region(region)
    except ValueError:
        raise MalformedRecord(lineno, f"unknown region {region!r}") from None
    energy_uj = None
    if energy:
        try:
            energy_uj = float(energy)
        except ValueError:
            raise MalformedRecord(lineno, f"bad energy value {energy!r}") from None
        if not math.isfinite(energy_uj) or energy_uj < 0:
            raise MalformedRecord(lineno, f"energy must be finite and >= 0, got {energy!r}")
    try:
        return Sample(
            benchmark=bench,
            size_class=size_class,
            device=device,
            region=reg,
            repetition=_parse_int(rep, lineno, "rep"),
            duration_ns=_parse_int(dur, lineno, "duration_ns"),
            energy_uj=energy_uj,
            flags=tuple(flags.split("|")) if flags else (),
        )
    except ValueError as exc:
        if isinstance(exc, MalformedRecord):
            raise
        raise MalformedRecord(lineno, str(exc)) from None


def parse_log(data: bytes | str | BinaryIO) -> RunLog:
    """Inverse of :func:`write_log`.

    Never raises anything but :class:`~dwarfbench.errors.LogFormatError`
    subclasses (or :class:`IoFailure` when reading a stream fails).
    """
    if hasattr(data, "read"):
        try:
            data = data.read()
        except OSError as exc:
            raise IoFailure(f"cannot read run log: {exc}") from exc
    if isinstance(data, (bytes, bytearray, memoryview)):
        try:
            text = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedHeader(f"run log is not valid UTF-8: {exc}") from None
    elif isinstance(data, str):
        text = data
    else:
        raise MalformedHeader(f"cannot parse a run log from {type(data).__name__}")

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header: dict[str, str] = {}
    idx = 0
    while idx < len(lines) and lines[idx].startswith("#"):
        body = lines[idx][1:]
        if not body.startswith(" "):
            raise MalformedHeader(f"line {idx + 1}: header lines must start with '# '")
        key, sep, value = body[1:].partition("=")
        if not sep or not key:
            raise MalformedHeader(f"line {idx + 1}: expected '# key=value'")
        if key in header:
            raise MalformedHeader(f"line {idx + 1}: duplicate header key {key!r}")
        if "\r" in value:
            raise MalformedHeader(f"line {idx + 1}: carriage return in header value")
        header[key] = value
        idx += 1

    fmt = header.get("format")
    if fmt is None:
        raise VersionMismatch("header has no format=1 line")
    major = fmt.split(".", 1)[0]
    if major != str(FORMAT_MAJOR):
        raise VersionMismatch(f"unsupported log format {fmt!r}; this reader handles {FORMAT_MAJOR}.x")
    missing = [k for k in MANDATORY_KEYS if k not in header]
    if missing:
        raise MalformedHeader(f"header missing mandatory keys: {', '.join(missing)}")
    if idx >= len(lines) or lines[idx] != COLUMN_HEADER:
        raise MalformedHeader(f"line {idx + 1}: expected column header {COLUMN_HEADER!r}")

    records = [_parse_record(line, n) for n, line in enumerate(lines[idx + 1:], idx + 2)]
    return RunLog(header=header, records=records)


def read_log(path: str | Path) -> RunLog:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read run log {path}: {exc}") from exc
    return parse_log(io.BytesIO(data))
