"""Energy providers and per-region energy attribution.

A provider exposes a cumulative energy counter. Regions are charged the
difference between a reading taken just before the region's clock starts and
one taken just after it stops.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence

from .errors import ConfigError, CounterWrap, NegativePower, NotAvailable
from .timing import read_monotonic

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyReading:
    timestamp_ns: int
    cumulative_uj: float


class EnergyProvider(Protocol):
    name: str
    resolution_uj: float

    def read(self) -> EnergyReading:
        """Current cumulative reading; raises NotAvailable if none can be taken."""
        ...


def energy_delta(start: EnergyReading, end: EnergyReading) -> float:
    if end.cumulative_uj < start.cumulative_uj:
        raise CounterWrap(
            f"energy counter went backwards: {start.cumulative_uj} -> {end.cumulative_uj}"
        )
    return end.cumulative_uj - start.cumulative_uj


def region_energy(provider: EnergyProvider | None, work: Callable[..., Any], *args,
                  **kwargs) -> tuple[Any, float | None]:
    """Run ``work`` and return ``(result, microjoules)``.

    The energy is ``None`` when there is no provider or it is unavailable;
    the work still runs.
    """
    if provider is None:
        return work(*args, **kwargs), None
    try:
        start = provider.read()
    except NotAvailable:
        return work(*args, **kwargs), None
    result = work(*args, **kwargs)
    try:
        end = provider.read()
    except NotAvailable:
        return result, None
    return result, energy_delta(start, end)


class VirtualClock:
    """Manually advanced nanosecond clock for deterministic tests."""

    def __init__(self, start_ns: int = 0):
        self.now_ns = start_ns

    def __call__(self) -> int:
        return self.now_ns

    def advance(self, ns: int) -> None:
        if ns < 0:
            raise ValueError("a clock cannot run backwards")
        self.now_ns += ns

    def sleep(self, seconds: float) -> None:
        self.advance(round(seconds * 1e9))


class PowerProfile:
    """Piecewise-linear power curve given as ``(t_seconds, watts)`` knots.

    Power is held at the first knot's value before it and at the last knot's
    value after it.
    """

    def __init__(self, knots: Sequence[tuple[float, float]]):
        if not knots:
            raise ValueError("a power profile needs at least one knot")
        pts = [(float(t), float(w)) for t, w in knots]
        for (t0, _), (t1, _) in zip(pts, pts[1:]):
            if t1 <= t0:
                raise ValueError("profile knot times must be strictly increasing")
        for t, w in pts:
            if w < 0:
                raise NegativePower(f"negative power {w} W at t={t} s")
        # knot times in integer ns so segment boundaries are exact
        self.times_ns = [round(t * 1e9) for t, _ in pts]
        self.watts = [w for _, w in pts]
        # cumulative energy (uJ) at each knot relative to the first knot
        cum = [0.0]
        for i in range(1, len(pts)):
            dt = self.times_ns[i] - self.times_ns[i - 1]
            cum.append(cum[-1] + (self.watts[i - 1] + self.watts[i]) * dt / 2000.0)
        self._cum = cum

    @classmethod
    def constant(cls, watts: float) -> PowerProfile:
        return cls([(0.0, watts)])

    def power(self, t_ns: int) -> float:
        ts, ws = self.times_ns, self.watts
        if t_ns <= ts[0]:
            return ws[0]
        if t_ns >= ts[-1]:
            return ws[-1]
        i = bisect.bisect_right(ts, t_ns) - 1
        frac = (t_ns - ts[i]) / (ts[i + 1] - ts[i])
        return ws[i] + frac * (ws[i + 1] - ws[i])

    def energy_uj(self, t_ns: int) -> float:
        """Integral of power from the first knot to ``t_ns``, in microjoules.

        Times before the first knot integrate backwards, so the value is
        negative there; callers use differences only.
        """
        ts = self.times_ns
        if t_ns <= ts[0]:
            return self.watts[0] * (t_ns - ts[0]) / 1000.0
        if t_ns >= ts[-1]:
            return self._cum[-1] + self.watts[-1] * (t_ns - ts[-1]) / 1000.0
        i = bisect.bisect_right(ts, t_ns) - 1
        if t_ns == ts[i]:
            return self._cum[i]
        dt = t_ns - ts[i]
        return self._cum[i] + (self.watts[i] + self.power(t_ns)) * dt / 2000.0


def load_power_profile(path: str | Path) -> PowerProfile:
    """Read ``t_seconds power_watts`` pairs, one per line; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read power profile {path}: {exc}") from exc
    knots = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 't_seconds power_watts'")
        try:
            knots.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric value in {raw!r}") from None
    try:
        return PowerProfile(knots)
    except NegativePower:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


class MockProvider:
    """Deterministic provider whose counter is the exact integral of a profile.

    The profile's time origin is the clock value at construction.
    """

    resolution_uj = 0.0

    def __init__(self, profile: PowerProfile, clock: Callable[[], int] = read_monotonic,
                 name: str = "mock"):
        self.profile = profile
        self.clock = clock
        self.name = name
        self._origin = clock()
        self._base = profile.energy_uj(profile.times_ns[0])

    def read(self) -> EnergyReading:
        now = self.clock()
        t = now - self._origin + self.profile.times_ns[0]
        return EnergyReading(now, self.profile.energy_uj(t) - self._base)


def make_mock_provider(power_profile: PowerProfile | Sequence[tuple[float, float]] | float,
                       clock: Callable[[], int] = read_monotonic) -> MockProvider:
    """Mock provider from a profile, a knot list or a constant wattage."""
    if isinstance(power_profile, PowerProfile):
        profile = power_profile
    elif isinstance(power_profile, (int, float)):
        if power_profile < 0:
            raise NegativePower(f"negative power {power_profile} W")
        profile = PowerProfile.constant(power_profile)
    else:
        profile = PowerProfile(power_profile)
    return MockProvider(profile, clock)


class RaplProvider:
    """Linux powercap (RAPL) package counter. Optional; off unless selected.

    The hardware counter wraps at ``max_energy_range_uj``; wraps are
    unwrapped here so readings stay monotone.
    """

    name = "rapl"
    resolution_uj = 1.0

    def __init__(self, zone: str | Path = "/sys/class/powercap/intel-rapl:0"):
        self.zone = Path(zone)
        self._energy = self.zone / "energy_uj"
        try:
            self._range = int((self.zone / "max_energy_range_uj").read_text())
        except (OSError, ValueError):
            self._range = None
        self._last_raw: int | None = None
        self._offset = 0

    def read(self) -> EnergyReading:
        try:
            raw = int(self._energy.read_text())
        except (OSError, ValueError) as exc:
            raise NotAvailable(f"cannot read {self._energy}: {exc}") from exc
        now = read_monotonic()
        if self._last_raw is not None and raw < self._last_raw:
            if self._range is None:
                raise NotAvailable("RAPL counter wrapped and its range is unknown")
            self._offset += self._range + 1
        self._last_raw = raw
        return EnergyReading(now, float(raw + self._offset))


def select_provider(spec: str | None) -> EnergyProvider | None:
    """Resolve an ``--energy`` selection: off, mock, mock:<watts>, mock:<file>, rapl."""
    if spec is None or spec == "off":
        return None
    kind, _, arg = spec.partition(":")
    if kind == "mock":
        if not arg:
            return make_mock_provider(10.0)
        try:
            return make_mock_provider(float(arg))
        except ValueError:
            return make_mock_provider(load_power_profile(arg))
    if kind == "rapl":
        provider = RaplProvider(arg) if arg else RaplProvider()
        try:
            provider.read()
        except NotAvailable as exc:
            log.warning("RAPL unavailable, samples will carry no energy: %s", exc)
        return provider
    raise ConfigError(f"unknown energy provider {spec!r} (expected off, mock[:...], rapl)")
