"""Calibrated monotonic timing and per-region instrumentation."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable

import numpy as np

from .errors import InsufficientTrials, NotAvailable
from .model import Region, Sample, SizeClass

log = logging.getLogger(__name__)

MIN_CALIBRATION_TRIALS = 1000
DEFAULT_CALIBRATION_TRIALS = 20_000

# Soft target for the median cost of an empty region on commodity hardware.
EMPTY_REGION_WARN_NS = 1_000

#: Highest-resolution monotonic clock the platform offers, in integer ns.
read_monotonic: Callable[[], int] = time.perf_counter_ns


@dataclass(frozen=True)
class TimerCalibration:
    overhead_median_ns: int
    overhead_p99_ns: int
    resolution_ns: int
    trials: int

    def __post_init__(self):
        if self.resolution_ns <= 0:
            raise ValueError("resolution_ns must be positive")
        if not 0 <= self.overhead_median_ns <= self.overhead_p99_ns:
            raise ValueError("need 0 <= overhead_median_ns <= overhead_p99_ns")


def calibrate(trials: int = DEFAULT_CALIBRATION_TRIALS) -> TimerCalibration:
    """Measure back-to-back clock read cost and the smallest visible tick."""
    if trials < MIN_CALIBRATION_TRIALS:
        raise InsufficientTrials(
            f"calibration needs at least {MIN_CALIBRATION_TRIALS} trials, got {trials}"
        )
    clock = read_monotonic
    deltas = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        t0 = clock()
        t1 = clock()
        deltas[i] = t1 - t0
    positive = deltas[deltas > 0]
    if positive.size:
        resolution = int(positive.min())
    else:
        # Clock never advanced between two reads; spin until it does.
        t0 = clock()
        t1 = clock()
        while t1 == t0:
            t1 = clock()
        resolution = t1 - t0
    median = int(np.median(deltas))
    p99 = int(np.percentile(deltas, 99))
    return TimerCalibration(median, max(p99, median), resolution, trials)


_calibration: TimerCalibration | None = None
_calibration_lock = threading.Lock()


def get_calibration() -> TimerCalibration:
    """Process-wide calibration, computed on first use."""
    global _calibration
    if _calibration is None:
        with _calibration_lock:
            if _calibration is None:
                _calibration = calibrate()
                log.debug("timer calibration: %s", _calibration)
    return _calibration


def set_calibration(cal: TimerCalibration | None) -> None:
    global _calibration
    with _calibration_lock:
        _calibration = cal


def measure(work: Callable[..., Any], *args, calibration: TimerCalibration | None = None,
            **kwargs) -> tuple[Any, int]:
    """Run ``work`` once; return its result and the corrected duration in ns."""
    cal = calibration or get_calibration()
    t0 = read_monotonic()
    result = work(*args, **kwargs)
    t1 = read_monotonic()
    return result, max(0, t1 - t0 - cal.overhead_median_ns)


class SampleSink:
    """Thread-safe append-only collection of samples."""

    def __init__(self):
        self._lock = threading.Lock()
        self._samples: list[Sample] = []

    def append(self, sample: Sample) -> None:
        with self._lock:
            self._samples.append(sample)

    def extend(self, samples: Iterable[Sample]) -> None:
        samples = list(samples)
        with self._lock:
            self._samples.extend(samples)

    def snapshot(self) -> list[Sample]:
        with self._lock:
            return list(self._samples)

    def __len__(self) -> int:
        with self._lock:
            return len(self._samples)


class RegionRecorder:
    """Times regions of one repetition and turns them into :class:`Sample` objects.

    The recorder supplies the identity fields (benchmark, size class,
    device, repetition). If an energy provider is attached, its counter is
    read outside the clock reads so energy attribution never inflates the
    measured duration. A provider that is not available yields samples
    without energy.
    """

    def __init__(self, benchmark: str, size_class: SizeClass, device: str,
                 repetition: int = 0, *, energy=None, sink: SampleSink | None = None,
                 calibration: TimerCalibration | None = None):
        self.benchmark = benchmark
        self.size_class = size_class
        self.device = device
        self.repetition = repetition
        self.energy = energy
        self.sink = sink
        self.calibration = calibration or get_calibration()
        self.samples: list[Sample] = []
        self.starts: list[int] = []

    def _read_energy(self):
        if self.energy is None:
            return None
        try:
            return self.energy.read()
        except NotAvailable:
            return None

    def time_region(self, region: Region, work: Callable[..., Any], *args, **kwargs) -> Any:
        from .energy import energy_delta

        e0 = self._read_energy()
        t0 = read_monotonic()
        result = work(*args, **kwargs)
        t1 = read_monotonic()
        e1 = self._read_energy() if e0 is not None else None

        energy_uj = energy_delta(e0, e1) if e1 is not None else None
        sample = Sample(
            benchmark=self.benchmark,
            size_class=self.size_class,
            device=self.device,
            region=region,
            repetition=self.repetition,
            duration_ns=max(0, t1 - t0 - self.calibration.overhead_median_ns),
            energy_uj=energy_uj,
        )
        self.starts.append(t0)
        self.samples.append(sample)
        if self.sink is not None:
            self.sink.append(sample)
        return result


class NullRecorder:
    """Drop-in recorder that runs work without timing it."""

    samples: list[Sample] = []

    def time_region(self, region: Region, work: Callable[..., Any], *args, **kwargs) -> Any:
        return work(*args, **kwargs)


NULL_RECORDER = NullRecorder()


def empty_region_median_ns(count: int = 10_000,
                           calibration: TimerCalibration | None = None) -> float:
    """Median corrected duration of an empty region; warns above 1 us."""
    cal = calibration or get_calibration()
    durations = np.empty(count, dtype=np.int64)
    noop = _noop
    for i in range(count):
        durations[i] = measure(noop, calibration=cal)[1]
    med = float(np.median(durations))
    if med > EMPTY_REGION_WARN_NS:
        log.warning("empty-region median %.0f ns exceeds %d ns", med, EMPTY_REGION_WARN_NS)
    return med


def _noop():
    return None
