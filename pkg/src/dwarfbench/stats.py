"""Statistical reduction of timing samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .errors import EmptyInput, PilotTooSmall, TooFewSamples
from .model import Summary

AUTOCORR_WARN = 0.5
MIN_ADAPTIVE_REPS = 10


def t_quantile(p: float, df: int | float) -> float:
    """Inverse CDF of Student's t with ``df`` degrees of freedom."""
    if not 0 < p < 1:
        raise ValueError(f"probability must be in (0, 1), got {p}")
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    return float(special.stdtrit(df, p))


def ci_halfwidth(stddev: float, n: int, ci_level: float) -> float:
    """Half-width of the two-sided Student t interval for a mean."""
    if n < 2:
        return 0.0
    return t_quantile(0.5 + ci_level / 2, n - 1) * stddev / math.sqrt(n)


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    # fsum is exactly rounded, so both results are independent of input order.
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def find_outliers(values: Sequence[float]) -> tuple[float, ...]:
    """Values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR], sorted ascending."""
    if len(values) < 4:
        return ()
    arr = np.sort(np.asarray(values, dtype=np.float64))
    q1, q3 = np.percentile(arr, [25, 75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return tuple(float(v) for v in arr if v < lo or v > hi)


def summarize(samples: Sequence[float], ci_level: float = 0.95) -> Summary:
    """Summarize a nonempty list of durations.

    The confidence interval is mean +/- t * s / sqrt(n) with the t quantile
    taken on n - 1 degrees of freedom. A single sample gives a degenerate
    summary whose interval collapses onto the value. Serial correlation
    above 0.5 in absolute value is attached as a warning.
    """
    if not 0 < ci_level < 1:
        raise ValueError(f"ci_level must be in (0, 1), got {ci_level}")
    values = [float(v) for v in samples]
    if not values:
        raise EmptyInput("cannot summarize an empty sample list")
    n = len(values)
    mean, std = _mean_std(values)
    ordered = sorted(values)
    median = float(np.median(ordered))
    if n == 1:
        return Summary(n=1, mean_ns=mean, median_ns=median, min_ns=mean, max_ns=mean,
                       stddev_ns=0.0, ci_low_ns=mean, ci_high_ns=mean,
                       ci_level=ci_level, degenerate=True)
    half = ci_halfwidth(std, n, ci_level)
    warnings: tuple[str, ...] = ()
    if n >= 3:
        r = lag1_autocorrelation(values)
        if abs(r) > AUTOCORR_WARN:
            warnings = (f"lag-1 autocorrelation {r:+.3f} exceeds {AUTOCORR_WARN}",)
    return Summary(
        n=n,
        mean_ns=mean,
        median_ns=median,
        min_ns=ordered[0],
        max_ns=ordered[-1],
        stddev_ns=std,
        ci_low_ns=mean - half,
        ci_high_ns=mean + half,
        ci_level=ci_level,
        outliers=find_outliers(ordered),
        warnings=warnings,
    )


def lag1_autocorrelation(samples: Sequence[float]) -> float:
    """Pearson correlation between the series and itself shifted by one.

    Returns 0 when either shifted half has zero variance.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 3:
        raise TooFewSamples(f"need at least 3 samples, got {x.size}")
    a = x[:-1] - x[:-1].mean()
    b = x[1:] - x[1:].mean()
    # sqrt each factor separately: the product underflows for tiny spreads
    denom = math.sqrt(float(np.dot(a, a))) * math.sqrt(float(np.dot(b, b)))
    if denom == 0.0:
        return 0.0
    r = float(np.dot(a, b)) / denom
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class RepetitionPolicy:
    """How many measured repetitions to run.

    ``min_reps == max_reps`` pins an exact count. Otherwise the count is
    chosen adaptively from a pilot of ``min_reps`` repetitions, and the pilot
    must have at least ten repetitions.
    """

    min_reps: int = 10
    max_reps: int = 100
    target_rel_halfwidth: float = 0.05
    ci_level: float = 0.95

    def __post_init__(self):
        if self.min_reps < 1:
            raise ValueError(f"min_reps must be >= 1, got {self.min_reps}")
        if self.min_reps > self.max_reps:
            raise ValueError(f"min_reps ({self.min_reps}) > max_reps ({self.max_reps})")
        if self.adaptive and self.min_reps < MIN_ADAPTIVE_REPS:
            raise ValueError(
                f"adaptive policies need min_reps >= {MIN_ADAPTIVE_REPS}, got {self.min_reps}"
            )
        if not 0 < self.target_rel_halfwidth < 1:
            raise ValueError("target_rel_halfwidth must be in (0, 1)")
        if not 0 < self.ci_level < 1:
            raise ValueError("ci_level must be in (0, 1)")

    @property
    def adaptive(self) -> bool:
        return self.min_reps < self.max_reps

    @classmethod
    def fixed(cls, reps: int, ci_level: float = 0.95) -> RepetitionPolicy:
        return cls(min_reps=reps, max_reps=reps, ci_level=ci_level)

    def describe(self) -> str:
        return (f"min={self.min_reps};max={self.max_reps};"
                f"target={self.target_rel_halfwidth!r};ci={self.ci_level!r}")


class RepetitionEstimate(NamedTuple):
    count: int
    attainable: bool


def required_repetitions(pilot: Sequence[float], policy: RepetitionPolicy) -> RepetitionEstimate:
    """Smallest repetition count whose predicted CI meets the policy target.

    Uses the pilot's mean and sample standard deviation. When even
    ``max_reps`` repetitions would not reach the target, returns
    ``max_reps`` with ``attainable=False``.
    """
    if len(pilot) < policy.min_reps:
        raise PilotTooSmall(f"pilot has {len(pilot)} samples, policy needs {policy.min_reps}")
    if len(pilot) < 2:
        return RepetitionEstimate(policy.min_reps, True)
    mean, std = _mean_std([float(v) for v in pilot])
    if std == 0.0:
        return RepetitionEstimate(policy.min_reps, True)
    target = policy.target_rel_halfwidth * abs(mean)

    def ok(n: int) -> bool:
        return n >= 2 and ci_halfwidth(std, n, policy.ci_level) <= target

    if not ok(policy.max_reps):
        return RepetitionEstimate(policy.max_reps, False)
    # halfwidth is strictly decreasing in n, so bisect for the first passing count
    lo, hi = policy.min_reps, policy.max_reps
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return RepetitionEstimate(lo, True)
