"""Summaries, outliers and adaptive repetition counts on synthetic timings."""

import numpy as np

from dwarfbench.stats import RepetitionPolicy, required_repetitions, summarize

rng = np.random.default_rng(3)
times = rng.normal(2_000_000, 150_000, 25).round().astype(int).tolist()
times[7] = 9_000_000  # one descheduled repetition

s = summarize(times, ci_level=0.95)
print(f"n={s.n} mean={s.mean_ns:.0f} median={s.median_ns:.0f} "
      f"95% CI=[{s.ci_low_ns:.0f}, {s.ci_high_ns:.0f}] outliers={s.outliers}")

# A drifting series (e.g. thermal throttling) trips the autocorrelation warning.
drift = [1_000_000 + 5_000 * i for i in range(30)]
print("drift warnings:", summarize(drift).warnings)

policy = RepetitionPolicy(min_reps=10, max_reps=200, target_rel_halfwidth=0.02)
for sd in (20_000, 100_000, 400_000):
    pilot = rng.normal(2_000_000, sd, 10).tolist()
    est = required_repetitions(pilot, policy)
    print(f"pilot sd~{sd:>7}: {est.count:>3} reps (target {'met' if est.attainable else 'unattainable'})")
