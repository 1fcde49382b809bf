"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import random
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.integrate import trapezoid

from conftest import ACCEPTANCE_LINES
from dwarfbench.dwarfs import KERNELS
from dwarfbench.energy import PowerProfile, VirtualClock, make_mock_provider, region_energy
from dwarfbench.errors import LogFormatError
from dwarfbench.harness import RunConfig, run, scaling_table, verify_failures
from dwarfbench.model import (
    DEFAULT_PROFILE,
    SIZE_CLASSES,
    Region,
    Sample,
    SizeClass,
    benchmark_names,
    registry_lookup,
)
from dwarfbench.results import RunLog, parse_log, write_log
from dwarfbench.sizing import (
    assignment_for,
    build_size_plan,
    class_budgets,
    growth_step,
    working_set_bytes,
)
from dwarfbench.stats import RepetitionPolicy, summarize
from dwarfbench.timing import RegionRecorder, empty_region_median_ns, read_monotonic


@contextmanager
def criterion(name: str, budget_s: float):
    """Time the body, record a PASS/FAIL line and fail on overrun."""
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  {name}: {type(exc).__name__}: {exc}"[:300])
        print(ACCEPTANCE_LINES[-1])
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed < budget_s
    extra = detail.get("info", "")
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {extra} ({elapsed:.1f} s, budget {budget_s:g} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _tiny_growth(bench):
    return next(iter(build_size_plan(bench, DEFAULT_PROFILE).entries[SizeClass.TINY].params.values()))


def _random_tiny_params(bench, rng):
    """Uniform draw between the lower bounds and the tiny-class solution."""
    spec = registry_lookup(bench)
    top = build_size_plan(bench, DEFAULT_PROFILE)[SizeClass.TINY].params
    low = {b.name: b.low for b in spec.param_schema}
    if bench == "fft":
        return {"n": 1 << rng.randint(1, top["n"].bit_length() - 1)}
    if bench == "csr_spmv":
        rows = rng.randint(1, top["rows"])
        return {"rows": rows, "nnz": rng.randint(0, rows * 10)}
    if bench == "bfs":
        nodes = rng.randint(1, top["nodes"])
        return {"nodes": nodes, "edges": rng.randint(0, nodes * 8)}
    if bench == "srad":
        return {"r": rng.randint(2, top["r"]), "c": rng.randint(2, top["c"])}
    (name, hi), = top.items()
    return {name: rng.randint(low[name], hi)}


def test_kernel_oracle_equivalence():
    rng = random.Random(20240601)
    with criterion("kernel oracle equivalence, 8 x 100 tiny instances", 60) as d:
        failures = []
        for name, kernel in sorted(KERNELS.items()):
            for i in range(100):
                params = _random_tiny_params(name, rng)
                seed = rng.getrandbits(64)
                inp = kernel.generate(params, seed)
                res = kernel.verify(inp, kernel.run(inp))
                if not res.passed:
                    failures.append(f"{name} {params} seed={seed}: {res.detail}")
        d["info"] = f"{800 - len(failures)}/800 verified"
        assert not failures, failures[:5]


def test_sizing_inverse_and_maximality():
    with criterion("sizing inverse/maximality on the default profile", 5) as d:
        budgets = class_budgets(DEFAULT_PROFILE)
        checked = 0
        for bench in benchmark_names():
            plan = build_size_plan(bench, DEFAULT_PROFILE)
            ws = []
            for cls in SIZE_CLASSES:
                params = plan[cls].params
                growth = params[registry_lookup(bench).growth_param]
                assert assignment_for(bench, growth) == params
                size = working_set_bytes(bench, params)
                assert size == plan[cls].working_set_bytes <= budgets[cls]
                nxt = assignment_for(bench, growth_step(bench, growth))
                assert working_set_bytes(bench, nxt) > budgets[cls], (bench, cls)
                ws.append(size)
                checked += 1
            assert all(a < b for a, b in zip(ws, ws[1:])), (bench, ws)
        d["info"] = f"{checked} benchmark x class plans"


def test_ci_coverage():
    with criterion("CI coverage, 1000 Gaussian trials n=30", 5) as d:
        rng = np.random.default_rng(7)
        hits = 0
        for _ in range(1000):
            s = summarize(rng.normal(250.0, 20.0, 30).tolist(), 0.95)
            hits += s.ci_low_ns <= 250.0 <= s.ci_high_ns
        d["info"] = f"{hits / 10:.1f}% coverage"
        assert 930 <= hits <= 970


def test_timer_discipline():
    with criterion("timer discipline", 30) as d:
        reads = np.fromiter((read_monotonic() for _ in range(1_000_000)), np.int64, 1_000_000)
        assert (np.diff(reads) >= 0).all()
        med = empty_region_median_ns()
        rec = RegionRecorder("lud", SizeClass.TINY, "dev")
        rec.time_region(Region.COMPUTE, time.sleep, 0.010)
        slept = rec.samples[0].duration_ns
        assert slept >= 10_000_000
        d["info"] = f"empty-region median {med:.0f} ns, sleep(10 ms) -> {slept / 1e6:.3f} ms"
        assert med <= 1000


def test_energy_mock_exactness():
    with criterion("energy mock exactness", 1) as d:
        clock = VirtualClock()
        _, const = region_energy(make_mock_provider(10.0, clock=clock), clock.sleep, 1.0)
        assert const == 10_000_000
        clock = VirtualClock()
        ramp = PowerProfile([(0.0, 0.0), (0.25, 40.0), (1.0, 10.0)])
        _, got = region_energy(make_mock_provider(ramp, clock=clock), clock.sleep, 1.0)
        ts = np.linspace(0, 1e9, 20_001)
        oracle = trapezoid(np.interp(ts, [0, 0.25e9, 1e9], [0, 40, 10]), ts) / 1000.0
        rel = abs(got - oracle) / oracle
        d["info"] = f"constant {const:.0f} uJ, ramp rel err {rel:.2e}"
        assert rel <= 0.01


def _random_log(rng, n):
    regions, classes = list(Region), list(SizeClass)
    recs = [Sample(rng.choice(benchmark_names()), rng.choice(classes), rng.choice(["d0", "d-1"]),
                   rng.choice(regions), rng.randrange(1000), rng.randrange(10 ** 13),
                   rng.choice([None, rng.uniform(0, 1e9)]),
                   tuple(rng.sample(["verified", "verify_fail", "warm"], rng.randrange(3))))
            for _ in range(n)]
    hdr = {"format": "1", "suite_version": "0.1.0", "device": "d0", "seed": str(rng.getrandbits(64)),
           "note": "x=y;z"}
    return RunLog(hdr, recs)


def test_log_round_trip_and_fuzz():
    with criterion("log round trip and parser fuzzing", 30) as d:
        rng = random.Random(11)
        sizes = [0, 1, 2, 10, 100, 1000, 10_000] + [rng.randrange(0, 10_001) for _ in range(13)]
        for n in sizes:
            lg = _random_log(rng, n)
            assert parse_log(write_log(lg)) == lg
        seed_bytes = write_log(_random_log(rng, 30))
        crashes = 0
        for i in range(10_000):
            if i % 2:
                data = bytes(rng.getrandbits(8) for _ in range(rng.randrange(200)))
            else:
                b = bytearray(seed_bytes)
                for _ in range(rng.randrange(1, 8)):
                    b[rng.randrange(len(b))] = rng.getrandbits(8)
                data = bytes(b)
            try:
                parse_log(data)
            except LogFormatError:
                pass
            except Exception:
                crashes += 1
        d["info"] = f"{len(sizes)} logs round-tripped, 10000 fuzz streams, {crashes} crashes"
        assert crashes == 0


@pytest.mark.slow
def test_qualitative_scaling():
    with criterion("end-to-end scaling, 8 benchmarks x tiny/small/medium", 15 * 60) as d:
        lg = run(RunConfig(policy=RepetitionPolicy.fixed(10)))
        assert not verify_failures(lg), verify_failures(lg)
        table = scaling_table([lg])
        ratios = []
        for bench in benchmark_names():
            series = table[bench][DEFAULT_PROFILE.id]
            med = [series[c] for c in (SizeClass.TINY, SizeClass.SMALL, SizeClass.MEDIUM)]
            assert med[0] < med[1] < med[2], (bench, med)
            ratios.append(f"{bench} x{med[2] / med[0]:.0f}")
        d["info"] = "medium/tiny " + ", ".join(ratios)


@pytest.mark.slow
def test_reproducibility():
    with criterion("reproducibility of identical runs", 10 * 60) as d:
        cfg = RunConfig(size_classes=["tiny", "small"], seed=12345, energy="mock",
                        policy=RepetitionPolicy.fixed(3))
        a, b = run(cfg), run(cfg)
        diff = sorted(k for k in a.header.keys() | b.header.keys()
                      if a.header.get(k) != b.header.get(k))
        assert diff in ([], ["timestamp"]), diff

        def masked(lg):
            return [(s.benchmark, s.size_class, s.device, s.region, s.repetition, s.flags)
                    for s in lg.records]

        assert masked(a) == masked(b)
        digests = sum(k.startswith("digest.") for k in a.header)
        d["info"] = f"header differs only in {diff or 'nothing'}, {digests} output digests equal"
