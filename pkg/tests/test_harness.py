import re

import pytest

from dwarfbench import cli, harness
from dwarfbench.dwarfs import get_kernel
from dwarfbench.dwarfs.base import Verification
from dwarfbench.errors import ConfigError, EmptyLogs, MixedFormatVersions, UnknownBenchmark
from dwarfbench.harness import RunConfig, listing, report, run, scaling_chart, verify_failures
from dwarfbench.model import DeviceProfile, Region, Sample, SizeClass
from dwarfbench.results import RunLog, parse_log, read_log
from dwarfbench.stats import RepetitionPolicy

FIXED3 = RepetitionPolicy.fixed(3)


def _cfg(**kw):
    base = dict(benchmarks=["lud"], size_classes=["tiny"], policy=FIXED3)
    base.update(kw)
    return RunConfig(**base)


def test_lud_tiny_sample_count():
    lg = run(_cfg())
    assert len(lg.records) == 3 * 5
    assert {s.region for s in lg.records} == set(Region)
    assert all(s.flags == ("verified",) for s in lg.records)
    assert lg.header["verify.lud.tiny"] == "pass"
    assert lg.header["reps.lud.tiny"] == "3"
    assert lg.header["params.lud.tiny"] == "n=90"


def test_unknown_benchmark_rejected_before_running(monkeypatch):
    called = []
    monkeypatch.setattr(harness, "_run_pair", lambda *a: called.append(a))
    with pytest.raises(UnknownBenchmark):
        run(_cfg(benchmarks=["lud", "foo"]))
    assert not called


@pytest.mark.parametrize("seed", [-1, 2 ** 64, 1.5])
def test_bad_seed(seed):
    with pytest.raises(ConfigError):
        run(_cfg(seed=seed))


def test_log_written_and_parsed(tmp_path):
    out = tmp_path / "r.log"
    lg = run(_cfg(benchmarks=["crc32"], energy="mock", output=out))
    assert read_log(out) == lg
    assert all(s.energy_uj is not None and s.energy_uj >= 0 for s in lg.records)
    assert {s.region for s in lg.records} == {Region.TRANSFER_IN, Region.COMPUTE, Region.TRANSFER_OUT}


def test_adaptive_policy_records_target():
    lg = run(_cfg(benchmarks=["crc32"], policy=RepetitionPolicy(10, 12, 0.5)))
    assert lg.header["ci_target.crc32.tiny"] in ("met", "unattainable")
    assert 10 <= int(lg.header["reps.crc32.tiny"]) <= 12


def _mask(lg: RunLog):
    hdr = {k: v for k, v in lg.header.items() if k != "timestamp"}
    recs = [(s.benchmark, s.size_class, s.device, s.region, s.repetition, s.flags)
            for s in lg.records]
    return hdr, recs


def test_reproducible_runs():
    cfg = _cfg(benchmarks=["kmeans", "nw"], seed=99)
    a, b = run(cfg), run(cfg)
    assert _mask(a) == _mask(b)
    assert a.header["digest.kmeans.tiny"] == b.header["digest.kmeans.tiny"]
    c = run(_cfg(benchmarks=["kmeans", "nw"], seed=100))
    assert c.header["digest.kmeans.tiny"] != a.header["digest.kmeans.tiny"]


def test_infeasible_class_skipped():
    prof = DeviceProfile("flat", 32_768, 32_769, 1 << 30)
    lg = run(_cfg(device_profile=prof, size_classes=["tiny", "small"]))
    assert lg.header["skipped.lud.small"].startswith("infeasible")
    assert {s.size_class for s in lg.records} == {SizeClass.TINY}


def _failing(monkeypatch, bench):
    k = get_kernel(bench)
    bad = k._replace(verify=lambda inp, out: Verification(False, 1.0, "forced"))
    monkeypatch.setattr(harness, "get_kernel", lambda name: bad if name == bench else get_kernel(name))


def test_verify_failure_flags_and_continues(monkeypatch):
    _failing(monkeypatch, "lud")
    lg = run(_cfg(benchmarks=["lud", "crc32"]))
    assert verify_failures(lg) == ["lud.tiny"]
    assert {s.flags for s in lg.records if s.benchmark == "lud"} == {("verify_fail",)}
    assert {s.flags for s in lg.records if s.benchmark == "crc32"} == {("verified",)}


def test_kernel_exception_is_contained(monkeypatch):
    k = get_kernel("fft")

    def boom(inp, rec=None):
        raise RuntimeError("device lost")

    monkeypatch.setattr(harness, "get_kernel",
                        lambda name: k._replace(run=boom) if name == "fft" else get_kernel(name))
    lg = run(_cfg(benchmarks=["fft", "bfs"]))
    assert lg.header["verify.fft.tiny"].startswith("error: RuntimeError")
    assert {s.benchmark for s in lg.records} == {"bfs"}


# -- reports ---------------------------------------------------------------------------

def _synthetic(device="dev", scale=1.0, fmt="1"):
    recs = []
    for cls, base in ((SizeClass.TINY, 1000), (SizeClass.SMALL, 10_000)):
        for rep in range(5):
            for region in (Region.SETUP, Region.COMPUTE):
                recs.append(Sample("lud", cls, device, region, rep,
                                   int(base * scale) + rep, None, ("verified",)))
    return RunLog({"format": fmt, "suite_version": "x", "device": device, "seed": "0"}, recs)


def test_summary_one_row_per_key():
    rep = report([_synthetic()], "summary")
    lines = rep.csv.splitlines()
    assert len(lines) == 1 + 4
    assert lines[0].startswith("device,benchmark,size_class,region,n,")
    row = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert row["region"] == "compute" and row["n"] == "5" and row["median_ns"] == "1002"


def test_scaling_two_devices(tmp_path):
    rep = report([_synthetic("a"), _synthetic("b", 2.0)], "scaling")
    lines = rep.csv.splitlines()
    assert lines[0].split(",")[0] == "device"
    assert {ln.split(",")[0] for ln in lines[1:]} == {"a", "b"}
    written = rep.write(tmp_path)
    assert (tmp_path / "scaling.csv") in written and (tmp_path / "scaling_lud.svg") in written


def test_chart_heights_proportional():
    svg = scaling_chart("x", {"d": {SizeClass.TINY: 100.0, SizeClass.SMALL: 1000.0}})
    base = float(re.search(r'data-baseline="([\d.]+)"', svg).group(1))
    ys = {m.group(2): float(m.group(1)) for m in
          re.finditer(r'cy="([\d.]+)"[^>]*data-class="(\w+)"', svg)}
    ratio = (base - ys["small"]) / (base - ys["tiny"])
    assert ratio == pytest.approx(10.0, rel=1e-6)


def test_report_errors():
    with pytest.raises(EmptyLogs):
        report([], "summary")
    with pytest.raises(MixedFormatVersions):
        report([_synthetic(), _synthetic(fmt="1.1")], "summary")
    with pytest.raises(ConfigError):
        report([_synthetic()], "pie")


def test_listings():
    bl = listing("benchmarks").splitlines()
    assert len(bl) == 8 and bl[0].split()[0] == "bfs"
    assert listing("classes").split() == ["tiny", "small", "medium", "large"]
    assert "tiny.n=90" in listing("sizes").splitlines()


# -- cli -------------------------------------------------------------------------------

def test_cli_run_ok(tmp_path, capsys):
    out = tmp_path / "r.log"
    code = cli.main(["run", "--benchmarks", "crc32", "--classes", "tiny",
                     "--reps-min", "2", "--reps-max", "2", "--out", str(out)])
    assert code == 0 and out.exists()
    assert cli.main(["report", str(out), "--kind", "scaling", "--out", str(tmp_path / "rep")]) == 0
    assert (tmp_path / "rep" / "scaling_crc32.svg").exists()


def test_cli_stdout_log(capsys):
    assert cli.main(["run", "--benchmarks", "bfs", "--classes", "tiny",
                     "--reps-min", "1", "--reps-max", "1"]) == 0
    lg = parse_log(capsys.readouterr().out)
    assert len(lg.records) == 5


def test_cli_verify_failure_exit_1(monkeypatch):
    _failing(monkeypatch, "crc32")
    assert cli.main(["run", "--benchmarks", "crc32", "--classes", "tiny",
                     "--reps-min", "1", "--reps-max", "1"]) == 1


@pytest.mark.parametrize("argv", [
    ["run", "--benchmarks", "foo"],
    ["run", "--classes", "huge"],
    ["run", "--reps-min", "5", "--reps-max", "20"],
    ["run", "--energy", "nvml", "--benchmarks", "lud"],
    ["report", "/nonexistent/log"],
    ["list", "sizes", "--profile", "/nonexistent/profile"],
])
def test_cli_config_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_cli_list_with_profile(tmp_path, capsys):
    p = tmp_path / "dev.txt"
    p.write_text("id=small-dev\nl1_bytes=16384\nllc_bytes=1048576\ndram_bytes=1073741824\n")
    assert cli.main(["list", "sizes-for-profile", "--profile", str(p)]) == 0
    assert "tiny.n=64" in capsys.readouterr().out.splitlines()
