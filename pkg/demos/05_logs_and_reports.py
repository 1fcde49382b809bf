"""Run two benchmarks on two device profiles, then build scaling reports.

Writes logs and a report directory under ./demo-output.
"""

from pathlib import Path

from dwarfbench import DeviceProfile
from dwarfbench.harness import RunConfig, report, run
from dwarfbench.results import read_log
from dwarfbench.stats import RepetitionPolicy

out = Path("demo-output")
out.mkdir(exist_ok=True)

devices = [
    DeviceProfile("laptop", 32 * 1024, 8 * 1024 ** 2, 16 * 1024 ** 3),
    DeviceProfile("board", 16 * 1024, 512 * 1024, 256 * 1024 ** 2),
]
paths = []
for dev in devices:
    cfg = RunConfig(benchmarks=["fft", "crc32"], size_classes=["tiny", "small"],
                    device_profile=dev, seed=7, energy="mock:15",
                    policy=RepetitionPolicy.fixed(5), output=out / f"{dev.id}.log")
    run(cfg, on_progress=print)
    paths.append(cfg.output)

logs = [read_log(p) for p in paths]
print(report(logs, "summary").csv)
for p in report(logs, "scaling").write(out / "report"):
    print("wrote", p)
