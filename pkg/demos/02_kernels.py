"""Generate, run and verify each kernel once at its tiny size.

Region timings come from a RegionRecorder; verification compares the output
against the kernel's own independent oracle.
"""

from dwarfbench import DEFAULT_PROFILE, SizeClass
from dwarfbench.dwarfs import KERNELS, output_digest
from dwarfbench.sizing import build_size_plan
from dwarfbench.timing import RegionRecorder

for name, kernel in sorted(KERNELS.items()):
    params = build_size_plan(name, DEFAULT_PROFILE)[SizeClass.TINY].params
    inp = kernel.generate(params, seed=1)
    rec = RegionRecorder(name, SizeClass.TINY, DEFAULT_PROFILE.id)
    out = kernel.run(inp, rec)
    check = kernel.verify(inp, out)
    regions = ", ".join(f"{s.region.value}={s.duration_ns / 1e3:.1f}us" for s in rec.samples)
    print(f"{name:9} {params}  verify={'ok' if check else 'FAIL'} "
          f"max_err={check.max_error:.2e} digest={output_digest(out)}")
    print(f"          {regions}")
