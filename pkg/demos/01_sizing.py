"""Size every benchmark for a device profile and show the resulting plan.

    python3 demos/01_sizing.py
"""

from dwarfbench import DeviceProfile
from dwarfbench.model import SIZE_CLASSES, benchmark_names
from dwarfbench.sizing import build_size_plan, class_budgets

# A small embedded-style part: 16 KiB L1, 512 KiB shared cache, 256 MiB DRAM.
board = DeviceProfile("board", 16 * 1024, 512 * 1024, 256 * 1024 ** 2, "example SoC")

budgets = class_budgets(board)
print("budgets:", {c.value: b for c, b in budgets.items()})

for name in benchmark_names():
    plan = build_size_plan(name, board, strict=False)
    cells = []
    for cls in SIZE_CLASSES:
        if cls in plan.entries:
            e = plan.entries[cls]
            params = ",".join(f"{k}={v}" for k, v in e.params.items())
            cells.append(f"{cls.value}: {params} ({e.working_set_bytes / budgets[cls]:.0%})")
        else:
            cells.append(f"{cls.value}: infeasible")
    print(f"{name:9}", " | ".join(cells))
