"""Working-set formulas and their inverses: map memory budgets to problem sizes.

All real elements are 4 bytes wide and complex elements 8 bytes. Each
benchmark grows along one canonical parameter; the others are derived from
it when solving (nnz = 10 * rows, edges = 8 * nodes, square srad grids).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import BudgetTooSmall, InfeasibleClass, ParamOutOfBounds
from .model import (
    SIZE_CLASSES,
    DeviceProfile,
    SizeClass,
    format_key_values,
    registry_lookup,
)

KMEANS_DIMS = 16
KMEANS_K = 8
SPMV_NNZ_PER_ROW = 10
BFS_EDGES_PER_NODE = 8
LARGE_MULTIPLIER = 4
MEDIUM_LLC_MULTIPLIER = 4


def _ws_lud(p):
    return 4 * p["n"] ** 2


def _ws_fft(p):
    return 16 * p["n"]


def _ws_csr_spmv(p):
    return 8 * p["nnz"] + 4 * (p["rows"] + 1) + 8 * p["rows"]


def _ws_nw(p):
    m = p["m"]
    return 4 * (m + 1) ** 2 + 2 * m


def _ws_kmeans(p):
    pts = p["points"]
    return 4 * (pts * KMEANS_DIMS + KMEANS_K * KMEANS_DIMS + pts)


def _ws_crc32(p):
    return p["n"]


def _ws_bfs(p):
    return 4 * (p["nodes"] + 1) + 8 * p["edges"] + 8 * p["nodes"]


def _ws_srad(p):
    return 2 * 4 * p["r"] * p["c"]


_FORMULAS = {
    "lud": _ws_lud,
    "fft": _ws_fft,
    "csr_spmv": _ws_csr_spmv,
    "nw": _ws_nw,
    "kmeans": _ws_kmeans,
    "crc32": _ws_crc32,
    "bfs": _ws_bfs,
    "srad": _ws_srad,
}


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def assignment_for(benchmark: str, growth: int) -> dict[str, int]:
    """Full parameter assignment for a value of the canonical growth axis."""
    spec = registry_lookup(benchmark)
    if benchmark == "csr_spmv":
        return {"rows": growth, "nnz": SPMV_NNZ_PER_ROW * growth}
    if benchmark == "bfs":
        return {"nodes": growth, "edges": BFS_EDGES_PER_NODE * growth}
    if benchmark == "srad":
        return {"r": growth, "c": growth}
    return {spec.growth_param: growth}


def growth_step(benchmark: str, growth: int) -> int:
    """The next valid value along the growth axis."""
    registry_lookup(benchmark)
    return growth * 2 if benchmark == "fft" else growth + 1


def check_params(benchmark: str, params: Mapping[str, int]) -> None:
    spec = registry_lookup(benchmark)
    names = set(spec.param_names)
    if set(params) != names:
        raise ParamOutOfBounds(
            f"{benchmark} expects parameters {sorted(names)}, got {sorted(params)}"
        )
    for b in spec.param_schema:
        v = params[b.name]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ParamOutOfBounds(f"{benchmark}.{b.name} must be an integer, got {v!r}")
        if not b.check(v):
            raise ParamOutOfBounds(f"{benchmark}.{b.name}={v} outside [{b.low}, {b.high}]")
    if benchmark == "fft" and not _is_pow2(params["n"]):
        raise ParamOutOfBounds(f"fft.n={params['n']} is not a power of two")


def working_set_bytes(benchmark: str, params: Mapping[str, int]) -> int:
    """Exact byte count of the live buffers for ``params``."""
    check_params(benchmark, params)
    return _FORMULAS[benchmark](params)


def _growth_range(benchmark: str) -> tuple[int, int]:
    spec = registry_lookup(benchmark)
    lo, hi = spec.bounds(spec.growth_param).low, spec.bounds(spec.growth_param).high
    # derived parameters can cap the growth axis before its own bound does
    for b in spec.param_schema:
        if b.name == spec.growth_param:
            continue
        while hi > lo and not b.check(assignment_for(benchmark, hi)[b.name]):
            hi = lo + (hi - lo) // 2
    return lo, hi


def solve_params(benchmark: str, budget_bytes: int) -> dict[str, int]:
    """Largest assignment along the growth axis whose working set fits the budget."""
    lo, hi = _growth_range(benchmark)
    ws = _FORMULAS[benchmark]
    if ws(assignment_for(benchmark, lo)) > budget_bytes:
        raise BudgetTooSmall(
            f"{benchmark} needs at least {ws(assignment_for(benchmark, lo))} bytes, "
            f"budget is {budget_bytes}"
        )
    if benchmark == "fft":
        # search over exponents; lo and hi are powers of two
        e_lo, e_hi = lo.bit_length() - 1, hi.bit_length() - 1
        while e_lo < e_hi:
            mid = (e_lo + e_hi + 1) // 2
            if ws(assignment_for(benchmark, 1 << mid)) <= budget_bytes:
                e_lo = mid
            else:
                e_hi = mid - 1
        return assignment_for(benchmark, 1 << e_lo)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ws(assignment_for(benchmark, mid)) <= budget_bytes:
            lo = mid
        else:
            hi = mid - 1
    return assignment_for(benchmark, lo)


def class_budgets(device: DeviceProfile) -> dict[SizeClass, int]:
    """Byte budget targeted by each size class on ``device``.

    tiny fits L1, small fits the LLC, medium spills past the LLC into DRAM
    and large is four times medium; both are capped at the DRAM budget.
    """
    medium = min(MEDIUM_LLC_MULTIPLIER * device.llc_bytes, device.dram_bytes)
    return {
        SizeClass.TINY: device.l1_bytes,
        SizeClass.SMALL: device.llc_bytes,
        SizeClass.MEDIUM: medium,
        SizeClass.LARGE: min(LARGE_MULTIPLIER * medium, device.dram_bytes),
    }


@dataclass(frozen=True)
class PlanEntry:
    params: dict[str, int]
    working_set_bytes: int
    budget_bytes: int


@dataclass(frozen=True)
class SizePlan:
    benchmark: str
    device: str
    entries: dict[SizeClass, PlanEntry]
    infeasible: dict[SizeClass, str] = field(default_factory=dict)

    def __getitem__(self, cls: SizeClass) -> PlanEntry:
        return self.entries[cls]


def build_size_plan(benchmark: str, device: DeviceProfile, *, strict: bool = True) -> SizePlan:
    """Solve parameters for every size class.

    With ``strict`` (the default) a class that does not grow past its
    predecessor raises :class:`InfeasibleClass`; otherwise it is left out of
    ``entries`` and explained in ``infeasible``.
    """
    registry_lookup(benchmark)
    entries: dict[SizeClass, PlanEntry] = {}
    infeasible: dict[SizeClass, str] = {}
    prev_ws = -1
    for cls, budget in class_budgets(device).items():
        try:
            params = solve_params(benchmark, budget)
        except BudgetTooSmall as exc:
            reason = str(exc)
        else:
            ws = _FORMULAS[benchmark](params)
            if ws > prev_ws:
                entries[cls] = PlanEntry(params, ws, budget)
                prev_ws = ws
                continue
            reason = (f"{cls} working set {ws} does not exceed the previous class "
                      f"({prev_ws}) on device {device.id}")
        if strict:
            raise InfeasibleClass(f"{benchmark}: {reason}")
        infeasible[cls] = reason
    return SizePlan(benchmark, device.id, entries, infeasible)


def format_size_plan(plan: SizePlan) -> str:
    """Render a plan in the key=value format used for device profiles."""
    pairs: dict[str, object] = {"benchmark": plan.benchmark, "device": plan.device}
    for cls in SIZE_CLASSES:
        if cls in plan.entries:
            e = plan.entries[cls]
            pairs[f"{cls}.budget_bytes"] = e.budget_bytes
            for k, v in e.params.items():
                pairs[f"{cls}.{k}"] = v
            pairs[f"{cls}.working_set_bytes"] = e.working_set_bytes
        elif cls in plan.infeasible:
            pairs[f"{cls}.infeasible"] = plan.infeasible[cls].replace("#", "")
    return format_key_values(pairs, comment=f"size plan for {plan.benchmark}")
