"""Dense linear algebra: Doolittle LU factorisation without pivoting.

The factors are packed into one n x n float32 array: the strict lower
triangle holds L (whose unit diagonal is implicit), the upper triangle U.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import KernelInputError, SingularPivot
from ..model import Region
from ._rng import stream
from .base import Verification, recorder_or_null

PIVOT_EPS = 1e-12
BLOCK = 64
TOLERANCE = 1e-4


@dataclass(frozen=True, eq=False)
class LudInput:
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class LudOutput:
    lu: np.ndarray

    @property
    def lower(self) -> np.ndarray:
        out = np.tril(self.lu, -1)
        np.fill_diagonal(out, 1)
        return out

    @property
    def upper(self) -> np.ndarray:
        return np.triu(self.lu)


def generate(params: dict, seed: int) -> LudInput:
    n = int(params["n"])
    a = stream("lud", seed).uniform(n * n).reshape(n, n)
    a[np.diag_indices(n)] += np.float32(n)
    return LudInput(a)


def _factor_panel(a: np.ndarray, k0: int, k1: int) -> None:
    """Unblocked elimination of columns k0:k1 over rows k0:, plus the U block row."""
    for k in range(k0, k1):
        piv = float(a[k, k])
        if not abs(piv) >= PIVOT_EPS:
            raise SingularPivot(f"pivot {piv!r} at index {k}")
        a[k + 1:, k] /= a[k, k]
        # update the rest of the panel and, for rows inside the block, the U row block
        a[k + 1:, k + 1:k1] -= np.outer(a[k + 1:, k], a[k, k + 1:k1])
        a[k + 1:k1, k1:] -= np.outer(a[k + 1:k1, k], a[k, k1:])


def factor_in_place(a: np.ndarray, block: int = BLOCK) -> None:
    """Right-looking blocked LU; trailing updates accumulate in float64."""
    n = a.shape[0]
    for k0 in range(0, n, block):
        k1 = min(k0 + block, n)
        _factor_panel(a, k0, k1)
        if k1 < n:
            update = a[k1:, k0:k1].astype(np.float64) @ a[k0:k1, k1:].astype(np.float64)
            a[k1:, k1:] -= update.astype(a.dtype)


def run(inp: LudInput, rec=None) -> LudOutput:
    m = inp.matrix
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise KernelInputError(f"lud needs a nonempty square matrix, got shape {m.shape}")
    rec = recorder_or_null(rec)
    buf: dict = {}
    buf["a"] = rec.time_region(Region.SETUP, np.empty, m.shape, dtype=np.float32)
    rec.time_region(Region.TRANSFER_IN, np.copyto, buf["a"], m)
    rec.time_region(Region.COMPUTE, factor_in_place, buf["a"])
    lu = rec.time_region(Region.TRANSFER_OUT, np.array, buf["a"], copy=True)
    rec.time_region(Region.TEARDOWN, buf.clear)
    return LudOutput(lu)


def verify(inp: LudInput, out: LudOutput) -> Verification:
    a = inp.matrix.astype(np.float64)
    lu = out.lu.astype(np.float64)
    lower = np.tril(lu, -1)
    np.fill_diagonal(lower, 1.0)
    recon = lower @ np.triu(lu)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    err = float(np.max(np.abs(recon - a))) if a.size else 0.0
    bound = TOLERANCE * scale
    ok = bool(np.isfinite(err) and err <= bound)
    return Verification(ok, err / scale if scale else err,
                        f"max|LU-A| = {err:.3g}, bound {bound:.3g}")
