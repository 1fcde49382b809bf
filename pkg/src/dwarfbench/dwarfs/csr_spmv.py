"""Sparse linear algebra: repeated CSR matrix-vector product y = A x."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MalformedCSR
from ..model import Region
from ..sizing import SPMV_NNZ_PER_ROW
from ._rng import stream
from .base import Verification, recorder_or_null

TOLERANCE = 1e-5
DEFAULT_ITERATIONS = 10
DENSE_ORACLE_MAX_ROWS = 2048


@dataclass(frozen=True, eq=False)
class CsrInput:
    offsets: np.ndarray
    columns: np.ndarray
    values: np.ndarray
    x: np.ndarray
    iterations: int = DEFAULT_ITERATIONS

    @property
    def rows(self) -> int:
        return len(self.offsets) - 1


@dataclass(frozen=True, eq=False)
class CsrOutput:
    y: np.ndarray


def from_dense(dense, x, iterations: int = 1) -> CsrInput:
    dense = np.asarray(dense, dtype=np.float32)
    rows, cols = np.nonzero(dense)
    counts = np.bincount(rows, minlength=dense.shape[0])
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return CsrInput(offsets, cols.astype(np.int32), dense[rows, cols],
                    np.asarray(x, dtype=np.float32), iterations)


def generate(params: dict, seed: int, iterations: int = DEFAULT_ITERATIONS) -> CsrInput:
    rows = int(params["rows"])
    nnz = int(params.get("nnz", SPMV_NNZ_PER_ROW * rows))
    rng = stream("csr_spmv", seed)
    row_of = np.sort(rng.integers(nnz, rows))
    offsets = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(row_of, minlength=rows), out=offsets[1:])
    columns = rng.integers(nnz, rows).astype(np.int32)
    values = rng.uniform(nnz)
    x = rng.uniform(rows)
    return CsrInput(offsets, columns, values, x, iterations)


def check_csr(inp: CsrInput) -> None:
    off, cols = inp.offsets, inp.columns
    if off.ndim != 1 or off.size < 1:
        raise MalformedCSR("row offsets must be a nonempty 1-d array")
    if off[0] != 0:
        raise MalformedCSR(f"first row offset must be 0, got {off[0]}")
    if np.any(np.diff(off) < 0):
        raise MalformedCSR("row offsets must be non-decreasing")
    if off[-1] != cols.size or cols.size != inp.values.size:
        raise MalformedCSR(
            f"last offset {off[-1]}, {cols.size} column indices and "
            f"{inp.values.size} values must agree"
        )
    if cols.size and (cols.min() < 0 or cols.max() >= inp.x.size):
        raise MalformedCSR(f"column indices must lie in [0, {inp.x.size})")
    if inp.iterations < 1:
        raise MalformedCSR("iterations must be >= 1")


def _pack(inp: CsrInput, buf: dict) -> None:
    buf["row_ids"] = np.repeat(np.arange(inp.rows, dtype=np.int64), np.diff(inp.offsets))
    buf["cols"] = np.ascontiguousarray(inp.columns)
    buf["vals"] = np.ascontiguousarray(inp.values, dtype=np.float32)
    buf["x"] = np.ascontiguousarray(inp.x, dtype=np.float32)


def _spmv(buf: dict, rows: int, iterations: int) -> None:
    for _ in range(iterations):
        products = buf["vals"].astype(np.float64) * buf["x"][buf["cols"]]
        acc = np.bincount(buf["row_ids"], weights=products, minlength=rows)
        buf["y"][:] = acc


def run(inp: CsrInput, rec=None) -> CsrOutput:
    check_csr(inp)
    rec = recorder_or_null(rec)
    buf: dict = {}
    buf["y"] = rec.time_region(Region.SETUP, np.zeros, inp.rows, dtype=np.float32)
    rec.time_region(Region.TRANSFER_IN, _pack, inp, buf)
    rec.time_region(Region.COMPUTE, _spmv, buf, inp.rows, inp.iterations)
    y = rec.time_region(Region.TRANSFER_OUT, np.array, buf["y"], copy=True)
    rec.time_region(Region.TEARDOWN, buf.clear)
    return CsrOutput(y)


def reference(inp: CsrInput) -> np.ndarray:
    """Dense product for small matrices, scatter-add over COO triples otherwise."""
    rows = inp.rows
    row_ids = np.repeat(np.arange(rows), np.diff(inp.offsets))
    vals = inp.values.astype(np.float64)
    x = inp.x.astype(np.float64)
    if rows <= DENSE_ORACLE_MAX_ROWS and inp.x.size <= DENSE_ORACLE_MAX_ROWS:
        dense = np.zeros((rows, inp.x.size))
        np.add.at(dense, (row_ids, inp.columns), vals)
        return dense @ x
    y = np.zeros(rows)
    np.add.at(y, row_ids, vals * x[inp.columns])
    return y


def verify(inp: CsrInput, out: CsrOutput) -> Verification:
    ref = reference(inp)
    if out.y.shape != ref.shape:
        return Verification(False, float("inf"), f"shape {out.y.shape} != {ref.shape}")
    scale = max(float(np.max(np.abs(ref))) if ref.size else 0.0, np.finfo(np.float32).tiny)
    err = float(np.max(np.abs(out.y.astype(np.float64) - ref))) / scale if ref.size else 0.0
    return Verification(bool(err <= TOLERANCE), err, f"max relative error {err:.3g}")
