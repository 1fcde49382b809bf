"""Dynamic programming: Needleman-Wunsch global alignment with a linear gap.

Each DP row is filled with vectorised operations. The left-neighbour
dependency H[i, j-1] - gap is a running maximum once the row is shifted by
j * gap, so a row costs one ``maximum.accumulate``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptySequence
from ..model import Region
from ._rng import stream
from .base import Verification, recorder_or_null

MATCH = 2
MISMATCH = -1
GAP = -1
ALPHABET = "ACGT"


@dataclass(frozen=True, eq=False)
class NwInput:
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class NwOutput:
    scores: np.ndarray

    @property
    def score(self) -> int:
        return int(self.scores[-1, -1])


def encode(seq: str) -> np.ndarray:
    table = {c: i for i, c in enumerate(ALPHABET)}
    try:
        return np.array([table[c] for c in seq.upper()], dtype=np.uint8)
    except KeyError as exc:
        raise ValueError(f"symbol {exc.args[0]!r} not in {ALPHABET}") from None


def from_strings(a: str, b: str) -> NwInput:
    return NwInput(encode(a), encode(b))


def generate(params: dict, seed: int) -> NwInput:
    m = int(params["m"])
    rng = stream("nw", seed)
    return NwInput(rng.integers(m, 4).astype(np.uint8), rng.integers(m, 4).astype(np.uint8))


def fill(h: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    rows, cols = h.shape
    j = np.arange(cols, dtype=np.int32)
    h[0, :] = GAP * j
    h[:, 0] = GAP * np.arange(rows, dtype=np.int32)
    subst = np.where(b[None, :] == np.arange(4, dtype=np.uint8)[:, None],
                     MATCH, MISMATCH).astype(np.int32)
    shift = GAP * j[1:]
    best = np.empty(cols, dtype=np.int32)
    for i in range(1, rows):
        prev = h[i - 1]
        np.maximum(prev[:-1] + subst[a[i - 1]], prev[1:] + GAP, out=best[1:])
        best[0] = h[i, 0]
        best[1:] -= shift
        np.maximum.accumulate(best, out=best)
        best[1:] += shift
        h[i, 1:] = best[1:]


def run(inp: NwInput, rec=None) -> NwOutput:
    if inp.a.size == 0 or inp.b.size == 0:
        raise EmptySequence("both sequences must be nonempty")
    rec = recorder_or_null(rec)
    buf: dict = {}
    shape = (inp.a.size + 1, inp.b.size + 1)
    buf["h"] = rec.time_region(Region.SETUP, np.empty, shape, dtype=np.int32)

    def transfer_in():
        buf["a"] = np.ascontiguousarray(inp.a, dtype=np.uint8)
        buf["b"] = np.ascontiguousarray(inp.b, dtype=np.uint8)

    rec.time_region(Region.TRANSFER_IN, transfer_in)
    rec.time_region(Region.COMPUTE, fill, buf["h"], buf["a"], buf["b"])
    scores = rec.time_region(Region.TRANSFER_OUT, np.array, buf["h"], copy=True)
    rec.time_region(Region.TEARDOWN, buf.clear)
    return NwOutput(scores)


def reference_score(a, b) -> int:
    """Plain two-row recurrence over Python ints."""
    a = [int(v) for v in a]
    b = [int(v) for v in b]
    prev = [GAP * j for j in range(len(b) + 1)]
    for i, ai in enumerate(a, 1):
        cur = [GAP * i]
        for j, bj in enumerate(b, 1):
            diag = prev[j - 1] + (MATCH if ai == bj else MISMATCH)
            cur.append(max(diag, prev[j] + GAP, cur[j - 1] + GAP))
        prev = cur
    return prev[-1]


def verify(inp: NwInput, out: NwOutput) -> Verification:
    expected = reference_score(inp.a, inp.b)
    got = out.score
    return Verification(got == expected, float(abs(got - expected)),
                        f"score {got}, reference {expected}")
