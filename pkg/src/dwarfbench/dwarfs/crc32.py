"""Combinational logic: CRC-32 (reflected 0x04C11DB7, init and xorout 0xFFFFFFFF).

The message is cut into equal-length lanes whose CRC registers advance
together, one byte column per table lookup. Lane results are then folded
with the GF(2) operator that shifts a register past ``lane_length`` zero
bytes, the same linearity zlib's ``crc32_combine`` relies on.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from ..model import Region
from ._rng import stream
from .base import Verification, recorder_or_null

POLY_REFLECTED = 0xEDB88320
MASK32 = 0xFFFFFFFF
MAX_LANES = 4096
MIN_LANE_BYTES = 256
# bit-serial oracle cost grows with length; beyond this zlib is the reference
BITWISE_ORACLE_MAX_BYTES = 1 << 16


def _make_table() -> np.ndarray:
    table = np.empty(256, dtype=np.uint32)
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ POLY_REFLECTED if c & 1 else c >> 1
        table[i] = c
    return table


TABLE = _make_table()
_TABLE_LIST = TABLE.tolist()


@dataclass(frozen=True, eq=False)
class Crc32Input:
    message: np.ndarray


@dataclass(frozen=True, eq=False)
class Crc32Output:
    checksum: int


def from_bytes(data: bytes) -> Crc32Input:
    return Crc32Input(np.frombuffer(bytes(data), dtype=np.uint8))


def generate(params: dict, seed: int) -> Crc32Input:
    n = int(params["n"])
    return Crc32Input(stream("crc32", seed).integers(n, 256).astype(np.uint8))


# -- GF(2) register operators (32x32 matrices stored as 32 column words) -------

def _gf2_times(mat: list[int], vec: int) -> int:
    out = 0
    i = 0
    while vec:
        if vec & 1:
            out ^= mat[i]
        vec >>= 1
        i += 1
    return out


def _gf2_square(mat: list[int]) -> list[int]:
    return [_gf2_times(mat, mat[i]) for i in range(32)]


def zeros_operator(nbytes: int) -> list[int]:
    """Matrix advancing a raw CRC register over ``nbytes`` zero bytes."""
    result = [1 << i for i in range(32)]
    op = [POLY_REFLECTED] + [1 << (i - 1) for i in range(1, 32)]  # one zero bit
    for _ in range(3):  # one zero byte
        op = _gf2_square(op)
    n = nbytes
    while n:
        if n & 1:
            result = [_gf2_times(op, col) for col in result]
        n >>= 1
        if n:
            op = _gf2_square(op)
    return result


def _serial(register: int, data: np.ndarray) -> int:
    t = _TABLE_LIST
    for b in data.tolist():
        register = t[(register ^ b) & 0xFF] ^ (register >> 8)
    return register


def _layout(n: int) -> tuple[int, int]:
    lanes = max(1, min(MAX_LANES, n // MIN_LANE_BYTES))
    return lanes, n // lanes


def pack_lanes(message: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column-major lane matrix (lane_length x lanes) plus the leftover tail."""
    lanes, length = _layout(message.size)
    body = message[:lanes * length].reshape(lanes, length)
    return np.ascontiguousarray(body.T), message[lanes * length:]


def crc_lanes(columns: np.ndarray, tail: np.ndarray) -> int:
    length, lanes = columns.shape
    reg = np.zeros(lanes, dtype=np.uint32)
    reg[0] = MASK32
    shift = np.uint32(8)
    for row in columns:
        reg = TABLE[(reg ^ row) & 0xFF] ^ (reg >> shift)
    state = int(reg[0])
    if lanes > 1:
        op = zeros_operator(length)
        for r in reg[1:].tolist():
            state = _gf2_times(op, state) ^ r
    return _serial(state, tail) ^ MASK32


def run(inp: Crc32Input, rec=None) -> Crc32Output:
    rec = recorder_or_null(rec)
    columns, tail = rec.time_region(Region.TRANSFER_IN, pack_lanes,
                                    np.ascontiguousarray(inp.message, dtype=np.uint8))
    value = rec.time_region(Region.COMPUTE, crc_lanes, columns, tail)
    return rec.time_region(Region.TRANSFER_OUT, Crc32Output, int(value))


def bitwise_crc32(data) -> int:
    """Bit-serial reference: one shift per message bit."""
    crc = MASK32
    for byte in bytes(data):
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ (POLY_REFLECTED if crc & 1 else 0)
    return crc ^ MASK32


def verify(inp: Crc32Input, out: Crc32Output) -> Verification:
    data = np.ascontiguousarray(inp.message, dtype=np.uint8).tobytes()
    if len(data) <= BITWISE_ORACLE_MAX_BYTES:
        expected, oracle = bitwise_crc32(data), "bitwise"
    else:
        expected, oracle = zlib.crc32(data) & MASK32, "zlib"
    ok = out.checksum == expected
    return Verification(ok, 0.0 if ok else 1.0,
                        f"crc {out.checksum:#010x}, {oracle} reference {expected:#010x}")
