"""Spectral methods: iterative radix-2 decimation-in-time FFT."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NotPowerOfTwo
from ..model import Region
from ._rng import stream
from .base import Verification, recorder_or_null

ROUND_TRIP_TOL = 1e-4
PARSEVAL_TOL = 1e-6
DFT_TOL = 1e-5
NAIVE_DFT_MAX_N = 4096


@dataclass(frozen=True, eq=False)
class FftInput:
    signal: np.ndarray


@dataclass(frozen=True, eq=False)
class FftOutput:
    spectrum: np.ndarray


def generate(params: dict, seed: int) -> FftInput:
    n = int(params["n"])
    rng = stream("fft", seed)
    sig = np.empty(n, dtype=np.complex64)
    sig.real = rng.uniform(n)
    sig.imag = rng.uniform(n)
    return FftInput(sig)


def _check_length(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise NotPowerOfTwo(f"fft length must be a power of two >= 2, got {n}")


def bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def transform_in_place(buf: np.ndarray, out: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Radix-2 DIT transform of ``buf`` into ``out``; the two buffers ping-pong.

    Returns whichever buffer holds the result.
    """
    n = buf.size
    _check_length(n)
    np.take(buf, bit_reverse_permutation(n), out=out)
    src, dst = out, buf
    sign = 1.0 if inverse else -1.0
    half = 1
    while half < n:
        m = 2 * half
        tw = np.exp(sign * 2j * np.pi * np.arange(half) / m).astype(src.dtype)
        blocks = src.reshape(-1, m)
        lo, hi = blocks[:, :half], blocks[:, half:]
        t = hi * tw
        d = dst.reshape(-1, m)
        np.add(lo, t, out=d[:, :half])
        np.subtract(lo, t, out=d[:, half:])
        src, dst = dst, src
        half = m
    return src


def fft(signal) -> np.ndarray:
    """Forward transform of a complex64 copy of ``signal``."""
    a = np.array(signal, dtype=np.complex64)
    return transform_in_place(a, np.empty_like(a)).copy()


def ifft(spectrum) -> np.ndarray:
    a = np.array(spectrum, dtype=np.complex64)
    res = transform_in_place(a, np.empty_like(a), inverse=True)
    return res / np.float32(a.size)


def run(inp: FftInput, rec=None) -> FftOutput:
    _check_length(inp.signal.size)
    rec = recorder_or_null(rec)
    buf: dict = {}

    def setup():
        buf["a"] = np.empty(inp.signal.size, dtype=np.complex64)
        buf["b"] = np.empty_like(buf["a"])

    def compute():
        buf["result"] = transform_in_place(buf["a"], buf["b"])

    rec.time_region(Region.SETUP, setup)
    rec.time_region(Region.TRANSFER_IN, np.copyto, buf["a"], inp.signal)
    rec.time_region(Region.COMPUTE, compute)
    spectrum = rec.time_region(Region.TRANSFER_OUT, np.array, buf["result"], copy=True)
    rec.time_region(Region.TEARDOWN, buf.clear)
    return FftOutput(spectrum)


def naive_dft(signal) -> np.ndarray:
    """O(n^2) DFT in complex128, used as an oracle."""
    x = np.asarray(signal, dtype=np.complex128)
    n = x.size
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def verify(inp: FftInput, out: FftOutput) -> Verification:
    x = inp.signal.astype(np.complex128)
    X = out.spectrum.astype(np.complex128)
    n = x.size
    back = ifft(out.spectrum).astype(np.complex128)
    rt_err = float(np.max(np.abs(back - x)))
    e_time = float(np.sum(np.abs(x) ** 2))
    e_freq = float(np.sum(np.abs(X) ** 2)) / n
    parseval = abs(e_freq - e_time) / e_time if e_time else abs(e_freq)
    detail = f"round trip {rt_err:.3g}, Parseval {parseval:.3g}"
    ok = rt_err <= ROUND_TRIP_TOL and parseval <= PARSEVAL_TOL
    worst = max(rt_err, parseval)
    if n <= NAIVE_DFT_MAX_N:
        ref = naive_dft(x)
        scale = max(float(np.max(np.abs(ref))), 1e-30)
        dft_err = float(np.max(np.abs(X - ref))) / scale
        detail += f", vs naive DFT {dft_err:.3g}"
        ok = ok and dft_err <= DFT_TOL
        worst = max(worst, dft_err)
    return Verification(bool(ok), worst, detail)
