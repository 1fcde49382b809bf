"""Instrumented dwarf kernels.

Every kernel module exposes ``generate(params, seed)``, ``run(input, rec=None)``
and ``verify(input, output)``. ``run`` times each of the benchmark's regions
through the recorder it is given.
"""

from __future__ import annotations

from ..errors import UnknownBenchmark
from . import bfs, crc32, csr_spmv, fft, kmeans, lud, nw, srad
from .base import Kernel, Verification, output_digest

KERNELS: dict[str, Kernel] = {
    mod.__name__.rsplit(".", 1)[1]: Kernel(mod.__name__.rsplit(".", 1)[1],
                                           mod.generate, mod.run, mod.verify)
    for mod in (lud, csr_spmv, fft, nw, kmeans, crc32, bfs, srad)
}


def get_kernel(name: str) -> Kernel:
    try:
        return KERNELS[name]
    except KeyError:
        raise UnknownBenchmark(f"no kernel named {name!r}") from None


__all__ = ["KERNELS", "Kernel", "Verification", "get_kernel", "output_digest"]
