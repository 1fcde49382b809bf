from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple

import numpy as np

from ..timing import NULL_RECORDER


@dataclass(frozen=True)
class Verification:
    passed: bool
    max_error: float = 0.0
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


class Kernel(NamedTuple):
    name: str
    generate: Callable[[dict, int], Any]
    run: Callable[..., Any]
    verify: Callable[[Any, Any], Verification]


def recorder_or_null(rec):
    return NULL_RECORDER if rec is None else rec


def output_digest(output: Any) -> str:
    """SHA-256 prefix over every field of an output dataclass."""
    h = hashlib.sha256()
    for f in dataclasses.fields(output):
        value = getattr(output, f.name)
        h.update(f.name.encode())
        if isinstance(value, np.ndarray):
            h.update(str(value.dtype).encode())
            h.update(str(value.shape).encode())
            h.update(np.ascontiguousarray(value).tobytes())
        else:
            h.update(repr(value).encode())
    return h.hexdigest()[:16]
