"""Graph traversal: level-synchronous breadth-first search over a CSR graph."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import KernelInputError, SourceOutOfRange
from ..model import Region
from ..sizing import BFS_EDGES_PER_NODE
from ._rng import stream
from .base import Verification, recorder_or_null

UNREACHED = -1


@dataclass(frozen=True, eq=False)
class BfsInput:
    offsets: np.ndarray
    targets: np.ndarray
    source: int = 0

    @property
    def nodes(self) -> int:
        return len(self.offsets) - 1


@dataclass(frozen=True, eq=False)
class BfsOutput:
    distance: np.ndarray
    levels: int


def from_edges(nodes: int, edges, source: int = 0, undirected: bool = False) -> BfsInput:
    edges = list(edges)
    if undirected:
        edges = edges + [(v, u) for u, v in edges]
    src = np.array([u for u, _ in edges], dtype=np.int64)
    dst = np.array([v for _, v in edges], dtype=np.int32)
    order = np.argsort(src, kind="stable")
    offsets = np.zeros(nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=nodes), out=offsets[1:])
    return BfsInput(offsets, dst[order], source)


def generate(params: dict, seed: int) -> BfsInput:
    """Random directed multigraph with uniformly drawn endpoints; source 0."""
    nodes = int(params["nodes"])
    edges = int(params.get("edges", BFS_EDGES_PER_NODE * nodes))
    rng = stream("bfs", seed)
    src = np.sort(rng.integers(edges, nodes))
    dst = rng.integers(edges, nodes).astype(np.int32)
    offsets = np.zeros(nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=nodes), out=offsets[1:])
    return BfsInput(offsets, dst, 0)


def traverse(dist: np.ndarray, offsets: np.ndarray, targets: np.ndarray, source: int) -> int:
    """Fill ``dist`` level by level; returns the number of levels expanded."""
    dist.fill(UNREACHED)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        starts = offsets[frontier]
        counts = offsets[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        # gather every out-edge of the frontier in one index vector
        base = np.repeat(starts - np.cumsum(counts) + counts, counts)
        nbrs = targets[base + np.arange(total)]
        nbrs = np.unique(nbrs[dist[nbrs] == UNREACHED])
        if nbrs.size == 0:
            break
        level += 1
        dist[nbrs] = level
        frontier = nbrs.astype(np.int64)
    return level


def run(inp: BfsInput, rec=None) -> BfsOutput:
    n = inp.nodes
    if n < 1:
        raise KernelInputError("graph needs at least one node")
    if not 0 <= inp.source < n:
        raise SourceOutOfRange(f"source {inp.source} not in [0, {n})")
    rec = recorder_or_null(rec)
    buf: dict = {}
    buf["dist"] = rec.time_region(Region.SETUP, np.empty, n, dtype=np.int32)

    def transfer_in():
        buf["offsets"] = np.ascontiguousarray(inp.offsets, dtype=np.int64)
        buf["targets"] = np.ascontiguousarray(inp.targets, dtype=np.int32)

    rec.time_region(Region.TRANSFER_IN, transfer_in)
    levels = rec.time_region(Region.COMPUTE, traverse, buf["dist"], buf["offsets"],
                             buf["targets"], inp.source)
    dist = rec.time_region(Region.TRANSFER_OUT, np.array, buf["dist"], copy=True)
    rec.time_region(Region.TEARDOWN, buf.clear)
    return BfsOutput(dist, levels)


def reference_bfs(offsets, targets, source: int) -> list[int]:
    """Textbook queue BFS over Python lists."""
    off = offsets.tolist()
    tgt = targets.tolist()
    dist = [UNREACHED] * (len(off) - 1)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in tgt[off[u]:off[u + 1]]:
            if dist[v] == UNREACHED:
                dist[v] = du
                queue.append(v)
    return dist


def verify(inp: BfsInput, out: BfsOutput) -> Verification:
    ref = np.asarray(reference_bfs(inp.offsets, inp.targets, inp.source), dtype=np.int32)
    mismatches = int(np.count_nonzero(ref != out.distance)) if ref.shape == out.distance.shape else -1
    ok = mismatches == 0
    return Verification(ok, float(mismatches != 0),
                        f"{mismatches} distance mismatches over {ref.size} nodes")
