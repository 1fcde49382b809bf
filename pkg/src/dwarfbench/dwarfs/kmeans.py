"""MapReduce: Lloyd's k-means.

Map step assigns each point to its nearest centroid (ties go to the lowest
index); reduce step averages each cluster. Iteration stops when an
assignment pass changes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import KTooLarge
from ..model import Region
from ..sizing import KMEANS_DIMS, KMEANS_K
from ._rng import stream
from .base import Verification, recorder_or_null

TOLERANCE = 1e-5
DEFAULT_MAX_ITERS = 100
CLUSTER_SPREAD = 1.0


@dataclass(frozen=True, eq=False)
class KmeansInput:
    points: np.ndarray
    k: int = KMEANS_K
    max_iters: int = DEFAULT_MAX_ITERS


@dataclass(frozen=True, eq=False)
class KmeansOutput:
    centroids: np.ndarray
    assignments: np.ndarray
    iterations: int
    converged: bool


def generate(params: dict, seed: int, k: int = KMEANS_K, dims: int = KMEANS_DIMS) -> KmeansInput:
    """Points scattered around k random centres; point i belongs to blob i mod k."""
    n = int(params["points"])
    rng = stream("kmeans", seed)
    centres = rng.uniform(k * dims).reshape(k, dims)
    noise = rng.uniform(n * dims).reshape(n, dims) - np.float32(0.5)
    pts = centres[np.arange(n) % k] + np.float32(CLUSTER_SPREAD) * noise
    return KmeansInput(pts.astype(np.float32), k)


def _assign(points64: np.ndarray, sq_norms: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    c = centroids.astype(np.float64)
    d = sq_norms[:, None] - 2.0 * (points64 @ c.T) + np.einsum("ij,ij->i", c, c)[None, :]
    return np.argmin(d, axis=1)


def _means(points64: np.ndarray, assign: np.ndarray, old: np.ndarray) -> np.ndarray:
    k, dims = old.shape
    counts = np.bincount(assign, minlength=k)
    sums = np.zeros((k, dims))
    for d in range(dims):
        sums[:, d] = np.bincount(assign, weights=points64[:, d], minlength=k)
    out = old.copy()
    filled = counts > 0
    out[filled] = (sums[filled] / counts[filled, None]).astype(old.dtype)
    return out


def lloyd(buf: dict, k: int, max_iters: int) -> None:
    pts = buf["points"]
    sq = np.einsum("ij,ij->i", pts, pts)
    centroids = buf["centroids"]
    assign = _assign(pts, sq, centroids)
    iters, converged = 0, False
    while iters < max_iters:
        iters += 1
        centroids = _means(pts, assign, centroids)
        new_assign = _assign(pts, sq, centroids)
        if np.array_equal(new_assign, assign):
            converged = True
            break
        assign = new_assign
    buf["centroids"] = centroids
    buf["assign"] = assign
    buf["iterations"] = iters
    buf["converged"] = converged


def run(inp: KmeansInput, rec=None) -> KmeansOutput:
    n = inp.points.shape[0]
    if inp.k < 1 or inp.k > n:
        raise KTooLarge(f"k={inp.k} must be in [1, {n}]")
    rec = recorder_or_null(rec)
    buf: dict = {}

    def setup():
        buf["centroids"] = np.empty((inp.k, inp.points.shape[1]), dtype=np.float32)

    def transfer_in():
        buf["points"] = inp.points.astype(np.float64)
        buf["centroids"][:] = inp.points[:inp.k]

    def transfer_out():
        return KmeansOutput(buf["centroids"].copy(), buf["assign"].astype(np.int32),
                            buf["iterations"], buf["converged"])

    rec.time_region(Region.SETUP, setup)
    rec.time_region(Region.TRANSFER_IN, transfer_in)
    rec.time_region(Region.COMPUTE, lloyd, buf, inp.k, inp.max_iters)
    out = rec.time_region(Region.TRANSFER_OUT, transfer_out)
    rec.time_region(Region.TEARDOWN, buf.clear)
    return out


def sse(points, centroids, assignments) -> float:
    diff = np.asarray(points, dtype=np.float64) - np.asarray(centroids, dtype=np.float64)[assignments]
    return float(np.sum(diff * diff))


def verify(inp: KmeansInput, out: KmeansOutput) -> Verification:
    """Nearest-centroid and centroid-is-mean conditions, within 1e-5."""
    pts = inp.points.astype(np.float64)
    cen = out.centroids.astype(np.float64)
    # direct squared distances, one centroid at a time
    dist = np.stack([np.sum((pts - c) ** 2, axis=1) for c in cen], axis=1)
    assigned = dist[np.arange(len(pts)), out.assignments]
    nearest_gap = float(np.max(assigned - dist.min(axis=1))) if len(pts) else 0.0
    mean_err = 0.0
    for j in range(len(cen)):
        members = pts[out.assignments == j]
        if len(members):
            mean_err = max(mean_err, float(np.max(np.abs(members.mean(axis=0) - cen[j]))))
    ok = nearest_gap <= TOLERANCE and mean_err <= TOLERANCE
    return Verification(ok, max(nearest_gap, mean_err),
                        f"nearest-centroid slack {nearest_gap:.3g}, centroid/mean gap {mean_err:.3g}, "
                        f"{out.iterations} iterations, converged={out.converged}")
