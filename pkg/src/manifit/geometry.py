"""Point-cloud container, fixed-radius neighbor queries, and the smooth
compactly supported weight family shared by all field constructions.

The exhaustive scan in :func:`radius_neighbors` is the reference neighbor
query. :class:`NeighborIndex` accelerates it with a k-d tree but decides
membership with the same distance computation, so the two paths return
identical results.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionError, EmptyNeighborhood, InvalidInput


class PointCloud:
    """Immutable ordered set of points in R^D.

    Parameters
    ----------
    points : array-like, shape (N, D)
        One row per point. Copied into a read-only float64 array. An empty
        cloud (N = 0) is a valid query container; operations that need data
        samples enforce nonemptiness themselves.
    """

    __slots__ = ("points",)

    def __init__(self, points):
        try:
            arr = np.array(points, dtype=float, copy=True)
        except (ValueError, TypeError) as exc:
            raise DimensionError(f"points must form an (N, D) array: {exc}") from exc
        if arr.ndim != 2:
            raise DimensionError(f"expected an (N, D) array, got shape {arr.shape}")
        if arr.shape[1] < 1:
            raise DimensionError("ambient dimension must be >= 1")
        if arr.size and not np.isfinite(arr).all():
            raise InvalidInput("point coordinates must be finite")
        arr.setflags(write=False)
        self.points = arr

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def subset(self, indices) -> "PointCloud":
        return PointCloud(self.points[np.asarray(indices, dtype=int)])

    def __repr__(self) -> str:
        return f"PointCloud(n={self.n}, dim={self.dim})"

    # read-only arrays survive pickling as writable copies; re-freeze
    def __reduce__(self):
        return (PointCloud, (np.asarray(self.points),))


@dataclass(frozen=True)
class NeighborSet:
    """Samples inside the closed ball of radius ``radius`` around ``center``.

    ``indices`` are ascending sample indices; ``distances`` match them.
    """

    center: np.ndarray
    radius: float
    indices: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.indices.shape[0] == 0


@dataclass(frozen=True)
class WeightProfile:
    """Normalized weights (1 - ||x - x_i||^2 / r^2)^beta over a neighbor set.

    ``raw`` holds the unnormalized values, ``total`` their sum, and
    ``normalized`` the convex coefficients (summing to one).
    """

    beta: int
    raw: np.ndarray
    total: float
    normalized: np.ndarray


def _check_query(x, r: float, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != dim:
        raise DimensionError(
            f"query has shape {x.shape}, expected a vector of dimension {dim}"
        )
    if not np.isfinite(x).all():
        raise InvalidInput("query point must be finite")
    if not (np.isfinite(r) and r > 0):
        raise InvalidInput("radius must be positive and finite")
    return x


def _distances_to(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    diffs = points - x
    return np.sqrt(np.einsum("ij,ij->i", diffs, diffs))


def radius_neighbors(x, r: float, cloud: PointCloud) -> NeighborSet:
    """Exhaustive closed-ball query: every sample with ||x_i - x||_2 <= r.

    This is the reference implementation all accelerated paths must match
    exactly.
    """
    x = _check_query(x, float(r), cloud.dim)
    dist = _distances_to(cloud.points, x)
    keep = np.flatnonzero(dist <= r)
    return NeighborSet(center=x, radius=float(r), indices=keep, distances=dist[keep])


class NeighborIndex:
    """k-d tree accelerated closed-ball queries over a fixed cloud.

    The tree only prefilters candidates (with a small relative slack on the
    radius); membership is then decided by the same distance computation as
    :func:`radius_neighbors`, so both paths return identical neighbor sets.
    """

    _SLACK = 1.0 + 1e-9

    def __init__(self, cloud: PointCloud):
        self.cloud = cloud
        self._tree = cKDTree(cloud.points) if cloud.n > 0 else None

    def query(self, x, r: float) -> NeighborSet:
        x = _check_query(x, float(r), self.cloud.dim)
        if self._tree is None:
            empty = np.empty(0, dtype=int)
            return NeighborSet(center=x, radius=float(r), indices=empty,
                               distances=np.empty(0))
        cand = self._tree.query_ball_point(x, r * self._SLACK)
        cand = np.sort(np.asarray(cand, dtype=int))
        dist = _distances_to(self.cloud.points[cand], x)
        keep = dist <= r
        return NeighborSet(center=x, radius=float(r), indices=cand[keep],
                           distances=dist[keep])


def compute_weights(x, nbrs: NeighborSet, beta: int) -> WeightProfile:
    """Weights (1 - ||x - x_i||^2 / r^2)^beta for the members of ``nbrs``.

    A neighbor exactly on the support sphere contributes exactly zero. If
    every neighbor does, normalization is undefined and EmptyNeighborhood is
    raised; callers decide whether that aborts or marks the point
    unprocessable.
    """
    if int(beta) != beta or beta < 2:
        raise InvalidInput("beta must be an integer >= 2")
    x = np.asarray(x, dtype=float)
    if x.shape != nbrs.center.shape or not np.array_equal(x, nbrs.center):
        raise InvalidInput("neighbor set was built for a different query point")
    if nbrs.is_empty:
        raise EmptyNeighborhood("no samples within the query radius")
    q = (nbrs.distances * nbrs.distances) / (nbrs.radius * nbrs.radius)
    raw = np.maximum(1.0 - q, 0.0) ** int(beta)
    total = float(raw.sum())
    if total <= 0.0:
        raise EmptyNeighborhood("all neighbors sit exactly on the support boundary")
    return WeightProfile(beta=int(beta), raw=raw, total=total, normalized=raw / total)
