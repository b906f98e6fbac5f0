"""Bias-field constructions whose zero sets (or ridge) define fitted manifolds.

Three constructions share the same local machinery:

* ``ours``  -- residual field f(x) = Pi_x (x - sum_i alpha_i(x) x_i), where
  Pi_x is the weight-averaged normal projector at x.
* ``cf18``  -- successive-projection field over a greedy covering net,
  f(x) = Pi_x sum_i alpha_i(x) Pi_{p_i} (x - p_i).
* ``km17``  -- scalar weighted square-distance field to the per-sample
  tangent planes, whose ridge is the fitted manifold; its descent direction
  is the gradient projected onto the top Hessian eigenspace.

A :class:`FittedField` is immutable after construction: per-sample
projectors are computed once over the full cloud and reused by every query.
"""
from __future__ import annotations

import warnings
from enum import Enum

import numpy as np

from .errors import (
    AllWeightsZero,
    DegenerateSpectrum,
    EmptyNeighborhood,
    InvalidInput,
    RankDeficientNeighborhood,
    StencilEscape,
)
from .geometry import NeighborIndex, PointCloud
from .tangent import (
    NormalProjector,
    TIE_GAP,
    averaged_projector_matrix,
    local_normal_projector,
    top_block_projector,
)


class FieldKind(str, Enum):
    OURS = "ours"
    CF18 = "cf18"
    KM17 = "km17"


def bump(t):
    """C^2 cutoff: 1 for t <= 1/4, 0 for t >= 1, monotone in between.

    The interior is the quintic smoothstep in s = (t - 1/4) / (3/4), which is
    twice continuously differentiable across both seams. Accepts scalars or
    arrays; scalars come back as floats.
    """
    arr = np.asarray(t, dtype=float)
    if not np.isfinite(arr).all():
        raise InvalidInput("bump argument must be finite")
    s = np.clip((arr - 0.25) / 0.75, 0.0, 1.0)
    val = 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    if arr.ndim == 0:
        return float(val)
    return val


def epsilon_net(cloud: PointCloud, eps: float) -> np.ndarray:
    """Greedy covering subset of the cloud.

    Scans points in index order and keeps a point iff it lies farther than
    eps from every point kept so far, so every cloud point ends up within
    eps of some kept point. Deterministic; returns kept indices ascending.
    """
    if not (np.isfinite(eps) and eps > 0):
        raise InvalidInput("eps must be positive and finite")
    pts = cloud.points
    if cloud.n == 0:
        return np.empty(0, dtype=int)
    kept = [0]
    # distance from every point to its nearest kept point so far
    mindist = np.sqrt(np.einsum("ij,ij->i", pts - pts[0], pts - pts[0]))
    for i in range(1, cloud.n):
        if mindist[i] > eps:
            kept.append(i)
            diffs = pts - pts[i]
            mindist = np.minimum(mindist, np.sqrt(np.einsum("ij,ij->i", diffs, diffs)))
    return np.asarray(kept, dtype=int)


class FittedField:
    """Immutable bundle defining one bias field over a noisy sample cloud.

    Parameters
    ----------
    cloud : PointCloud
        The observed samples (nonempty).
    kind : FieldKind or str
        Which construction this field uses.
    r : float
        Neighborhood radius (bandwidth).
    d : int
        Intrinsic dimension, 1 <= d < D.
    beta : int, optional
        Weight exponent for the ``ours``/``cf18`` weights; defaults to d+2.
        Ignored by ``km17``, whose weights come from the bump cutoff.
    net_scale : float
        For ``cf18``: the covering net radius is net_scale * r^2 / d.
    """

    def __init__(self, cloud: PointCloud, kind, r: float, d: int,
                 beta: int | None = None, net_scale: float = 1.0):
        kind = FieldKind(kind)
        if cloud.n < 1:
            raise InvalidInput("fitting requires at least one sample")
        if not (np.isfinite(r) and r > 0):
            raise InvalidInput("bandwidth r must be positive and finite")
        if not 1 <= d < cloud.dim:
            raise InvalidInput(
                f"intrinsic dimension must satisfy 1 <= d < D, got d={d}, D={cloud.dim}"
            )
        if beta is None:
            beta = d + 2
        if int(beta) != beta or beta < 2:
            raise InvalidInput("beta must be an integer >= 2")
        if not (np.isfinite(net_scale) and net_scale > 0):
            raise InvalidInput("net_scale must be positive and finite")

        self.kind = kind
        self.cloud = cloud
        self.r = float(r)
        self.d = int(d)
        self.beta = int(beta)
        self.net_scale = float(net_scale)

        if kind is FieldKind.CF18:
            self.net_indices = epsilon_net(cloud, self.net_scale * self.r ** 2 / self.d)
            support_points = cloud.points[self.net_indices]
        else:
            self.net_indices = None
            support_points = cloud.points
        self._support = np.array(support_points, copy=True)
        self._support.setflags(write=False)
        self._index = NeighborIndex(PointCloud(self._support))
        self._build_projector_cache()

    # -- construction ------------------------------------------------------

    def _build_projector_cache(self):
        """Local-PCA projector at every support point, over the full cloud."""
        full_index = (self._index if self.net_indices is None
                      else NeighborIndex(self.cloud))
        D = self.cloud.dim
        m = self._support.shape[0]
        stack = np.empty((m, D, D))
        cache: dict[int, NormalProjector] = {}
        deficient = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # summarized below
            for i in range(m):
                nbrs = full_index.query(self._support[i], self.r)
                proj = local_normal_projector(self._support[i], self.cloud,
                                              self.r, self.d, nbrs=nbrs)
                cache[i] = proj
                stack[i] = proj.matrix
                if proj.rank_deficient:
                    deficient += 1
        if deficient:
            warnings.warn(
                f"{deficient} of {m} support points had fewer than d+1 neighbors",
                category=RankDeficientNeighborhood, stacklevel=3,
            )
        stack.setflags(write=False)
        self._proj_stack = stack
        self.projector_cache = cache

    # -- shared query plumbing --------------------------------------------

    def _local_weights(self, x: np.ndarray):
        """(support row indices, normalized weights) at x, or EmptyNeighborhood."""
        nbrs = self._index.query(x, self.r)
        if nbrs.is_empty:
            raise EmptyNeighborhood("no samples within the query radius")
        q = (nbrs.distances * nbrs.distances) / (self.r * self.r)
        raw = np.maximum(1.0 - q, 0.0) ** self.beta
        total = raw.sum()
        if total <= 0.0:
            raise EmptyNeighborhood("all neighbors sit exactly on the support boundary")
        return nbrs.indices, raw / total

    def normal_projector(self, x) -> NormalProjector:
        """Weight-averaged normal projector at x (diagnostic view)."""
        x = np.asarray(x, dtype=float)
        idx, alpha = self._local_weights(x)
        matrix, gap = averaged_projector_matrix(alpha, self._proj_stack[idx], self.d)
        if gap < TIE_GAP:
            warnings.warn("eigenvalue gap at the projector cut is below resolution",
                          DegenerateSpectrum, stacklevel=2)
        return NormalProjector(matrix=matrix, rank=self.cloud.dim - self.d, eigengap=gap)

    # -- field evaluations --------------------------------------------------

    def bias(self, x) -> np.ndarray:
        """Vector field value at x (``ours``/``cf18`` only).

        The returned vector lies in the range of the averaged projector at x.
        """
        if self.kind is FieldKind.KM17:
            raise InvalidInput("km17 defines a scalar field; use asdf()")
        x = np.asarray(x, dtype=float)
        idx, alpha = self._local_weights(x)
        pi_x, gap = averaged_projector_matrix(alpha, self._proj_stack[idx], self.d)
        if gap < TIE_GAP:
            warnings.warn("eigenvalue gap at the projector cut is below resolution",
                          DegenerateSpectrum, stacklevel=2)
        if self.kind is FieldKind.OURS:
            mean = alpha @ self._support[idx]
            return pi_x @ (x - mean)
        resid = x - self._support[idx]
        per = np.einsum("ijk,ik->ij", self._proj_stack[idx], resid)
        return pi_x @ (alpha @ per)

    def asdf(self, x) -> float:
        """Weighted average square distance to the local tangent planes
        (``km17`` only); nonnegative."""
        if self.kind is not FieldKind.KM17:
            raise InvalidInput("asdf is defined for km17 fields only")
        x = np.asarray(x, dtype=float)
        nbrs = self._index.query(x, self.r)
        if nbrs.is_empty:
            raise AllWeightsZero("no samples within the query radius")
        idx = nbrs.indices
        resid = x - self._support[idx]
        per = np.einsum("ijk,ik->ij", self._proj_stack[idx], resid)
        sq = np.einsum("ij,ij->i", per, per)
        raw = bump(np.sqrt(sq) / (2.0 * self.r))
        total = raw.sum()
        if total <= 0.0:
            raise AllWeightsZero("no tangent plane carries positive weight at x")
        return float((raw @ sq) / total)

    def scalar_objective(self, x) -> float:
        """Objective the projection solver descends: ||f||^2 or the asdf value."""
        if self.kind is FieldKind.KM17:
            return self.asdf(x)
        v = self.bias(x)
        return float(v @ v)


# -- spec-level operations ---------------------------------------------------


def _require_kind(field: FittedField, kind: FieldKind, op: str):
    if field.kind is not kind:
        raise InvalidInput(f"{op} requires a {kind.value} field, got {field.kind.value}")


def field_ours(x, field: FittedField) -> np.ndarray:
    """Residual bias field: Pi_x (x - weighted neighbor mean)."""
    _require_kind(field, FieldKind.OURS, "field_ours")
    return field.bias(x)


def field_cf18(x, field: FittedField) -> np.ndarray:
    """Successive-projection bias field over the covering net."""
    _require_kind(field, FieldKind.CF18, "field_cf18")
    return field.bias(x)


def asdf_km17(x, field: FittedField) -> float:
    """Weighted average square distance to local tangent planes."""
    _require_kind(field, FieldKind.KM17, "asdf_km17")
    return field.asdf(x)


def ridge_direction(fn, x, d: int, h: float,
                    value_at_x: float | None = None) -> np.ndarray:
    """Finite-difference ridge direction of a scalar field.

    Central differences with step h per coordinate give the gradient and the
    Hessian; the returned vector is the gradient projected onto the span of
    the top D-d Hessian eigenvectors (the negative of the descent
    direction). Any failed evaluation in the stencil raises StencilEscape.
    ``value_at_x`` lets callers that already evaluated the field at x skip
    the center evaluation.
    """
    x = np.asarray(x, dtype=float)
    if not (np.isfinite(h) and h > 0):
        raise InvalidInput("finite-difference step must be positive")
    D = x.shape[0]

    def eval_at(p):
        try:
            return fn(p)
        except (AllWeightsZero, EmptyNeighborhood) as exc:
            raise StencilEscape(f"stencil point left the field domain: {exc}") from exc

    f0 = eval_at(x) if value_at_x is None else float(value_at_x)
    plus = np.empty(D)
    minus = np.empty(D)
    for j in range(D):
        step = np.zeros(D)
        step[j] = h
        plus[j] = eval_at(x + step)
        minus[j] = eval_at(x - step)
    grad = (plus - minus) / (2.0 * h)
    hess = np.empty((D, D))
    np.fill_diagonal(hess, (plus - 2.0 * f0 + minus) / (h * h))
    for j in range(D):
        for k in range(j + 1, D):
            step_j = np.zeros(D)
            step_j[j] = h
            step_k = np.zeros(D)
            step_k[k] = h
            mixed = (
                eval_at(x + step_j + step_k)
                - eval_at(x + step_j - step_k)
                - eval_at(x - step_j + step_k)
                + eval_at(x - step_j - step_k)
            ) / (4.0 * h * h)
            hess[j, k] = mixed
            hess[k, j] = mixed
    proj, _ = top_block_projector(hess, D - d)
    return proj @ grad


def km17_ridge_direction(x, field: FittedField, h: float | None = None) -> np.ndarray:
    """Ridge direction of the km17 scalar field at x (see ridge_direction)."""
    _require_kind(field, FieldKind.KM17, "km17_ridge_direction")
    if h is None:
        h = 1e-4 * field.r
    return ridge_direction(field.asdf, x, field.d, h)
