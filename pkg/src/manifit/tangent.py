"""Local PCA estimates of normal-space projectors.

At a sample point z the projector comes from the eigendecomposition of the
local second-moment matrix about z itself (not the neighborhood mean). At an
arbitrary query point x the per-sample projectors are averaged with the
smooth weights and the top eigenspace of the average is taken. Only block
projectors V V^T are ever formed or compared, never individual eigenvectors,
which removes all sign and intra-block basis ambiguity.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrum,
    EmptyNeighborhood,
    InvalidInput,
    NumericalError,
    RankDeficientNeighborhood,
)
from .geometry import NeighborSet, PointCloud, compute_weights, radius_neighbors

# eigenvalue gaps below this cannot split eigenspaces reliably
TIE_GAP = 1e-12


@dataclass(frozen=True)
class NormalProjector:
    """Symmetric idempotent matrix of rank D-d projecting onto an estimated
    normal space.

    ``eigengap`` records the eigenvalue gap of the source matrix at the cut
    (diagnostic only). ``rank_deficient`` flags fits from fewer than d+1
    neighbors; the projector is still produced.
    """

    matrix: np.ndarray
    rank: int
    eigengap: float
    rank_deficient: bool = False


def _descending_eigh(matrix: np.ndarray):
    try:
        w, v = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return w[::-1], v[:, ::-1]


def top_block_projector(matrix: np.ndarray, k: int):
    """Projector onto the span of the top-k eigenvectors of a symmetric
    matrix, and the eigenvalue gap just below the block.

    Returns ``(projector, gap)`` where gap is +inf when k equals the full
    dimension.
    """
    w, v = _descending_eigh(matrix)
    top = v[:, :k]
    proj = top @ top.T
    proj = 0.5 * (proj + proj.T)
    gap = float(w[k - 1] - w[k]) if k < matrix.shape[0] else float("inf")
    return proj, gap


def second_moment(z: np.ndarray, neighbor_points: np.ndarray) -> np.ndarray:
    """(1/k) sum_i (z_i - z)(z_i - z)^T over the given neighbor rows."""
    diffs = neighbor_points - z
    return diffs.T @ diffs / diffs.shape[0]


def local_normal_projector(z, cloud: PointCloud, r: float, d: int,
                           nbrs: NeighborSet | None = None) -> NormalProjector:
    """Normal projector at z from local PCA of the samples around z.

    Eigendecomposes the second moment of the neighbors about z and removes
    the span of the top-d eigenvectors: Pi_z = I - V V^T. The recorded
    eigengap is lambda_d - lambda_{d+1} of the moment matrix.

    Raises EmptyNeighborhood when the ball is empty; warns (and flags the
    result) when fewer than d+1 neighbors are available.
    """
    D = cloud.dim
    if not 1 <= d < D:
        raise InvalidInput(f"intrinsic dimension must satisfy 1 <= d < D, got d={d}, D={D}")
    z = np.asarray(z, dtype=float)
    if nbrs is None:
        nbrs = radius_neighbors(z, r, cloud)
    if nbrs.is_empty:
        raise EmptyNeighborhood("no samples within the query radius")
    rank_deficient = len(nbrs) < d + 1
    if rank_deficient:
        warnings.warn(
            f"{len(nbrs)} neighbors for a {d}-dimensional tangent fit",
            RankDeficientNeighborhood, stacklevel=2,
        )
    moment = second_moment(z, cloud.points[nbrs.indices])
    tangent_proj, gap = top_block_projector(moment, d)
    matrix = np.eye(D) - tangent_proj
    matrix = 0.5 * (matrix + matrix.T)
    return NormalProjector(matrix=matrix, rank=D - d, eigengap=gap,
                           rank_deficient=rank_deficient)


def combine_projectors(weights: np.ndarray, projectors: np.ndarray) -> np.ndarray:
    """Convex combination A = sum_i w_i P_i of stacked projectors.

    A is symmetric with eigenvalues in [0, 1]; its top eigenspace estimates
    the common normal space.
    """
    return np.einsum("i,ijk->jk", weights, projectors)


def averaged_projector_matrix(weights: np.ndarray, projectors: np.ndarray,
                              d: int):
    """Top-(D-d) block projector of the combined matrix, plus the gap at the
    cut. Shared by the standalone operation below and the fitted-field fast
    path."""
    a_x = combine_projectors(weights, projectors)
    return top_block_projector(a_x, a_x.shape[0] - d)


def averaged_normal_projector(x, cloud: PointCloud, r: float, beta: int, d: int,
                              projector_cache: dict) -> NormalProjector:
    """Weight-averaged normal projector at an arbitrary point x.

    Forms A_x = sum_i alpha_i(x) Pi_{x_i} over the neighbors of x and returns
    the projector onto the span of its top D-d eigenvectors.
    ``projector_cache`` maps sample index -> NormalProjector; missing entries
    are computed by local PCA at that sample and stored.
    """
    D = cloud.dim
    if not 1 <= d < D:
        raise InvalidInput(f"intrinsic dimension must satisfy 1 <= d < D, got d={d}, D={D}")
    nbrs = radius_neighbors(x, r, cloud)
    if nbrs.is_empty:
        raise EmptyNeighborhood("no samples within the query radius")
    weights = compute_weights(nbrs.center, nbrs, beta)
    stacked = np.empty((len(nbrs), D, D))
    for row, idx in enumerate(nbrs.indices):
        key = int(idx)
        entry = projector_cache.get(key)
        if entry is None:
            entry = local_normal_projector(cloud.points[key], cloud, r, d)
            projector_cache[key] = entry
        stacked[row] = entry.matrix
    matrix, gap = averaged_projector_matrix(weights.normalized, stacked, d)
    if gap < TIE_GAP:
        warnings.warn(
            "eigenvalue gap at the projector cut is below resolution",
            DegenerateSpectrum, stacklevel=2,
        )
    return NormalProjector(matrix=matrix, rank=D - d, eigengap=gap)
