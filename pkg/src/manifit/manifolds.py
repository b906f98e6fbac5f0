"""Synthetic ground-truth manifolds with exact distance oracles.

Circle, sphere, and torus are centered at the origin in canonical
orientation; general position is covered by the affine kind plus the
rigid-motion equivariance of the fitting pipeline. Samplers are uniform with
respect to surface measure and bit-reproducible per seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInput, TubeExceedsReach
from .geometry import PointCloud
from .rng import derive_seed, make_rng

_TWO_PI = 2.0 * math.pi


class ManifoldKind(str, Enum):
    CIRCLE = "circle"
    SPHERE = "sphere"
    TORUS = "torus"
    AFFINE = "affine"


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    """Analytic ground truth with known reach.

    CIRCLE: radius in R^2 (d=1, reach = radius). SPHERE: radius in R^3
    (d=2, reach = radius). TORUS: major radius R > minor radius a > 0 in R^3
    (d=2, reach = a). AFFINE: orthonormal basis columns plus offset
    (reach = +inf); an affine plane carries no uniform probability measure,
    so samples are drawn from the coefficient box [-extent, extent]^d and
    the patch half-width is part of the spec.
    """

    kind: ManifoldKind
    radius: float = 1.0
    major_radius: float = 2.0
    minor_radius: float = 0.5
    basis: np.ndarray | None = None
    offset: np.ndarray | None = None
    extent: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ManifoldKind(self.kind))
        if self.kind in (ManifoldKind.CIRCLE, ManifoldKind.SPHERE):
            if not (np.isfinite(self.radius) and self.radius > 0):
                raise InvalidInput("radius must be positive and finite")
        elif self.kind is ManifoldKind.TORUS:
            if not (np.isfinite(self.major_radius) and np.isfinite(self.minor_radius)
                    and self.major_radius > self.minor_radius > 0):
                raise InvalidInput("torus requires major_radius > minor_radius > 0")
        else:
            if self.basis is None:
                raise InvalidInput("affine kind requires a basis")
            basis = np.array(self.basis, dtype=float, copy=True)
            if basis.ndim != 2 or not 1 <= basis.shape[1] < basis.shape[0]:
                raise InvalidInput("basis must be (D, d) with 1 <= d < D")
            gram = basis.T @ basis
            if not np.allclose(gram, np.eye(basis.shape[1]), atol=1e-10):
                raise InvalidInput("basis columns must be orthonormal")
            offset = (np.zeros(basis.shape[0]) if self.offset is None
                      else np.array(self.offset, dtype=float, copy=True))
            if offset.shape != (basis.shape[0],):
                raise InvalidInput("offset must be a D-vector")
            if not (np.isfinite(basis).all() and np.isfinite(offset).all()):
                raise InvalidInput("basis and offset must be finite")
            if not (np.isfinite(self.extent) and self.extent > 0):
                raise InvalidInput("extent must be positive and finite")
            basis.setflags(write=False)
            offset.setflags(write=False)
            object.__setattr__(self, "basis", basis)
            object.__setattr__(self, "offset", offset)

    @property
    def ambient_dim(self) -> int:
        if self.kind is ManifoldKind.CIRCLE:
            return 2
        if self.kind in (ManifoldKind.SPHERE, ManifoldKind.TORUS):
            return 3
        return self.basis.shape[0]

    @property
    def intrinsic_dim(self) -> int:
        if self.kind is ManifoldKind.CIRCLE:
            return 1
        if self.kind in (ManifoldKind.SPHERE, ManifoldKind.TORUS):
            return 2
        return self.basis.shape[1]

    @property
    def reach(self) -> float:
        if self.kind in (ManifoldKind.CIRCLE, ManifoldKind.SPHERE):
            return self.radius
        if self.kind is ManifoldKind.TORUS:
            return self.minor_radius
        return math.inf

    def describe(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind in (ManifoldKind.CIRCLE, ManifoldKind.SPHERE):
            out["radius"] = self.radius
        elif self.kind is ManifoldKind.TORUS:
            out["major_radius"] = self.major_radius
            out["minor_radius"] = self.minor_radius
        else:
            out["basis"] = [[float(v) for v in row] for row in self.basis]
            out["offset"] = [float(v) for v in self.offset]
            out["extent"] = self.extent
        return out


@dataclass(frozen=True)
class NoiseSpec:
    """Isotropic Gaussian corruption: standard deviation and stream seed."""

    sigma: float
    seed: int

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidInput("sigma must be positive and finite")


def _torus_minor_angles(rng: np.random.Generator, n: int,
                        big_r: float, small_r: float) -> np.ndarray:
    """Rejection-sample the minor angle with acceptance (R + a cos v)/(R + a),
    the density that makes the area measure uniform."""
    out = np.empty(n)
    filled = 0
    while filled < n:
        batch = max(2 * (n - filled), 16)
        v = rng.uniform(0.0, _TWO_PI, size=batch)
        u = rng.uniform(0.0, 1.0, size=batch)
        accepted = v[u < (big_r + small_r * np.cos(v)) / (big_r + small_r)]
        take = accepted[: n - filled]
        out[filled:filled + take.size] = take
        filled += take.size
    return out


def sample_manifold(spec: ManifoldSpec, n: int, seed: int) -> PointCloud:
    """n points exactly on the manifold, uniform w.r.t. surface measure."""
    if n < 1:
        raise InvalidInput("sample count must be >= 1")
    rng = make_rng(seed)
    if spec.kind is ManifoldKind.CIRCLE:
        theta = rng.uniform(0.0, _TWO_PI, size=n)
        pts = spec.radius * np.column_stack([np.cos(theta), np.sin(theta)])
    elif spec.kind is ManifoldKind.SPHERE:
        g = rng.standard_normal((n, 3))
        norms = np.linalg.norm(g, axis=1)
        while (norms == 0.0).any():  # probability zero, but keep the sampler total
            redo = norms == 0.0
            g[redo] = rng.standard_normal((int(redo.sum()), 3))
            norms = np.linalg.norm(g, axis=1)
        pts = spec.radius * g / norms[:, None]
    elif spec.kind is ManifoldKind.TORUS:
        u = rng.uniform(0.0, _TWO_PI, size=n)
        v = _torus_minor_angles(rng, n, spec.major_radius, spec.minor_radius)
        ring = spec.major_radius + spec.minor_radius * np.cos(v)
        pts = np.column_stack([ring * np.cos(u), ring * np.sin(u),
                               spec.minor_radius * np.sin(v)])
    else:
        coeff = rng.uniform(-spec.extent, spec.extent, size=(n, spec.intrinsic_dim))
        pts = spec.offset + coeff @ spec.basis.T
    return PointCloud(pts)


def add_gaussian_noise(cloud: PointCloud, noise: NoiseSpec) -> PointCloud:
    """Independent isotropic D-dimensional Gaussian offset per point."""
    rng = make_rng(noise.seed)
    xi = noise.sigma * rng.standard_normal(cloud.points.shape)
    return PointCloud(cloud.points + xi)


def sample_tube(spec: ManifoldSpec, n0: int, tube_radius: float,
                seed: int) -> PointCloud:
    """n0 points at distance <= tube_radius from the manifold.

    Uniform on-manifold anchors plus offsets drawn uniformly from the
    ambient ball of radius tube_radius (the simplest distribution satisfying
    the tube constraint). tube_radius = 0 yields points exactly on the
    manifold.
    """
    if not (np.isfinite(tube_radius) and tube_radius >= 0):
        raise InvalidInput("tube_radius must be nonnegative and finite")
    if not tube_radius < spec.reach:
        raise TubeExceedsReach(
            f"tube radius {tube_radius} must be smaller than the reach {spec.reach}"
        )
    anchors = sample_manifold(spec, n0, derive_seed(seed, 0))
    if tube_radius == 0.0:
        return anchors
    rng = make_rng(derive_seed(seed, 1))
    D = spec.ambient_dim
    dirs = rng.standard_normal((n0, D))
    norms = np.linalg.norm(dirs, axis=1)
    while (norms == 0.0).any():
        redo = norms == 0.0
        dirs[redo] = rng.standard_normal((int(redo.sum()), D))
        norms = np.linalg.norm(dirs, axis=1)
    radii = tube_radius * rng.uniform(0.0, 1.0, size=n0) ** (1.0 / D)
    return PointCloud(anchors.points + dirs / norms[:, None] * radii[:, None])


def analytic_distances(spec: ManifoldSpec, points) -> np.ndarray:
    """Exact Euclidean distances from each row of ``points`` to the manifold."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[1] != spec.ambient_dim:
        raise InvalidInput(
            f"points have dimension {pts.shape[1]}, manifold lives in {spec.ambient_dim}"
        )
    if spec.kind in (ManifoldKind.CIRCLE, ManifoldKind.SPHERE):
        return np.abs(np.linalg.norm(pts, axis=1) - spec.radius)
    if spec.kind is ManifoldKind.TORUS:
        ring = np.hypot(pts[:, 0], pts[:, 1]) - spec.major_radius
        return np.abs(np.hypot(ring, pts[:, 2]) - spec.minor_radius)
    resid = pts - spec.offset
    normal = resid - (resid @ spec.basis) @ spec.basis.T
    return np.linalg.norm(normal, axis=1)


def analytic_distance(spec: ManifoldSpec, x) -> float:
    """Exact Euclidean distance from one point to the manifold."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise InvalidInput("point must be finite")
    return float(analytic_distances(spec, x.reshape(1, -1))[0])
