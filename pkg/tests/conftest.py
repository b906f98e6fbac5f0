import numpy as np
import pytest

from manifit import (
    FittedField,
    ManifoldSpec,
    NoiseSpec,
    PointCloud,
    add_gaussian_noise,
    sample_manifold,
)


@pytest.fixture
def line_cloud():
    """Noiseless samples on the line y = 0 in R^2."""
    xs = np.linspace(-3.0, 3.0, 61)
    return PointCloud(np.column_stack([xs, np.zeros_like(xs)]))


@pytest.fixture
def plane_cloud():
    """Noiseless samples on the plane z = 0 in R^3."""
    grid = np.linspace(-2.0, 2.0, 17)
    gx, gy = np.meshgrid(grid, grid)
    pts = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)])
    return PointCloud(pts)


@pytest.fixture(scope="session")
def circle_spec():
    return ManifoldSpec(kind="circle", radius=1.0)


@pytest.fixture(scope="session")
def noisy_circle(circle_spec):
    """1000 circle samples blurred with sigma = 0.01 (fixed seeds)."""
    clean = sample_manifold(circle_spec, 1000, 424242)
    return add_gaussian_noise(clean, NoiseSpec(0.01, 424243))


@pytest.fixture(scope="session")
def circle_field(noisy_circle):
    return FittedField(noisy_circle, "ours", r=0.2, d=1, beta=3)
