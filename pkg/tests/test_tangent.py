import warnings

import numpy as np
import pytest

from manifit import (
    DegenerateSpectrum,
    EmptyNeighborhood,
    InvalidInput,
    NormalProjector,
    PointCloud,
    RankDeficientNeighborhood,
    averaged_normal_projector,
    local_normal_projector,
)
from manifit.rng import make_rng


def _projector_invariants(proj: NormalProjector, dim: int, codim: int):
    m = proj.matrix
    assert np.abs(m - m.T).max() <= 1e-10
    assert np.linalg.norm(m @ m - m, "fro") <= 1e-8
    assert abs(np.trace(m) - codim) <= 1e-8
    assert m.shape == (dim, dim)
    assert proj.rank == codim


class TestLocalNormalProjector:
    def test_two_point_hand_example(self):
        cloud = PointCloud([[1.0, 0.0], [-1.0, 0.0]])
        proj = local_normal_projector([0.0, 0.0], cloud, 1.5, 1)
        assert np.allclose(proj.matrix, np.diag([0.0, 1.0]), atol=1e-14)
        assert proj.eigengap == pytest.approx(1.0)
        assert not proj.rank_deficient

    def test_axis_aligned_plane_exact(self):
        grid = np.linspace(-1.0, 1.0, 5)
        gx, gy = np.meshgrid(grid, grid)
        cloud = PointCloud(np.column_stack([gx.ravel(), gy.ravel(),
                                            np.zeros(gx.size)]))
        proj = local_normal_projector([0.0, 0.0, 0.0], cloud, 3.0, 2)
        assert np.allclose(proj.matrix, np.diag([0.0, 0.0, 1.0]), atol=1e-12)

    def test_circle_normal_matches_analytic(self):
        theta = np.linspace(0.0, 2.0 * np.pi, 2000, endpoint=False)
        cloud = PointCloud(np.column_stack([np.cos(theta), np.sin(theta)]))
        proj = local_normal_projector([1.0, 0.0], cloud, 0.1, 1)
        # normal at (1, 0) is e1, so the projector is diag(1, 0)
        assert np.linalg.norm(proj.matrix - np.diag([1.0, 0.0]), "fro") <= 0.1

    def test_empty_neighborhood(self):
        cloud = PointCloud([[5.0, 5.0]])
        with pytest.raises(EmptyNeighborhood):
            local_normal_projector([0.0, 0.0], cloud, 0.5, 1)

    def test_rank_deficient_warns_but_produces(self):
        cloud = PointCloud([[0.0, 0.0], [9.0, 9.0]])
        with pytest.warns(RankDeficientNeighborhood):
            proj = local_normal_projector([0.0, 0.0], cloud, 0.5, 1)
        assert proj.rank_deficient
        _projector_invariants(proj, 2, 1)

    def test_dimension_validation(self):
        cloud = PointCloud([[0.0, 0.0]])
        with pytest.raises(InvalidInput):
            local_normal_projector([0.0, 0.0], cloud, 1.0, 2)
        with pytest.raises(InvalidInput):
            local_normal_projector([0.0, 0.0], cloud, 1.0, 0)


class TestAveragedNormalProjector:
    def test_single_neighbor_passthrough(self):
        cloud = PointCloud([[1.0, 0.0], [-1.0, 0.0], [50.0, 50.0]])
        cache = {}
        left = averaged_normal_projector([50.0, 50.0], cloud, 0.5, 2, 1, cache)
        assert np.allclose(left.matrix, cache[2].matrix, atol=1e-12)

    def test_identical_projectors_average_to_themselves(self, line_cloud):
        cache = {}
        proj = averaged_normal_projector([0.05, 0.0], line_cloud, 0.9, 2, 1, cache)
        assert np.allclose(proj.matrix, np.diag([0.0, 1.0]), atol=1e-12)

    def test_symmetric_pair_on_circle_closed_form(self):
        # two neighbors at angles +/- theta with their exact normal
        # projectors: the averaged matrix is diag(cos^2, sin^2) whose top
        # eigenvector is the bisector normal e1
        theta = np.pi / 6.0
        pts = np.array([[np.cos(theta), np.sin(theta)],
                        [np.cos(theta), -np.sin(theta)]])
        cloud = PointCloud(pts)
        cache = {}
        for i in range(2):
            n = pts[i] / np.linalg.norm(pts[i])
            cache[i] = NormalProjector(matrix=np.outer(n, n), rank=1,
                                       eigengap=1.0)
        x = pts.mean(axis=0)
        proj = averaged_normal_projector(x, cloud, 1.0, 2, 1, cache)
        assert np.allclose(proj.matrix, np.diag([1.0, 0.0]), atol=1e-9)

    def test_cache_filled_lazily(self, line_cloud):
        cache = {}
        averaged_normal_projector([0.0, 0.1], line_cloud, 0.5, 2, 1, cache)
        assert cache  # neighbors were computed and stored
        for proj in cache.values():
            _projector_invariants(proj, 2, 1)

    def test_empty_neighborhood(self, line_cloud):
        with pytest.raises(EmptyNeighborhood):
            averaged_normal_projector([0.0, 9.0], line_cloud, 0.5, 2, 1, {})

    def test_combined_matrix_eigenvalues_in_unit_interval(self, noisy_circle):
        from manifit.geometry import compute_weights, radius_neighbors
        from manifit.tangent import combine_projectors

        rng = make_rng(2718)
        for _ in range(20):
            ang = rng.uniform(0, 2 * np.pi)
            x = (1.0 + rng.uniform(-0.05, 0.05)) * np.array(
                [np.cos(ang), np.sin(ang)])
            nbrs = radius_neighbors(x, 0.25, noisy_circle)
            alpha = compute_weights(nbrs.center, nbrs, 3).normalized
            stacked = np.stack([
                local_normal_projector(noisy_circle.points[i], noisy_circle,
                                       0.25, 1).matrix
                for i in nbrs.indices
            ])
            a_x = combine_projectors(alpha, stacked)
            assert np.abs(a_x - a_x.T).max() <= 1e-12
            eigvals = np.linalg.eigvalsh(a_x)
            assert eigvals.min() >= -1e-10
            assert eigvals.max() <= 1.0 + 1e-10

    def test_degenerate_spectrum_warns(self):
        # equal mix of two orthogonal rank-1 projectors has a zero gap at
        # the cut: the rank split is unreliable and must be flagged
        pts = np.array([[0.1, 0.0], [-0.1, 0.0]])
        cloud = PointCloud(pts)
        cache = {
            0: NormalProjector(matrix=np.diag([1.0, 0.0]), rank=1, eigengap=1.0),
            1: NormalProjector(matrix=np.diag([0.0, 1.0]), rank=1, eigengap=1.0),
        }
        with pytest.warns(DegenerateSpectrum):
            averaged_normal_projector([0.0, 0.0], cloud, 1.0, 2, 1, cache)


class TestProjectorProperties:
    def test_random_configurations_satisfy_invariants(self):
        rng = make_rng(5150)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankDeficientNeighborhood)
            for _ in range(60):
                dim = int(rng.integers(2, 7))
                d = int(rng.integers(1, dim))
                n = int(rng.integers(d + 2, 40))
                cloud = PointCloud(rng.normal(size=(n, dim)))
                z = cloud.points[int(rng.integers(0, n))]
                proj = local_normal_projector(z, cloud, 2.5, d)
                _projector_invariants(proj, dim, dim - d)
                avg = averaged_normal_projector(z, cloud, 2.5, 3, d, {})
                _projector_invariants(avg, dim, dim - d)

    def test_permutation_invariance(self, noisy_circle):
        rng = make_rng(88)
        perm = rng.permutation(noisy_circle.n)
        shuffled = PointCloud(noisy_circle.points[perm])
        x = np.array([1.0, 0.05])
        a = averaged_normal_projector(x, noisy_circle, 0.2, 3, 1, {})
        b = averaged_normal_projector(x, shuffled, 0.2, 3, 1, {})
        assert np.abs(a.matrix - b.matrix).max() <= 1e-12
        z = noisy_circle.points[17]
        pa = local_normal_projector(z, noisy_circle, 0.2, 1)
        pb = local_normal_projector(z, shuffled, 0.2, 1)
        assert np.abs(pa.matrix - pb.matrix).max() <= 1e-12

    def test_rigid_motion_equivariance(self):
        rng = make_rng(99)
        base = rng.normal(size=(120, 3)) * np.array([1.0, 0.6, 0.05])
        cloud = PointCloud(base)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        shift = rng.normal(size=3)
        moved = PointCloud(base @ q.T + shift)
        for idx in (0, 11, 57):
            z = base[idx]
            orig = local_normal_projector(z, cloud, 1.2, 2).matrix
            turned = local_normal_projector(q @ z + shift, moved, 1.2, 2).matrix
            assert np.linalg.norm(turned - q @ orig @ q.T, "fro") <= 1e-8
        x = base[3] + np.array([0.01, -0.02, 0.005])
        orig = averaged_normal_projector(x, cloud, 1.2, 3, 2, {}).matrix
        turned = averaged_normal_projector(q @ x + shift, moved, 1.2, 3, 2, {}).matrix
        assert np.linalg.norm(turned - q @ orig @ q.T, "fro") <= 1e-8

    def test_averaging_beats_best_neighbor_on_circle_midpoint(self):
        # equally spaced noiseless circle samples; at the midpoint between
        # two samples the symmetric average cancels the first-order error
        n = 60
        theta = (np.arange(n) + 0.5) * (2.0 * np.pi / n)
        cloud = PointCloud(np.column_stack([np.cos(theta), np.sin(theta)]))
        r = 0.4
        x = 0.5 * (cloud.points[0] + cloud.points[n - 1])  # midpoint at angle 0
        x_star = x / np.linalg.norm(x)
        true_proj = np.outer(x_star, x_star)
        cache = {}
        avg = averaged_normal_projector(x, cloud, r, 3, 1, cache)
        lhs = np.linalg.norm(avg.matrix - true_proj, "fro")
        diffs = np.linalg.norm(cloud.points - x, axis=1)
        members = np.flatnonzero(diffs <= r)
        per_sample = min(
            np.linalg.norm(
                local_normal_projector(cloud.points[i], cloud, r, 1).matrix
                - true_proj, "fro")
            for i in members
        )
        assert lhs <= per_sample + 1e-9
