import numpy as np
import pytest

from manifit import (
    AllWeightsZero,
    FittedField,
    InvalidInput,
    PointCloud,
    RankDeficientNeighborhood,
    StencilEscape,
    asdf_km17,
    bump,
    epsilon_net,
    field_cf18,
    field_ours,
    km17_ridge_direction,
    ridge_direction,
)
from manifit.rng import make_rng


class TestBump:
    def test_plateau_and_cutoff(self):
        assert bump(0.2) == 1.0
        assert bump(0.25) == 1.0
        assert bump(-3.0) == 1.0
        assert bump(1.0) == 0.0
        assert bump(1.5) == 0.0

    def test_quintic_midpoint(self):
        assert bump(5.0 / 8.0) == pytest.approx(0.5, abs=1e-15)

    def test_monotone_nonincreasing(self):
        grid = np.linspace(-0.5, 1.5, 801)
        vals = bump(grid)
        assert (np.diff(vals) <= 1e-15).all()
        assert ((vals >= 0.0) & (vals <= 1.0)).all()

    def test_twice_differentiable_at_seams(self):
        # the second derivative is continuous and zero at both seams, so its
        # magnitude just inside shrinks proportionally with the offset
        h = 1e-6

        def cd2(t):
            return (bump(t + h) - 2.0 * bump(t) + bump(t - h)) / (h * h)

        for seam, inward in ((0.25, 1.0), (1.0, -1.0)):
            far = abs(cd2(seam + inward * 1e-3))
            near = abs(cd2(seam + inward * 1e-4))
            assert near < far
            assert near < 0.05
            assert cd2(seam - inward * 1e-4) == pytest.approx(0.0, abs=1e-9)

    def test_rejects_nan(self):
        with pytest.raises(InvalidInput):
            bump(float("nan"))

    def test_vectorized(self):
        out = bump(np.array([0.0, 5.0 / 8.0, 2.0]))
        assert out == pytest.approx([1.0, 0.5, 0.0], abs=1e-15)


class TestEpsilonNet:
    def test_greedy_trace(self):
        cloud = PointCloud([[0.0], [0.1], [1.0]])
        assert epsilon_net(cloud, 0.2).tolist() == [0, 2]

    def test_single_ball_covers_all(self):
        cloud = PointCloud([[0.0], [0.1], [1.0]])
        assert epsilon_net(cloud, 10.0).tolist() == [0]

    def test_nothing_merges(self):
        cloud = PointCloud([[0.0], [1.0], [2.5]])
        assert epsilon_net(cloud, 0.5).tolist() == [0, 1, 2]

    def test_covering_property_random(self):
        rng = make_rng(31)
        for _ in range(20):
            pts = rng.normal(size=(int(rng.integers(1, 200)), 2))
            cloud = PointCloud(pts)
            eps = float(rng.uniform(0.05, 1.0))
            kept = epsilon_net(cloud, eps)
            dist = np.linalg.norm(pts[:, None, :] - pts[kept][None, :, :], axis=2)
            assert dist.min(axis=1).max() <= eps

    def test_eps_validation(self):
        with pytest.raises(InvalidInput):
            epsilon_net(PointCloud([[0.0]]), 0.0)


class TestFieldOurs:
    def test_line_hand_example(self, line_cloud):
        f = FittedField(line_cloud, "ours", r=0.5, d=1, beta=2)
        v = field_ours([0.0, 0.3], f)
        assert v == pytest.approx([0.0, 0.3], abs=1e-12)

    def test_zero_at_weighted_mean(self):
        cloud = PointCloud([[-0.2, 0.0], [-0.1, 0.0], [0.1, 0.0], [0.2, 0.0]])
        f = FittedField(cloud, "ours", r=0.5, d=1, beta=2)
        # symmetric neighbors: the weighted mean is the query itself
        v = field_ours([0.0, 0.0], f)
        assert np.linalg.norm(v) <= 1e-15

    def test_range_consistency(self, circle_field):
        rng = make_rng(7)
        for _ in range(25):
            ang = rng.uniform(0, 2 * np.pi)
            x = (1.0 + rng.uniform(-0.05, 0.05)) * np.array([np.cos(ang), np.sin(ang)])
            v = circle_field.bias(x)
            pi = circle_field.normal_projector(x).matrix
            assert np.linalg.norm(pi @ v - v) <= 1e-10 * max(np.linalg.norm(v), 1e-300)

    def test_exact_affine_recovery_plane(self, plane_cloud):
        f = FittedField(plane_cloud, "ours", r=0.8, d=2, beta=4)
        rng = make_rng(12)
        for _ in range(20):
            x = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.3, 0.3)])
            v = field_ours(x, f)
            assert v == pytest.approx([0.0, 0.0, x[2]], abs=1e-8)

    def test_on_manifold_bias_scales_quadratically(self):
        theta = np.linspace(0.0, 2.0 * np.pi, 4000, endpoint=False)
        cloud = PointCloud(np.column_stack([np.cos(theta), np.sin(theta)]))
        probes = np.linspace(0.0, 2.0 * np.pi, 100, endpoint=False) + 0.0004
        pts = np.column_stack([np.cos(probes), np.sin(probes)])
        norms = {}
        for r in (0.05, 0.1):
            f = FittedField(cloud, "ours", r=r, d=1, beta=3)
            norms[r] = max(np.linalg.norm(f.bias(p)) for p in pts)
        assert norms[0.1] <= 4.5 * norms[0.05]

    def test_wrong_kind_rejected(self, line_cloud):
        f = FittedField(line_cloud, "ours", r=0.5, d=1, beta=2)
        with pytest.raises(InvalidInput):
            field_cf18([0.0, 0.3], f)
        with pytest.raises(InvalidInput):
            asdf_km17([0.0, 0.3], f)


class TestFieldCf18:
    def test_line_hand_example(self, line_cloud):
        f = FittedField(line_cloud, "cf18", r=0.5, d=1, beta=2)
        v = field_cf18([0.0, 0.3], f)
        assert v == pytest.approx([0.0, 0.3], abs=1e-12)

    def test_reduces_to_residual_field_when_projectors_agree(self, line_cloud):
        # on data whose support points share one exact projector, the
        # successive projection collapses to the plain residual field
        ours = FittedField(line_cloud, "ours", r=0.5, d=1, beta=2)
        cf18 = FittedField(line_cloud, "cf18", r=0.5, d=1, beta=2)
        for q in ([0.0, 0.3], [0.4, -0.2], [-1.1, 0.05]):
            assert field_cf18(q, cf18) == pytest.approx(
                field_ours(q, ours), abs=1e-12)

    def test_default_beta_is_d_plus_two(self, line_cloud):
        f = FittedField(line_cloud, "cf18", r=0.5, d=1)
        assert f.beta == 3

    def test_net_is_subset_and_covers(self, noisy_circle):
        f = FittedField(noisy_circle, "cf18", r=0.3, d=1, beta=3)
        assert f.net_indices is not None
        assert len(set(f.net_indices.tolist())) == len(f.net_indices)
        eps = f.net_scale * f.r ** 2 / f.d
        dist = np.linalg.norm(
            noisy_circle.points[:, None, :]
            - noisy_circle.points[f.net_indices][None, :, :], axis=2)
        assert dist.min(axis=1).max() <= eps

    def test_zero_offset_at_lone_net_point(self):
        cloud = PointCloud([[0.0, 0.0], [10.0, 0.0]])
        with pytest.warns(RankDeficientNeighborhood):
            f = FittedField(cloud, "cf18", r=0.5, d=1, beta=2)
        v = field_cf18([0.0, 0.0], f)
        assert np.linalg.norm(v) == 0.0


class TestAsdfKm17:
    def test_zero_on_line(self, line_cloud):
        f = FittedField(line_cloud, "km17", r=0.5, d=1)
        assert asdf_km17([0.15, 0.0], f) == 0.0

    def test_single_plane_square_distance(self):
        # one support point in the ball; its tangent plane is y = 0, so the
        # value is the squared normal offset 0.4^2 = 0.16
        cloud = PointCloud([[-0.2, 0.0], [0.0, 0.0], [0.2, 0.0]])
        f = FittedField(cloud, "km17", r=0.45, d=1)
        assert asdf_km17([0.3, 0.4], f) == pytest.approx(0.16, abs=1e-14)

    def test_two_planes_equal_weights_average(self):
        # two horizontal rows whose center points carry exactly diagonal local
        # moments; the query ball holds only those two, both theta arguments
        # land on the bump plateau, and the value is the mean of {0.01, 0.03}
        gap = np.sqrt(0.03) - np.sqrt(0.01)
        xs = np.array([-0.34, 0.0, 0.34])
        rows = np.vstack([
            np.column_stack([xs, np.zeros(3)]),
            np.column_stack([xs, np.full(3, gap)]),
        ])
        f = FittedField(PointCloud(rows), "km17", r=0.35, d=1)
        assert asdf_km17([0.0, -0.1], f) == pytest.approx(0.02, abs=1e-14)

    def test_nonnegative_everywhere(self, noisy_circle):
        f = FittedField(noisy_circle, "km17", r=0.2, d=1)
        rng = make_rng(3)
        for _ in range(40):
            ang = rng.uniform(0, 2 * np.pi)
            x = (1.0 + rng.uniform(-0.1, 0.1)) * np.array([np.cos(ang), np.sin(ang)])
            assert f.asdf(x) >= 0.0

    def test_all_weights_zero_when_ball_empty(self, line_cloud):
        f = FittedField(line_cloud, "km17", r=0.5, d=1)
        with pytest.raises(AllWeightsZero):
            asdf_km17([0.0, 9.0], f)


def _quadratic(x):
    return x[-1] ** 2


def _quartic(x):
    return x[-1] ** 2 + x[-1] ** 4


class TestRidgeDirection:
    def test_quadratic_closed_form(self):
        x = np.array([0.4, -0.2, 0.3])
        v = ridge_direction(_quadratic, x, 2, h=1e-3)
        assert v == pytest.approx([0.0, 0.0, 2.0 * 0.3], abs=1e-9)

    def test_zero_on_ridge(self):
        x = np.array([0.4, -0.2, 0.0])
        v = ridge_direction(_quadratic, x, 2, h=1e-3)
        assert np.linalg.norm(v) <= 1e-12

    def test_quartic_second_order_convergence(self):
        # the quartic term gives a nonzero third derivative, so the central
        # difference error is visible and shrinks ~4x when h halves
        x = np.array([0.0, 0.3])
        exact = np.array([0.0, 2.0 * 0.3 + 4.0 * 0.3 ** 3])
        err = {}
        for h in (1e-2, 5e-3):
            err[h] = np.linalg.norm(ridge_direction(_quartic, x, 1, h=h) - exact)
        assert err[1e-2] / err[5e-3] >= 3.5

    def test_line_field_direction_is_normal(self, line_cloud):
        f = FittedField(line_cloud, "km17", r=0.5, d=1)
        v = km17_ridge_direction([0.0, 0.3], f)
        assert abs(v[0]) <= 1e-6 * abs(v[1])
        assert v[1] == pytest.approx(2.0 * 0.3, rel=1e-6)

    def test_stencil_escape(self):
        def partial(x):
            if x[0] > 0.1:
                raise AllWeightsZero("outside")
            return x[1] ** 2

        with pytest.raises(StencilEscape):
            ridge_direction(partial, np.array([0.1, 0.2]), 1, h=1e-2)


class TestFittedFieldValidation:
    def test_requires_nonempty_cloud(self):
        with pytest.raises(InvalidInput):
            FittedField(PointCloud(np.empty((0, 2))), "ours", r=0.5, d=1)

    def test_parameter_validation(self, line_cloud):
        with pytest.raises(InvalidInput):
            FittedField(line_cloud, "ours", r=0.0, d=1)
        with pytest.raises(InvalidInput):
            FittedField(line_cloud, "ours", r=0.5, d=2)
        with pytest.raises(InvalidInput):
            FittedField(line_cloud, "ours", r=0.5, d=1, beta=1)
        with pytest.raises(InvalidInput):
            FittedField(line_cloud, "cf18", r=0.5, d=1, net_scale=0.0)
        with pytest.raises(ValueError):
            FittedField(line_cloud, "unknown", r=0.5, d=1)

    def test_matches_standalone_operations(self, noisy_circle):
        from manifit import averaged_normal_projector, compute_weights, radius_neighbors

        f = FittedField(noisy_circle, "ours", r=0.2, d=1, beta=3)
        x = np.array([0.98, 0.03])
        cache = {}
        pi = averaged_normal_projector(x, noisy_circle, 0.2, 3, 1, cache)
        nbrs = radius_neighbors(x, 0.2, noisy_circle)
        alpha = compute_weights(nbrs.center, nbrs, 3).normalized
        mean = alpha @ noisy_circle.points[nbrs.indices]
        expected = pi.matrix @ (x - mean)
        assert f.bias(x) == pytest.approx(expected, abs=1e-12)
