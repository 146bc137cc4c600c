import numpy as np
import pytest

from assignflow import geometry as geo

from conftest import random_simplex, random_tangent


class TestFisherRaoInner:
    def test_direct_value(self):
        assert geo.fisher_rao_inner([0.5, 0.5], [1, -1], [1, -1]) == pytest.approx(4.0)

    def test_zero_vector(self, rng):
        p = random_simplex(rng, 5)
        v = random_tangent(rng, 5)
        assert geo.fisher_rao_inner(p, np.zeros(5), v) == 0.0

    def test_opposite_sign(self):
        assert geo.fisher_rao_inner([0.5, 0.5], [1, -1], [-1, 1]) == pytest.approx(-4.0)

    def test_symmetric_and_positive(self, rng):
        p = random_simplex(rng, 7)
        u = random_tangent(rng, 7)
        v = random_tangent(rng, 7)
        assert geo.fisher_rao_inner(p, u, v) == pytest.approx(
            geo.fisher_rao_inner(p, v, u), rel=1e-12
        )
        assert geo.fisher_rao_inner(p, u, u) > 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            geo.fisher_rao_inner([0.5, 0.5], [1, -1, 0], [1, -1, 0])

    def test_zero_entry_rejected(self):
        with pytest.raises(ValueError):
            geo.fisher_rao_inner([1.0, 0.0], [1, -1], [1, -1])


class TestSphereMap:
    def test_quarter_three_quarter(self):
        np.testing.assert_allclose(
            geo.sphere_map([0.25, 0.75]), [1.0, np.sqrt(3.0)], atol=1e-15
        )

    @pytest.mark.parametrize("n", [2, 3, 31])
    def test_barycenter(self, n):
        p = np.full(n, 1.0 / n)
        np.testing.assert_allclose(geo.sphere_map(p), 2.0 / np.sqrt(n), atol=1e-15)

    def test_round_trip(self, rng):
        for n in (2, 3, 31):
            p = random_simplex(rng, n)
            np.testing.assert_allclose(
                geo.sphere_map_inv(geo.sphere_map(p)), p, atol=1e-12
            )

    def test_norm_is_two(self, rng):
        p = random_simplex(rng, 11)
        assert np.linalg.norm(geo.sphere_map(p)) == pytest.approx(2.0, abs=1e-12)

    def test_inverse_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            geo.sphere_map_inv([2.0, 0.0])


class TestDistance:
    def test_self_distance(self, rng):
        p = random_simplex(rng, 6)
        assert geo.riemannian_distance(p, p) == 0.0

    def test_disjoint_supports(self):
        assert geo.riemannian_distance([1, 0], [0, 1]) == pytest.approx(np.pi)

    def test_known_value(self):
        # sum sqrt(p q) = 2 sqrt(0.09) = 0.6
        assert geo.riemannian_distance([0.9, 0.1], [0.1, 0.9]) == pytest.approx(
            2.0 * np.arccos(0.6), abs=1e-12
        )

    def test_symmetry(self, rng):
        p, q = random_simplex(rng, 9), random_simplex(rng, 9)
        assert geo.riemannian_distance(p, q) == geo.riemannian_distance(q, p)


class TestRiemannianGradient:
    def test_direct_value(self):
        np.testing.assert_allclose(
            geo.riemannian_gradient([0.5, 0.5], [1.0, 0.0]), [0.25, -0.25], atol=1e-15
        )

    def test_constant_gradient_vanishes(self, rng):
        p = random_simplex(rng, 8)
        np.testing.assert_allclose(
            geo.riemannian_gradient(p, 3.7 * np.ones(8)), 0.0, atol=1e-15
        )

    def test_defining_property(self, rng):
        p = random_simplex(rng, 5)
        g = rng.normal(size=5)
        v = random_tangent(rng, 5)
        out = geo.riemannian_gradient(p, g)
        assert out.sum() == pytest.approx(0.0, abs=1e-12)
        assert geo.fisher_rao_inner(p, out, v) == pytest.approx(
            float(np.dot(g, v)), rel=1e-10, abs=1e-12
        )


class TestGeodesic:
    def test_start_point(self, rng):
        p = random_simplex(rng, 4)
        v = random_tangent(rng, 4, scale=0.05)
        np.testing.assert_allclose(geo.geodesic(p, v, 0.0), p, atol=1e-15)

    def test_unit_speed(self, rng):
        p = random_simplex(rng, 4)
        v = random_tangent(rng, 4, scale=0.05)
        speed = np.sqrt(geo.fisher_rao_inner(p, v, v))
        for t in (0.05, 0.2, 0.5):
            d = geo.riemannian_distance(p, geo.geodesic(p, v, t))
            assert d == pytest.approx(t * speed, abs=1e-9)

    def test_initial_velocity_finite_difference(self, rng):
        p = random_simplex(rng, 5)
        v = random_tangent(rng, 5, scale=0.1)
        h = 1e-4
        fd = (geo.geodesic(p, v, h) - geo.geodesic(p, v, -h)) / (2.0 * h)
        np.testing.assert_allclose(fd, v, atol=1e-7)

    def test_boundary_contact_raises(self):
        # speed-1 curve from the edge midpoint hits the vertex at t = pi/2
        p = np.array([0.5, 0.5])
        v = np.array([0.5, -0.5])
        with pytest.raises(ValueError):
            geo.geodesic(p, v, np.pi / 2.0)


class TestExpLog:
    def test_exp_of_zero(self, rng):
        p = random_simplex(rng, 6)
        np.testing.assert_allclose(geo.exp_map(p, np.zeros(6)), p, atol=1e-15)

    def test_round_trip(self, rng):
        for n in (2, 3, 31):
            p = random_simplex(rng, n)
            q = random_simplex(rng, n)
            v = geo.inverse_exp_map(p, q)
            np.testing.assert_allclose(geo.exp_map(p, v), q, atol=1e-10)

    def test_great_circle_oracle(self):
        # walk the sphere great circle explicitly and map back
        p = np.array([0.5, 0.5])
        v = np.array([0.1, -0.1])
        s0 = geo.sphere_map(p)
        w = v / np.sqrt(p)
        nw = np.linalg.norm(w)
        s1 = s0 * np.cos(nw / 2.0) + 2.0 * (w / nw) * np.sin(nw / 2.0)
        np.testing.assert_allclose(geo.exp_map(p, v), geo.sphere_map_inv(s1), atol=1e-14)

    def test_log_at_same_point_is_zero(self, rng):
        p = random_simplex(rng, 9)
        np.testing.assert_allclose(geo.inverse_exp_map(p, p), 0.0, atol=1e-15)

    def test_log_is_tangent(self, rng):
        p, q = random_simplex(rng, 12), random_simplex(rng, 12)
        assert geo.inverse_exp_map(p, q).sum() == pytest.approx(0.0, abs=1e-12)

    def test_log_length_matches_distance(self, rng):
        for n in (2, 3, 31):
            p, q = random_simplex(rng, n), random_simplex(rng, n)
            v = geo.inverse_exp_map(p, q)
            assert np.sqrt(geo.fisher_rao_inner(p, v, v)) == pytest.approx(
                geo.riemannian_distance(p, q), abs=1e-10
            )

    def test_taylor_branch_accuracy(self, rng):
        # nearby points fall below the series threshold; round trip must hold
        p = random_simplex(rng, 5)
        q = geo.exp_map(p, random_tangent(rng, 5, scale=1e-3))
        assert 1.0 - np.sum(np.sqrt(p * q)) < geo.TAYLOR_EPS
        v = geo.inverse_exp_map(p, q)
        np.testing.assert_allclose(geo.exp_map(p, v), q, atol=1e-10)

    def test_antipodal_rejected(self):
        with pytest.raises(ValueError):
            geo.inverse_exp_map(np.array([1.0, 0.0]), np.array([0.0, 1.0]))


class TestLiftingMap:
    def test_zero_is_identity(self, rng):
        p = random_simplex(rng, 7)
        np.testing.assert_allclose(geo.lifting_map(p, np.zeros(7)), p, atol=1e-15)

    def test_softmax_at_barycenter(self, rng):
        n = 6
        p = np.full(n, 1.0 / n)
        u = rng.normal(size=n) * 3.0
        softmax = np.exp(u - u.max())
        softmax /= softmax.sum()
        np.testing.assert_allclose(geo.lifting_map(p, u), softmax, atol=1e-12)

    def test_direct_value(self):
        np.testing.assert_allclose(
            geo.lifting_map([0.5, 0.5], [np.log(2.0), 0.0]), [2 / 3, 1 / 3], atol=1e-15
        )

    def test_shift_invariance_exact(self):
        # dyadic inputs make u + c exact in floating point
        p = np.array([0.25, 0.25, 0.5])
        u = np.array([0.5, -1.25, 2.0])
        a = geo.lifting_map(p, u)
        b = geo.lifting_map(p, u + 4.0)
        assert np.array_equal(a, b)

    def test_overflow_safe(self):
        out = geo.lifting_map([0.5, 0.5], [1e4, 0.0])
        assert np.isfinite(out).all()
        assert out[0] == pytest.approx(1.0)


class TestInverseLiftingMap:
    def test_zero_at_same_point(self, rng):
        p = random_simplex(rng, 5)
        np.testing.assert_allclose(geo.inverse_lifting_map(p, p), 0.0, atol=1e-15)

    def test_round_trip(self, rng):
        for n in (2, 3, 31):
            p, q = random_simplex(rng, n), random_simplex(rng, n)
            np.testing.assert_allclose(
                geo.lifting_map(p, geo.inverse_lifting_map(p, q)), q, atol=1e-12
            )

    def test_mean_free(self, rng):
        p, q = random_simplex(rng, 10), random_simplex(rng, 10)
        assert geo.inverse_lifting_map(p, q).mean() == pytest.approx(0.0, abs=1e-15)


class TestLiftVelocity:
    def test_constant_in_kernel(self, rng):
        p = random_simplex(rng, 6)
        np.testing.assert_allclose(geo.lift_velocity(p, 2.5 * np.ones(6)), 0.0, atol=1e-15)

    def test_direct_value(self):
        np.testing.assert_allclose(
            geo.lift_velocity([0.5, 0.5], [1.0, 0.0]), [0.25, -0.25], atol=1e-15
        )

    def test_first_order_approximation(self, rng):
        # halving t must shrink the gap to the geodesic roughly 4x
        p = random_simplex(rng, 4)
        u = rng.normal(size=4)
        v = geo.lift_velocity(p, u)
        gaps = []
        for t in (0.08, 0.04, 0.02):
            gap = np.linalg.norm(geo.geodesic(p, v, t) - geo.lifting_map(p, u * t))
            gaps.append(gap)
        assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.35)
        assert gaps[1] / gaps[2] == pytest.approx(4.0, rel=0.35)


class TestIsometry:
    @pytest.mark.parametrize("n", [2, 3, 31])
    def test_differential_preserves_metric(self, rng, n):
        p = random_simplex(rng, n)
        u = random_tangent(rng, n)
        v = random_tangent(rng, n)
        du = u / np.sqrt(p)
        dv = v / np.sqrt(p)
        assert float(np.dot(du, dv)) == pytest.approx(
            geo.fisher_rao_inner(p, u, v), rel=1e-12, abs=1e-12
        )

    @pytest.mark.parametrize("n", [2, 3, 31])
    def test_distance_matches_great_circle(self, rng, n):
        p, q = random_simplex(rng, n), random_simplex(rng, n)
        sp, sq = geo.sphere_map(p), geo.sphere_map(q)
        cosang = np.dot(sp, sq) / 4.0
        expected = 2.0 * np.arccos(np.clip(cosang, -1.0, 1.0))
        assert geo.riemannian_distance(p, q) == pytest.approx(expected, abs=1e-12)
