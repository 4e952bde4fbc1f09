"""Tests for half-spaces, the invariant measure and its Monte Carlo estimators."""

import math

import numpy as np
import pytest
from scipy import integrate

from hyperstat import crofton, geometry
from hyperstat.crofton import CroftonSampler, HalfSpace
from hyperstat.energetics import Sample, energy_form
from hyperstat.errors import DomainError, PreconditionError
from hyperstat.rng import stream


def axis_point(r, n):
    x = np.zeros(n + 1)
    x[0], x[1] = math.cosh(r), math.sinh(r)
    return geometry.HyperboloidPoint(x)


def e1(n):
    e = np.zeros(n)
    e[0] = 1.0
    return e


def within(est, target, k=3.0):
    return abs(est.value - target) <= k * est.std_error


def cut_by_quadrature(d, n):
    """sigma({o in S, x not in S}) for d(o, x) = d, integrating t exactly for each omega.

    For omega at angle phi to the o-x axis the t-range is [0, artanh(tanh d cos phi)).
    """
    def t_mass(phi):
        top = math.atanh(math.tanh(d) * math.cos(phi))
        if n == 2:
            return math.sinh(top)
        if n == 3:
            return top / 2 + math.sinh(2 * top) / 4
        raise NotImplementedError

    if n == 2:
        val = integrate.quad(t_mass, -math.pi / 2, math.pi / 2, epsabs=1e-13)[0]
    else:
        val = 2 * math.pi * integrate.quad(lambda p: math.sin(p) * t_mass(p), 0, math.pi / 2, epsabs=1e-13)[0]
    return crofton.kappa(n) * val


class TestHalfSpace:
    def test_origin_inside_for_positive_t(self):
        assert crofton.contains(HalfSpace(0.5, e1(2)), geometry.origin(2))

    def test_origin_outside_for_negative_t(self):
        assert not crofton.contains(HalfSpace(-0.5, e1(2)), geometry.origin(2))

    def test_far_point_outside(self):
        # <p, v> = cosh 2 sinh 1 - sinh 2 cosh 1 = sinh(1 - 2) < 0
        assert not crofton.contains(HalfSpace(1.0, e1(3)), axis_point(2.0, 3))

    def test_separation(self):
        o, x = geometry.origin(2), axis_point(1.0, 2)
        assert not crofton.separates(HalfSpace(0.5, e1(2)), o, o)
        assert crofton.separates(HalfSpace(0.5, e1(2)), o, x)
        assert not crofton.separates(HalfSpace(2.0, e1(2)), o, x)

    def test_opposite_parameters_are_complements(self):
        rng = stream(1, "hs")
        for _ in range(200):
            t, w = rng.normal(), geometry.random_direction(3, rng)
            p = geometry.random_point_ball(2.0, 3, rng)
            assert crofton.contains(HalfSpace(t, w), p) != crofton.contains(HalfSpace(-t, -w), p)

    def test_unit_direction_required(self):
        with pytest.raises(DomainError):
            HalfSpace(0.0, [1.0, 1.0])

    def test_klein_picture(self):
        # in the Klein ball the half-space is {k : k . omega <= tanh t}
        rng = stream(2, "hs")
        for _ in range(500):
            t, w = rng.normal(), geometry.random_direction(2, rng)
            p = geometry.random_point_ball(2.0, 2, rng)
            k = geometry.convert(p, "klein").coords
            assert crofton.contains(HalfSpace(t, w), p) == (k @ w <= math.tanh(t))


class TestKappa:
    def test_values(self):
        assert crofton.kappa(1) == 0.5
        assert crofton.kappa(2) == pytest.approx(0.25, rel=1e-15)
        assert crofton.kappa(3) == pytest.approx(1 / (2 * math.pi), rel=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 4, 7])
    def test_small_distance_limit(self, n):
        # oracle: kappa_n = 1 / (2 C_n), C_n = int_{omega.e > 0} omega.e domega, by quadrature
        C = crofton.sphere_volume(n - 2) * integrate.quad(
            lambda p: math.cos(p) * math.sin(p) ** (n - 2), 0, math.pi / 2
        )[0]
        assert crofton.kappa(n) == pytest.approx(1 / (2 * C), rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("d", [0.1, 0.5, 1.0, 2.0, 3.0, 5.0])
    def test_cut_normalization_by_quadrature(self, n, d):
        assert cut_by_quadrature(d, n) == pytest.approx(d / 2, rel=1e-9)

    def test_one_dimension(self):
        # half-spaces containing o but not x are t in [0, d) with omega = +1
        assert crofton.kappa(1) * 1.7 == pytest.approx(1.7 / 2)

    def test_bad_dim(self):
        with pytest.raises(PreconditionError):
            crofton.kappa(0)

    def test_density(self):
        assert crofton.density(0.0, 3) == crofton.kappa(3)
        assert crofton.density(1.0, 2) == pytest.approx(0.25 * math.cosh(1.0))


class TestSampler:
    def test_total_mass_1d(self):
        # (1/2) * vol(S^0) * int_{-1}^{1} dt = 2
        assert CroftonSampler(1, 1.0, 10).total_mass == 2.0

    @pytest.mark.parametrize("k", [0, 1, 2, 3, 6])
    def test_cosh_power_integral(self, k):
        ref = integrate.quad(lambda t: math.cosh(t) ** k, -1.3, 1.3)[0]
        assert crofton.cosh_power_integral(1.3, k) == pytest.approx(ref, rel=1e-12)

    def test_weights_sum_to_total_mass(self):
        s = CroftonSampler(3, 1.2, 5000, seed=3)
        batch = crofton.sample(s, stream(0, "w"))
        assert batch.weight * len(batch) == pytest.approx(s.total_mass, rel=1e-15)

    def test_half_contain_origin(self):
        s = CroftonSampler(2, 2.0, 100_000)
        batch = crofton.sample(s, stream(4, "w"))
        frac = np.mean(batch.t > 0)
        assert abs(frac - 0.5) < 4 * 0.5 / math.sqrt(len(batch))

    def test_t_law(self):
        # n = 2: t density proportional to cosh t on [-R, R], CDF (sinh t + sinh R) / (2 sinh R)
        R = 1.5
        batch = crofton.sample(CroftonSampler(2, R, 100_000), stream(5, "w"))
        t = np.sort(batch.t)
        cdf = (np.sinh(t) + math.sinh(R)) / (2 * math.sinh(R))
        emp = np.arange(1, t.size + 1) / t.size
        assert np.max(np.abs(emp - cdf)) < 0.01
        assert np.all(np.abs(t) <= R)

    def test_iteration(self):
        batch = crofton.sample(CroftonSampler(2, 1.0, 10), stream(6, "w"))
        items = list(batch)
        assert len(items) == 10
        assert all(isinstance(S, HalfSpace) and w == batch.weight for S, w in items)

    def test_invalid(self):
        with pytest.raises(PreconditionError):
            CroftonSampler(2, 0.0, 10)
        with pytest.raises(PreconditionError):
            CroftonSampler(2, 1.0, 1)


class TestCutMeasure:
    def test_identical_points(self):
        x = geometry.random_point_ball(1.0, 2, stream(7, "c"))
        est = crofton.cut_measure(x, x, CroftonSampler(2, 2.0, 10_000))
        assert est.value == 0.0 and est.std_error == 0.0

    def test_one_orientation_unit_distance(self):
        s = CroftonSampler(2, 1.0, 200_000, seed=8)
        est = crofton.cut_measure(geometry.origin(2), axis_point(1.0, 2), s, orientation="one")
        assert within(est, 0.5)

    def test_both_orientations(self):
        x = axis_point(-1.0, 3)
        y = axis_point(1.0, 3)
        est = crofton.cut_measure(x, y, CroftonSampler(3, 1.0, 200_000, seed=9))
        assert within(est, 2.0)

    def test_ratio_constant(self):
        for k, d in enumerate([0.25, 0.5, 1.0, 2.0, 3.0]):
            s = CroftonSampler(2, d, 100_000, seed=10 + k)
            est = crofton.cut_measure(geometry.origin(2), axis_point(d, 2), s, orientation="one")
            assert within(est, d / 2), (d, est)

    def test_recentered_matches_fixed_window(self):
        x = axis_point(0.3, 2)
        y = geometry.HyperboloidPoint(geometry.apply_many(geometry.boost(1.1, [0.0, 1.0]), x.coords)[0])
        R = crofton.window_radius(np.stack([x.coords, y.coords]))
        a = crofton.cut_measure(x, y, CroftonSampler(2, R, 200_000, seed=20))
        b = crofton.cut_measure(x, y, CroftonSampler(2, 0.75 * geometry.dist(x, y), 200_000, seed=21), recenter=True)
        assert abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error)
        assert within(b, geometry.dist(x, y))

    def test_isometry_invariance(self):
        rng = stream(11, "c")
        for k in range(4):
            x, y = geometry.random_point_ball(0.5, 2, rng), geometry.random_point_ball(0.5, 2, rng)
            h = geometry.random_isometry(2, rng, max_boost=0.5)
            gx, gy = geometry.apply(h, x), geometry.apply(h, y)
            R = crofton.window_radius(np.stack([x.coords, y.coords, gx.coords, gy.coords]))
            a = crofton.cut_measure(x, y, CroftonSampler(2, R, 100_000, seed=100 + k))
            b = crofton.cut_measure(gx, gy, CroftonSampler(2, R, 100_000, seed=200 + k))
            assert abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error)

    def test_additivity(self):
        rng = stream(12, "c")
        for k in range(3):
            x, y = geometry.random_point_ball(1.0, 3, rng), geometry.random_point_ball(1.0, 3, rng)
            m = geometry.geodesic_point(x, y, 0.4)
            R = crofton.window_radius(np.stack([x.coords, y.coords]))
            parts = [crofton.cut_measure(a, b, CroftonSampler(3, R, 100_000, seed=300 + 3 * k + j))
                     for j, (a, b) in enumerate([(x, m), (m, y), (x, y)])]
            se = math.sqrt(sum(p.std_error ** 2 for p in parts))
            assert abs(parts[0].value + parts[1].value - parts[2].value) <= 3 * se

    def test_additivity_exact_on_common_draws(self):
        # a half-space separates x from y iff it separates exactly one of the sub-segments
        rng = stream(13, "c")
        x, y = geometry.random_point_ball(1.0, 2, rng), geometry.random_point_ball(1.0, 2, rng)
        m = geometry.geodesic_point(x, y, 0.3)
        s = CroftonSampler(2, crofton.window_radius(np.stack([x.coords, y.coords])), 50_000, seed=5)
        total = crofton.cut_measure(x, m, s).value + crofton.cut_measure(m, y, s).value
        assert total == pytest.approx(crofton.cut_measure(x, y, s).value, rel=1e-12)

    def test_outside_window(self):
        with pytest.raises(PreconditionError):
            crofton.cut_measure(geometry.origin(2), axis_point(2.0, 2), CroftonSampler(2, 1.0, 100))

    def test_bad_orientation(self):
        with pytest.raises(PreconditionError):
            crofton.cut_measure(geometry.origin(2), geometry.origin(2), CroftonSampler(2, 1.0, 100), orientation="up")

    def test_deterministic_across_workers(self):
        x, y = geometry.origin(2), axis_point(0.8, 2)
        s = CroftonSampler(2, 1.0, 300_000, seed=42, block_size=50_000)
        one = crofton.cut_measure(x, y, s, workers=1)
        four = crofton.cut_measure(x, y, s, workers=4)
        assert one == four

    def test_thread_env(self, monkeypatch):
        x, y = geometry.origin(2), axis_point(0.8, 2)
        s = CroftonSampler(2, 1.0, 150_000, seed=43, block_size=40_000)
        monkeypatch.setenv("HYPERSTAT_THREADS", "3")
        threaded = crofton.cut_measure(x, y, s)
        monkeypatch.setenv("HYPERSTAT_THREADS", "1")
        assert crofton.cut_measure(x, y, s) == threaded


class TestDiscrepancy:
    def samples(self, seed, m=20, n=2, R=1.0):
        rng = stream(seed, "disc")
        return (Sample.hyperbolic(geometry.random_points_ball(R, n, m, rng)),
                Sample.hyperbolic(geometry.random_points_ball(R, n, m, rng)))

    def test_identical(self):
        mu, _ = self.samples(1)
        est = crofton.discrepancy_integral(mu, mu, CroftonSampler(2, 1.5, 20_000))
        assert est.value == 0.0

    def test_dirac_pair(self):
        x, y = axis_point(0.2, 2), axis_point(-0.6, 2)
        s = CroftonSampler(2, 1.0, 200_000, seed=2)
        est = crofton.discrepancy_integral(Sample.hyperbolic([x]), Sample.hyperbolic([y]), s)
        assert within(est, geometry.dist(x, y))
        # integrand is exactly the separation indicator
        assert est == crofton.cut_measure(x, y, s)

    @pytest.mark.parametrize("seed", [3, 4])
    def test_energy_identity(self, seed):
        mu1, mu2 = self.samples(seed)
        s = CroftonSampler(2, crofton.window_radius(np.vstack([mu1.points, mu2.points])), 400_000, seed=seed)
        est = crofton.discrepancy_integral(mu1, mu2, s)
        assert abs(energy_form(mu1, mu2) - 2 * est.value) <= 3 * 2 * est.std_error

    def test_energy_identity_3d(self):
        mu1, mu2 = self.samples(5, m=10, n=3, R=0.8)
        s = CroftonSampler(3, crofton.window_radius(np.vstack([mu1.points, mu2.points])), 400_000, seed=6)
        est = crofton.discrepancy_integral(mu1, mu2, s)
        assert abs(energy_form(mu1, mu2) - 2 * est.value) <= 3 * 2 * est.std_error

    def test_support_outside_window(self):
        mu1, mu2 = self.samples(7)
        with pytest.raises(PreconditionError):
            crofton.discrepancy_integral(mu1, mu2, CroftonSampler(2, 0.1, 100))

    def test_dimension_mismatch(self):
        mu1, mu2 = self.samples(8)
        with pytest.raises(DomainError):
            crofton.discrepancy_integral(mu1, mu2, CroftonSampler(3, 2.0, 100))


class TestProjectionGap:
    def test_equal_samples(self):
        K = geometry.random_direction(2, stream(1, "cw"), 30) * 0.5
        U = geometry.random_direction(2, stream(2, "cw"), 50)
        assert crofton.cw_projection_gap(K, K.copy(), U) == 0.0

    def test_two_atoms(self):
        a, b = np.array([[0.5, 0.0]]), np.array([[-0.5, 0.0]])
        assert crofton.cw_projection_gap(a, b, [[1.0, 0.0]]) == 1.0
        assert crofton.cw_projection_gap(a, b, [[0.0, 1.0]]) == 0.0
        np.testing.assert_array_equal(crofton.projection_gaps(a, b, [[1.0, 0.0], [0.0, 1.0]]), [1.0, 0.0])

    def test_threshold_grid(self):
        a, b = np.array([[0.5, 0.0]]), np.array([[-0.5, 0.0]])
        assert crofton.cw_projection_gap(a, b, [[1.0, 0.0]], thresholds=[0.7, 0.9]) == 0.0
        assert crofton.cw_projection_gap(a, b, [[1.0, 0.0]], thresholds=np.linspace(-1, 1, 41)) == 1.0

    def test_known_ks(self):
        a = np.array([[0.1, 0.0], [0.2, 0.0], [0.3, 0.0], [0.4, 0.0]])
        b = np.array([[0.25, 0.0], [0.35, 0.0]])
        # F_a(0.2) = 1/2 vs F_b(0.2) = 0
        assert crofton.cw_projection_gap(a, b, [[1.0, 0.0]]) == 0.5

    def test_hyperbolic_sample_input(self):
        rng = stream(3, "cw")
        mu = Sample.hyperbolic(geometry.random_points_ball(1.0, 2, 10, rng))
        assert crofton.cw_projection_gap(mu, mu, [[1.0, 0.0]]) == 0.0

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            crofton.cw_projection_gap(np.empty((0, 2)), np.array([[0.1, 0.1]]), [[1.0, 0.0]])
        with pytest.raises(DomainError):
            crofton.cw_projection_gap(np.array([[1.0, 0.0]]), np.array([[0.1, 0.1]]), [[1.0, 0.0]])
        with pytest.raises(PreconditionError):
            crofton.cw_projection_gap(np.array([[0.1, 0.0]]), np.array([[0.1, 0.1]]), np.empty((0, 2)))
