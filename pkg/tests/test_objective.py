import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ceramopt.fem import LoadCase, solve_state
from ceramopt.mesh import Mesh
from ceramopt.objective import (
    WeibullParams,
    angular_integral,
    angular_integral_and_grad,
    evaluate_objective,
    failure_curve,
    survival_curve,
)

from conftest import jittered_mesh


def double_factorial_ratio(m: int) -> float:
    """(2m-1)!! / (2m)!!, the mean of cos^(2m) over a period."""
    return math.prod(range(1, 2 * m, 2)) / math.prod(range(2, 2 * m + 1, 2))


def rotation(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def uniaxial_displacement(mesh, material, s):
    """Affine field whose plane-strain stress is diag(s, 0)."""
    lam, mu = material.lame_lambda, material.lame_mu
    # sigma22 = lam (a + b) + 2 mu b = 0
    a = s / (lam + 2 * mu - lam**2 / (lam + 2 * mu))
    b = -lam * a / (lam + 2 * mu)
    return np.stack([a * mesh.nodes[:, 0], b * mesh.nodes[:, 1]], 1).ravel()


class TestParams:
    @pytest.mark.parametrize("kw", [{"m": 1.5}, {"n_angles": 7}, {"n_angles": 2}, {"sigma0": 0.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            WeibullParams(**kw)


class TestAngularIntegral:
    @pytest.mark.parametrize("m", [2, 5, 10])
    def test_hydrostatic(self, m):
        p = 3.0
        assert angular_integral(p * np.eye(2), m, 64) == pytest.approx(2 * np.pi * p**m, rel=1e-14)

    @pytest.mark.parametrize("n", [4, 8])
    def test_uniaxial_linear(self, n):
        s = 2.5
        assert angular_integral(np.diag([s, 0.0]), 1.0, n) == pytest.approx(np.pi * s, rel=1e-14)

    @pytest.mark.parametrize("m", [2, 3, 10, 20])
    def test_uniaxial_double_factorial(self, m):
        s = 1.7
        exact = 2 * np.pi * s**m * double_factorial_ratio(m)
        assert angular_integral(np.diag([s, 0.0]), m, 128) == pytest.approx(exact, rel=1e-13)

    def test_compression_is_zero(self):
        assert angular_integral(-np.eye(2), 10, 128) == 0.0
        assert angular_integral(np.diag([-1.0, -3.0]), 10, 128) == 0.0

    def test_exact_for_fully_tensile_stress(self):
        # with no compressive directions the integrand is a trigonometric
        # polynomial of degree 2m, integrated exactly once n > 2m
        rng = np.random.default_rng(3)
        a = rng.normal(size=(50, 2, 2))
        sig = a @ np.swapaxes(a, 1, 2) + 0.1 * np.eye(2)
        t32 = angular_integral(sig, 10, 32)
        t512 = angular_integral(sig, 10, 512)
        assert np.max(np.abs(t512 - t32) / t512) <= 1e-13

    def test_compressive_dominated_converges_slowly(self):
        # a narrow tensile window limits smoothness; the rule still converges
        sig = np.diag([1.0, -50.0])
        t = [angular_integral(sig, 10, n) for n in (64, 256, 1024, 4096)]
        err = np.abs(np.diff(t))
        assert np.all(err[1:] < err[:-1])

    @given(st.floats(0, 2 * np.pi), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=50, deadline=None)
    def test_rotation_invariance(self, phi, a, b, c):
        sig = np.array([[a, b], [b, c]])
        R = rotation(phi)
        t0 = angular_integral(sig, 10, 256)
        t1 = angular_integral(R @ sig @ R.T, 10, 256)
        assert t1 == pytest.approx(t0, rel=1e-8, abs=1e-12 * (1 + np.abs(sig).max() ** 10))

    def test_exact_rotation_by_grid_angle(self):
        sig = np.array([[1.0, 0.4], [0.4, -0.3]])
        R = rotation(2 * np.pi * 5 / 64)
        assert angular_integral(R @ sig @ R.T, 10, 64) == pytest.approx(angular_integral(sig, 10, 64), rel=1e-13)

    def test_homogeneous_degree_m(self):
        sig = np.array([[1.0, 0.4], [0.4, -0.3]])
        assert angular_integral(2 * sig, 10, 128) == pytest.approx(2**10 * angular_integral(sig, 10, 128), rel=1e-14)

    @pytest.mark.parametrize("sig", [[[1.0, 0.4], [0.4, -0.3]], [[0.0, 1.0], [1.0, 0.0]], [[2.0, 0.0], [0.0, 1.0]]])
    def test_gradient_fd(self, sig):
        sig = np.array(sig)
        m, n = 4.0, 128
        T, D = angular_integral_and_grad(sig, m, n)
        assert np.array_equal(D, D.T)
        h = 1e-6
        for i, j in [(0, 0), (1, 1), (0, 1)]:
            E = np.zeros((2, 2))
            E[i, j] = E[j, i] = 1.0
            fd = (angular_integral(sig + h * E, m, n) - angular_integral(sig - h * E, m, n)) / (2 * h)
            assert np.sum(D * E) == pytest.approx(fd, rel=1e-7, abs=1e-8 * T)

    def test_smooth_across_sign_change(self):
        # a principal stress passing through zero makes n.sigma n change sign on
        # an interval of angles; with m >= 2 the integral stays C^1 there
        m, n = 2.0, 128
        ts = np.linspace(-0.05, 0.05, 11)
        vals = [angular_integral(np.diag([1.0, t]), m, n) for t in ts]
        grads = [angular_integral_and_grad(np.diag([1.0, t]), m, n)[1][1, 1] for t in ts]
        assert np.all(np.diff(vals) > 0)
        assert np.max(np.abs(np.diff(grads))) < 0.05


class TestObjective:
    def test_single_element_closed_form(self, material):
        m = Mesh([[0, 0], [2, 0], [0, 1]], [[0, 1, 2]], ["D", "F", "F"], 0, 0)
        params = WeibullParams(m=10, sigma0=2.0, n_angles=128)
        s = 3.0
        rep = evaluate_objective(m, uniaxial_displacement(m, material, s), material, params)
        exact = 1.0 * (s / 2.0) ** 10 * double_factorial_ratio(10)
        assert rep.J == pytest.approx(exact, rel=1e-12)

    def test_zero_displacement(self, bent_rod, material, params):
        rep = evaluate_objective(bent_rod, np.zeros(2 * bent_rod.n_nodes), material, params)
        assert rep.J == 0.0
        assert rep.eta == np.inf
        assert np.all(rep.survival([0.0, 1.0, 1e9]) == 1.0)

    def test_load_scaling(self, random_mesh, random_load, material, params):
        u = solve_state(random_mesh, material, random_load).U
        j1 = evaluate_objective(random_mesh, u, material, params).J
        j2 = evaluate_objective(random_mesh, 2 * u, material, params).J
        assert j2 == pytest.approx(2**10 * j1, rel=1e-13)

    def test_renumbering_invariance(self, random_mesh, random_load, material, params):
        u = solve_state(random_mesh, material, random_load).U
        j = evaluate_objective(random_mesh, u, material, params).J
        rng = np.random.default_rng(0)
        perm = rng.permutation(random_mesh.n_triangles)
        tris = np.roll(random_mesh.triangles[perm], 1, axis=1)
        shuffled = Mesh(random_mesh.nodes, tris, random_mesh.tags, random_mesh.nx, random_mesh.ny)
        assert evaluate_objective(shuffled, u, material, params).J == pytest.approx(j, rel=1e-13)

    def test_sigma0_scaling(self, random_mesh, random_load, material):
        u = solve_state(random_mesh, material, random_load).U
        a = evaluate_objective(random_mesh, u, material, WeibullParams(sigma0=1.0)).J
        b = evaluate_objective(random_mesh, u, material, WeibullParams(sigma0=2.0)).J
        assert b == pytest.approx(a / 2**10, rel=1e-13)

    def test_intensity_density_sums_to_J(self, bent_rod, material, params):
        u = solve_state(bent_rod, material, LoadCase.unit_force(bent_rod)).U
        rep = evaluate_objective(bent_rod, u, material, params)
        assert np.sum(rep.per_element_intensity * bent_rod.areas) == pytest.approx(rep.J, rel=1e-13)
        assert np.all(rep.per_element_intensity >= 0)


class TestSurvival:
    @pytest.fixture
    def report(self, bent_rod, material, params):
        u = solve_state(bent_rod, material, LoadCase.unit_force(bent_rod)).U
        return evaluate_objective(bent_rod, u, material, params)

    def test_endpoints(self, report):
        assert survival_curve(report, 0.0) == 1.0
        assert survival_curve(report, report.eta) == pytest.approx(np.exp(-1.0), rel=1e-12)
        assert failure_curve(report, report.eta) == pytest.approx(1 - np.exp(-1.0), rel=1e-12)

    def test_monotone_complementary(self, report):
        F = np.linspace(0, 3 * report.eta, 50)
        p = survival_curve(report, F)
        assert np.all(np.diff(p) <= 0)
        assert np.allclose(p + failure_curve(report, F), 1.0, atol=1e-15)

    def test_small_load_failure_precision(self, report):
        F = 1e-3 * report.eta
        assert failure_curve(report, F) == pytest.approx(report.J * F**10, rel=1e-12)

    def test_negative_load(self, report):
        with pytest.raises(ValueError):
            survival_curve(report, [1.0, -0.1])
