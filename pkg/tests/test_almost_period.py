import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arwaves.almost_period import (
    certified_sup_difference,
    derivative_phase_bound,
    dirichlet_bound,
    dirichlet_pigeonhole,
    dist_to_integers,
    almost_period_of_kernel,
    linearised_almost_period,
    linearised_bound,
    lower_bound_witness,
    m_for_epsilon,
    phase_bound,
    smallest_almost_period_scan,
    smallest_linearised_scan,
)
from arwaves.bessel import bessel_j
from arwaves.covariance import CovarianceKernel, LinearisedKernel, arw_kernel, linearised_kernel, rescaled_kernel
from arwaves.errors import NotFoundWithinBox
from arwaves.field import empirical_kernel, sample_directions
from arwaves.lattice import enumerate_lattice


def constraints_hold(mus, x, m):
    mus = np.atleast_2d(np.asarray(mus, float).T).T if np.ndim(mus) == 1 else np.asarray(mus, float)
    return np.all(dist_to_integers(mus @ np.asarray(x, float)) <= 1 / m + 1e-12)


def brute_sup_difference(k, tau, radius, h):
    ax = np.arange(-radius, radius + h / 2, h)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    t = np.column_stack([X.ravel(), Y.ravel()])
    t = t[np.linalg.norm(t, axis=1) <= radius]
    return float(np.max(np.abs(k(t + tau) - k(t))))


class TestPigeonhole:
    def test_sqrt2(self):
        x = dirichlet_pigeonhole([math.sqrt(2)], 10)
        assert 1 <= abs(int(x[0])) <= 10
        assert dist_to_integers(math.sqrt(2) * x[0]) <= 0.1
        # exhaustive oracle: 5 is the first qualifying multiple
        first = next(q for q in range(1, 11) if dist_to_integers(q * math.sqrt(2)) <= 0.1)
        assert first == 5 and int(x[0]) == 5

    def test_rational(self):
        x = dirichlet_pigeonhole([[0.5, 0.0]], 2)
        assert tuple(x) == (2, 0) or constraints_hold([[0.5, 0.0]], x, 2)
        assert np.max(np.abs(x)) <= 2

    def test_lambda25_m3(self):
        mus = enumerate_lattice(25).array / 5
        x = dirichlet_pigeonhole(mus, 3)
        for mu in mus:  # independent verification loop
            d = abs(mu @ x - round(mu @ x))
            assert d <= 1 / 3 + 1e-12
        assert 1 <= np.max(np.abs(x)) <= 3 ** (12 / 2)

    def test_full_output(self):
        x, info = dirichlet_pigeonhole(enumerate_lattice(1105).array / math.sqrt(1105), 8, full_output=True)
        assert info.kind in ("direct", "collision")
        assert info.max_distance <= 1 / 8
        assert info.constraints == 16

    def test_not_found(self):
        with pytest.raises(NotFoundWithinBox):
            dirichlet_pigeonhole([[math.sqrt(2), math.sqrt(3)], [math.pi, math.e]], 50, max_box=2)

    @given(
        st.integers(1, 6),
        st.integers(2, 4),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=40, deadline=None)
    def test_random_unit_vectors(self, N, m, seed):
        mus = sample_directions(2, N, seed).directions
        x = dirichlet_pigeonhole(mus, m)
        assert constraints_hold(mus, x, m)
        assert 1 <= np.max(np.abs(x)) <= m ** (N / 2) + 1e-9

    def test_deterministic(self):
        mus = sample_directions(2, 7, 3).directions
        assert np.array_equal(dirichlet_pigeonhole(mus, 3), dirichlet_pigeonhole(mus, 3))

    def test_one_dimensional_agrees_with_scan(self):
        # in d=1 the shell search returns the smallest qualifying |x|
        mus = [math.sqrt(5), math.pi]
        x = int(dirichlet_pigeonhole(mus, 4)[0])
        ok = [q for q in range(1, 100) if np.all(dist_to_integers(np.array(mus) * q) <= 0.25)]
        assert abs(x) == ok[0]


class TestAlmostPeriodOfKernel:
    def test_n5_m4(self):
        k = rescaled_kernel(enumerate_lattice(5))
        ap = almost_period_of_kernel(k, 4, certify_radius=2.0, certify_h=0.01)
        assert ap.epsilon_certified <= 2 * math.pi / 4
        assert ap.sup_norm <= 4**4
        assert ap.certificate.certified_sup <= 2 * math.pi / 4
        assert ap.norm >= 1 and not ap.sub_unit
        assert ap.method == "pigeonhole" and ap.m == 4

    def test_single_frequency(self):
        ap = almost_period_of_kernel(CovarianceKernel([[1.0, 0.0]]), 5)
        assert tuple(ap.tau) == (1.0, 0.0)
        assert ap.epsilon_certified == pytest.approx(0.0, abs=1e-12)

    def test_n25_m3_regression(self):
        k = rescaled_kernel(enumerate_lattice(25))
        ap = almost_period_of_kernel(k, 3, certify_radius=2.0, certify_h=0.01)
        assert ap.epsilon_certified <= 2 * math.pi / 3
        assert ap.certificate.grid_sup <= ap.certificate.certified_sup <= 2 * math.pi / 3
        assert tuple(ap.tau) == (5.0, 0.0)

    def test_n1105_regressions(self):
        k = rescaled_kernel(enumerate_lattice(1105))
        got = {m: almost_period_of_kernel(k, m) for m in (2, 4, 8)}
        assert tuple(got[2].tau) == (1.0, 0.0)
        assert tuple(got[4].tau) == (33.0, 0.0)
        assert tuple(got[8].tau) == (133.0, 0.0)
        assert got[8].epsilon_certified == pytest.approx(0.13414497, abs=1e-7)
        for m, ap in got.items():
            assert ap.epsilon_certified <= 2 * math.pi / m

    def test_derivative_bounds(self):
        k = rescaled_kernel(enumerate_lattice(65))
        ap = almost_period_of_kernel(k, 4)
        for alpha, b in ap.derivative_bounds.items():
            assert b <= (2 * math.pi) ** (sum(alpha) + 1) / 4 + 1e-12

    def test_to_dict_json_safe(self):
        import json

        ap = almost_period_of_kernel(rescaled_kernel(enumerate_lattice(5)), 3, certify_radius=1.0)
        json.dumps(ap.to_dict())

    def test_m_for_epsilon(self):
        assert m_for_epsilon(0.25) == 4
        assert m_for_epsilon(0.3) == 4
        assert m_for_epsilon(0.9) == 2


class TestCertificate:
    def test_tau_zero(self):
        k = rescaled_kernel(enumerate_lattice(5))
        c = certified_sup_difference(k, np.zeros(2), 1.0, 0.05)
        assert c.grid_sup == 0.0
        assert c.certified_sup == pytest.approx(2 * math.pi * 0.05 * math.sqrt(2), rel=1e-12)

    def test_integer_period_unrescaled(self):
        k = arw_kernel(enumerate_lattice(65))
        c = certified_sup_difference(k, np.array([3.0, -2.0]), None, 0.02)
        assert c.grid_sup <= 1e-12

    def test_grid_sup_matches_brute_force(self):
        k = rescaled_kernel(enumerate_lattice(65))
        tau = np.array([7.0, 3.0])
        c = certified_sup_difference(k, tau, 2.0, 0.05)
        assert c.grid_sup == pytest.approx(brute_sup_difference(k, tau, 2.0, 0.05), abs=1e-12)

    def test_monotone_in_h(self):
        k = rescaled_kernel(enumerate_lattice(65))
        tau = np.array([7.0, 3.0])
        a = certified_sup_difference(k, tau, 2.0, 0.1)
        b = certified_sup_difference(k, tau, 2.0, 0.05)
        assert b.certified_sup <= a.certified_sup

    def test_bounds_continuum_sup(self):
        # a fine grid never exceeds the certificate from a coarse one
        k = rescaled_kernel(enumerate_lattice(13))
        tau = np.array([4.0, 1.0])
        coarse = certified_sup_difference(k, tau, 1.0, 0.1)
        assert brute_sup_difference(k, tau, 1.0, 0.005) <= coarse.certified_sup

    def test_derivative_certificate(self):
        k = rescaled_kernel(enumerate_lattice(5))
        ap = almost_period_of_kernel(k, 4)
        for alpha in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
            c = certified_sup_difference(k, ap.tau, 1.0, 0.01, alpha=alpha)
            assert c.certified_sup <= (2 * math.pi) ** sum(alpha) * (2 * math.pi / 4)
            assert derivative_phase_bound(k, ap.tau, alpha) >= c.grid_sup - 1e-12


class TestScan:
    def test_single_frequency(self):
        ap = smallest_almost_period_scan(CovarianceKernel([[1.0, 0.0]]), 0.1, 3.0, 0.01)
        assert ap.norm == pytest.approx(1.0)

    def test_n5_regression(self):
        ap = smallest_almost_period_scan(rescaled_kernel(enumerate_lattice(5)), 0.5, 50.0, 0.01)
        assert ap.norm == pytest.approx(1.0916501271011698, abs=1e-12)
        assert ap.correlation > 0.5

    def test_minimality_against_brute_force(self):
        k = rescaled_kernel(enumerate_lattice(5))
        h, eps = 0.05, 0.5
        ap = smallest_almost_period_scan(k, eps, 10.0, h)
        M = int(10 / h)
        ax = np.arange(-M, M + 1) * h
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        t = np.column_stack([X.ravel(), Y.ravel()])
        r = np.linalg.norm(t, axis=1)
        t, r = t[(r >= 1) & (r <= 10)], r[(r >= 1) & (r <= 10)]
        good = k(t) > 1 - eps
        assert ap.norm == pytest.approx(r[good].min(), abs=1e-12)

    def test_epsilon_monotone(self):
        k = rescaled_kernel(enumerate_lattice(13))
        a = smallest_almost_period_scan(k, 0.3, 20.0, 0.02)
        b = smallest_almost_period_scan(k, 0.5, 20.0, 0.02)
        assert b.norm <= a.norm

    def test_none_found(self):
        # 12 random directions, small epsilon: nothing in a modest ball
        k = empirical_kernel(sample_directions(2, 12, 2024))
        assert smallest_almost_period_scan(k, 0.1, 8.0, 0.05) is None


class TestWitness:
    def test_zero(self):
        assert lower_bound_witness(enumerate_lattice(1105), [0.0, 0.0]) == pytest.approx(0.0, abs=1e-15)

    def test_n1105_radius5(self):
        fs = enumerate_lattice(1105)
        k = rescaled_kernel(fs)
        for phi in np.linspace(0, math.pi / 2, 7):
            tau = 5 * np.array([math.cos(phi), math.sin(phi)])
            w = lower_bound_witness(fs, tau)
            assert w <= 1 - k(tau) + 1e-12  # it is a lower bound
            assert w >= 0.5
        w0 = lower_bound_witness(fs, [5.0, 0.0])
        assert w0 == pytest.approx(0.5534, abs=1e-4)

    def test_n5_bessel_zero(self):
        fs = enumerate_lattice(5)
        r0 = 2.404825557695773 / (2 * math.pi)
        tau = np.array([r0, 0.0])
        w = lower_bound_witness(fs, tau)
        err = abs(rescaled_kernel(fs)(tau) - bessel_j(0, 2 * math.pi * r0))
        assert w == pytest.approx(1 - err, abs=1e-12)


class TestLinearised:
    def test_n5(self):
        k = linearised_kernel(enumerate_lattice(5))
        ap = linearised_almost_period(k, 0.5)
        assert ap.m == 13
        assert 1 <= ap.norm <= 13
        assert abs(k(ap.tau[0]) - 1) <= 0.5

    def test_trivial_angle(self):
        ap = linearised_almost_period(LinearisedKernel([0.5]), 0.3)
        assert ap.tau[0] == 2.0
        assert ap.epsilon_certified == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n,tau", [(5, 13), (65, 949), (1105, 62981)])
    def test_bound_and_regression(self, n, tau):
        k = linearised_kernel(enumerate_lattice(n))
        ap = linearised_almost_period(k, 0.25)
        assert ap.tau[0] == tau
        assert ap.norm <= linearised_bound(k.omega, 0.25)
        t = np.linspace(0, 50, 5001)
        assert np.max(np.abs(k(t + ap.tau[0]) - k(t))) <= 0.25

    def test_bounds(self):
        assert linearised_bound(2, 0.25) == pytest.approx((16 * math.pi) ** 2)
        assert dirichlet_bound(16, 0.25) == pytest.approx((8 * math.pi) ** 8)
        assert linearised_bound(1, 0.5) < dirichlet_bound(8, 0.5)

    def test_scan(self):
        k = linearised_kernel(enumerate_lattice(5))
        t = smallest_linearised_scan(k, 0.5, 100.0, 1e-3)
        grid = np.arange(1000, 100001) * 1e-3
        assert t == pytest.approx(grid[np.argmax(k(grid) > 0.5)])


def test_phase_bound_is_global():
    # the phase bound dominates the difference at arbitrary far-away points
    k = rescaled_kernel(enumerate_lattice(65))
    tau = almost_period_of_kernel(k, 4).tau
    t = np.random.default_rng(9).uniform(-1e4, 1e4, size=(5000, 2))
    assert np.max(np.abs(k(t + tau) - k(t))) <= phase_bound(k, tau) + 1e-12


@pytest.mark.parametrize("n,m", [(13, 3), (5, 4), (25, 3), (65, 2)])
def test_direct_hit_is_minimal_shell(n, m):
    # a direct hit is found in the first shell containing any qualifying x
    mus = enumerate_lattice(n).array / math.sqrt(n)
    x, info = dirichlet_pigeonhole(mus, m, full_output=True)
    R = int(np.max(np.abs(x)))
    smaller = [
        c for c in itertools.product(range(-R + 1, R), repeat=2)
        if c != (0, 0) and constraints_hold(mus, c, m)
    ]
    if info.kind == "direct":
        assert smaller == []
    assert constraints_hold(mus, x, m)
