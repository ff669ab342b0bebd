import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arwaves.errors import NotRepresentable, OmegaInvalid
from arwaves.lattice import (
    AngularMeasure,
    admissible_sequence,
    angular_measure,
    enumerate_lattice,
    factorize,
    gaussian_prime,
    gaussian_prime_angles,
    is_sum_of_two_squares,
    kolmogorov_distance,
    omega_or_raise,
    reconstruct_angles,
    representation_count,
)


def brute_points(n):
    r = math.isqrt(n)
    return {(a, b) for a in range(-r, r + 1) for b in range(-r, r + 1) if a * a + b * b == n}


def divisor_formula(n):
    out = 4
    for p, e in factorize(n).items():
        if p % 4 == 3 and e % 2:
            return 0
        if p % 4 == 1:
            out *= 1 + e
    return out


def brute_kolmogorov(angles, grid=2000):
    """Sup over arcs with endpoints on a fine grid plus atom one-sided limits."""
    angles = np.sort(np.mod(angles, 2 * np.pi))
    K = len(angles)
    cands = np.concatenate([angles, angles - 1e-12, angles + 1e-12, np.linspace(0, 2 * np.pi, grid)])
    cands = np.mod(cands, 2 * np.pi)
    best = 0.0
    for a in cands:
        rel = np.mod(angles - a, 2 * np.pi)
        for b_len in np.mod(cands - a, 2 * np.pi):
            mass = np.sum(rel <= b_len) / K
            best = max(best, abs(mass - b_len / (2 * np.pi)))
    return best


class TestSumOfTwoSquares:
    @pytest.mark.parametrize("n,expected", [(25, True), (3, False), (9, True), (1, True), (21, False), (1105, True)])
    def test_examples(self, n, expected):
        assert is_sum_of_two_squares(n) is expected

    def test_matches_brute_force(self):
        for n in range(1, 2000):
            assert is_sum_of_two_squares(n) == bool(brute_points(n)), n


class TestEnumerate:
    def test_n25(self):
        fs = enumerate_lattice(25)
        assert set(fs.points) == {(5, 0), (-5, 0), (0, 5), (0, -5)} | {
            (sx * a, sy * b) for a, b in [(3, 4), (4, 3)] for sx in (1, -1) for sy in (1, -1)
        }
        assert fs.cardinality == 12
        assert fs.omega is None

    def test_n2(self):
        fs = enumerate_lattice(2)
        assert set(fs.points) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
        assert fs.cardinality == 4

    def test_n5(self):
        fs = enumerate_lattice(5)
        assert fs.cardinality == 8 and fs.omega == 1
        assert fs.split_angles == pytest.approx([math.atan(0.5)], abs=1e-15)

    def test_not_representable(self):
        with pytest.raises(NotRepresentable):
            enumerate_lattice(3)

    def test_counts_up_to_3000(self):
        for n in range(1, 3001):
            if not is_sum_of_two_squares(n):
                continue
            fs = enumerate_lattice(n)
            assert fs.cardinality == len(brute_points(n)) == divisor_formula(n), n

    @given(st.integers(1, 200_000))
    @settings(max_examples=200, deadline=None)
    def test_symmetry_and_formula(self, n):
        if not is_sum_of_two_squares(n):
            assert representation_count(n) == 0
            return
        fs = enumerate_lattice(n)
        pts = set(fs.points)
        assert all(a * a + b * b == n for a, b in pts)
        for a, b in pts:
            for q in [(-a, b), (a, -b), (b, a), (-b, -a)]:
                assert q in pts
        assert fs.cardinality == divisor_formula(n) == representation_count(n)
        if fs.omega is not None:
            assert fs.cardinality == 2 ** (fs.omega + 2)

    def test_points_sorted_by_angle(self):
        fs = enumerate_lattice(1105)
        ang = np.mod(np.arctan2(fs.array[:, 1], fs.array[:, 0]), 2 * np.pi)
        assert np.all(np.diff(ang) > 0)

    def test_half_set(self):
        fs = enumerate_lattice(65)
        h = fs.half()
        assert len(h) == fs.cardinality // 2
        full = {tuple(p) for p in h} | {tuple(-p) for p in h}
        assert full == set(fs.points)

    def test_immutable(self):
        fs = enumerate_lattice(5)
        with pytest.raises(Exception):
            fs.n = 6


class TestGaussianPrimes:
    @pytest.mark.parametrize("p", [5, 13, 17, 29, 37, 41, 10009])
    def test_canonical(self, p):
        a, b = gaussian_prime(p)
        assert a * a + b * b == p and 0 < b < a

    def test_n5(self):
        angles, base = gaussian_prime_angles(5)
        assert angles == pytest.approx([math.atan(0.5)])

    def test_n4(self):
        angles, base = gaussian_prime_angles(4)
        assert angles == ()

    def test_n65(self):
        angles, _ = gaussian_prime_angles(65)
        assert sorted(angles) == pytest.approx(sorted([math.atan(1 / 2), math.atan(2 / 3)]))

    @pytest.mark.parametrize("n", [5, 65, 1105, 2 * 1105, 9 * 65, 4 * 5 * 13 * 17 * 29])
    def test_reconstruction(self, n):
        fs = enumerate_lattice(n)
        rec = np.sort(np.mod(reconstruct_angles(fs), 2 * np.pi))
        atoms = np.sort(angular_measure(fs).atoms)
        assert np.max(np.abs(rec - atoms)) < 1e-9

    def test_reconstruction_with_higher_exponents(self):
        fs = enumerate_lattice(25 * 13)
        rec = np.sort(np.mod(reconstruct_angles(fs), 2 * np.pi))
        assert np.max(np.abs(rec - np.sort(angular_measure(fs).atoms))) < 1e-9

    def test_omega_invalid(self):
        with pytest.raises(OmegaInvalid):
            omega_or_raise(enumerate_lattice(25))


class TestKolmogorov:
    def test_four_atoms(self):
        assert kolmogorov_distance(angular_measure(enumerate_lattice(1))) == pytest.approx(0.25, abs=1e-12)

    def test_n25_regression(self):
        d = kolmogorov_distance(angular_measure(enumerate_lattice(25)))
        assert 0 < d <= 0.25
        assert d == pytest.approx(0.1214994313658011, abs=1e-12)

    @pytest.mark.parametrize("n", [5, 25, 65])
    def test_against_brute_force(self, n):
        m = angular_measure(enumerate_lattice(n))
        assert kolmogorov_distance(m) == pytest.approx(brute_kolmogorov(m.atoms, 400), abs=2e-3)

    @given(st.floats(0, 2 * np.pi))
    @settings(max_examples=30, deadline=None)
    def test_rotation_invariance(self, phi):
        m = angular_measure(enumerate_lattice(1105))
        rot = AngularMeasure(np.mod(m.atoms + phi, 2 * np.pi), m.weights)
        assert kolmogorov_distance(rot) == pytest.approx(kolmogorov_distance(m), abs=1e-12)

    def test_measure_invariants(self):
        m = angular_measure(enumerate_lattice(1105))
        assert m.weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert np.allclose(np.linalg.norm(m.unit_vectors, axis=1), 1.0, atol=1e-12)


class TestAdmissible:
    def test_limit_10(self):
        seq = admissible_sequence(10, 0.3)
        for n in (2, 4, 5, 8, 9, 10):
            assert n in seq
        for n in seq:
            assert representation_count(n) >= math.log(n) ** 0.3

    def test_limit_1(self):
        assert admissible_sequence(1, 0.3) == []

    def test_contains_1105(self):
        assert 1105 in admissible_sequence(1105, 0.3)

    def test_kappa_range(self):
        with pytest.raises(ValueError):
            admissible_sequence(10, 0.4)
