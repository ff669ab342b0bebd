import math

import numpy as np
import pytest

from arwaves.almost_period import dirichlet_bound, linearised_bound
from arwaves.errors import SkippedLowMargin
from arwaves.experiments import (
    compare_models,
    correlation_experiment,
    expected_length_check,
    expected_length_target,
    field_replication_check,
    phi_bank,
    replication_experiment,
    replication_sweep,
    variance_trend,
)
from arwaves.nodal import Disk, Rectangle


def first_regular(n, m, tau=None, start=0, **kw):
    for s in range(start, start + 30):
        try:
            return replication_experiment(n, s, m, tau=tau, **kw)
        except SkippedLowMargin:
            continue
    pytest.fail("no regular seed found")


class TestPhiBank:
    def test_values(self):
        bank = phi_bank(Disk(1.0, 2.0, 0.5))
        assert bank["const"](np.array([7.0]), np.array([7.0]))[0] == 1.0
        assert bank["coordx"](np.array([1.5]), np.array([0.0]))[0] == pytest.approx(1.0)
        assert bank["bump"](np.array([1.0]), np.array([2.0]))[0] == pytest.approx(1.0)
        assert bank["bump"](np.array([1.5]), np.array([2.0]))[0] == 0.0

    def test_rectangle_radius(self):
        bump = phi_bank(Rectangle(0, 0, 2, 2), ["bump"])["bump"]
        assert bump(np.array([2.0]), np.array([2.0]))[0] == 0.0
        assert bump(np.array([1.9]), np.array([1.9]))[0] > 0

    def test_unknown(self):
        with pytest.raises(ValueError):
            phi_bank(Disk(0, 0, 1), ["nope"])


class TestReplication:
    def test_exact_period_gives_zero_difference(self):
        # an integer period of T_n becomes sqrt(n) times it after rescaling
        rep = first_regular(65, 2, tau=[math.sqrt(65), 0.0], window=Disk(0, 0, 1), h=0.01)
        assert rep.correlation == pytest.approx(1.0, abs=1e-12)
        for name in rep.rel_diff:
            assert rep.rel_diff[name] < 1e-8
        assert rep.hausdorff < 1e-9

    def test_report_fields(self):
        rep = first_regular(65, 2, window=Disk(0, 0, 1), h=0.01)
        bank = phi_bank(Disk(0, 0, 1))
        assert set(rep.gamma) == set(bank)
        assert rep.margin >= rep.margin_threshold
        assert rep.to_dict()["n"] == 65

    def test_pigeonhole_shift(self):
        rep = first_regular(1105, 8, window=Disk(0, 0, 1), h=0.01)
        assert rep.tau == [133.0, 0.0]
        assert rep.epsilon_certified == pytest.approx(0.13414497, abs=1e-7)
        assert rep.rel_diff["const"] < 0.1

    def test_sweep_small(self):
        out = replication_sweep(1105, [2, 8], 3, seed=0, window=Disk(0, 0, 1), h=0.01)
        assert len(out["used_seeds"]) == 3
        assert not set(out["used_seeds"]) & set(out["skipped_seeds"])
        rows = {r["m"]: r for r in out["rows"]}
        assert rows[8]["epsilon_certified"] < rows[2]["epsilon_certified"]
        again = replication_sweep(1105, [2, 8], 3, seed=0, window=Disk(0, 0, 1), h=0.01)
        assert again == out

    def test_field_replication(self):
        rows = field_replication_check(1105, 4, range(3), radius=1.0, h=0.02)
        for r in rows:
            assert r["ok"] and r["sup"] <= r["bound"]
            assert r["points"] > 7000


class TestLength:
    def test_target(self):
        assert expected_length_target(2) == pytest.approx(math.pi)

    def test_small_run(self):
        out = expected_length_check(5, 40, 1)
        assert out["rel_error"] < 4 * out["stderr"] / out["target"] + 0.01
        assert out["N"] == 8

    def test_guard(self):
        with pytest.raises(ValueError):
            expected_length_check(5, 1, 0, h=0.1)


class TestCorrelation:
    def test_full_torus(self):
        out = correlation_experiment(65, None, 20, 3, n_boot=100)
        assert out["correlation"] == pytest.approx(1.0, abs=1e-12)
        assert out["ci_low"] == pytest.approx(1.0, abs=1e-12)

    def test_ball(self):
        out = correlation_experiment(65, 0.4, 30, 3, n_boot=200)
        assert -1 <= out["correlation"] <= 1
        assert out["ci_low"] <= out["ci_high"]
        assert out["radius"] == pytest.approx(65**-0.1)
        assert out["var_reference"] == pytest.approx(4 * math.pi**2 * 65 / (512 * 16**2))

    def test_guard(self):
        with pytest.raises(ValueError):
            correlation_experiment(5002, 0.1, 2, 0)

    def test_variance_trend_shape(self):
        out = variance_trend([5, 65], 10, 0)
        assert [r["N"] for r in out["rows"]] == [8, 16]
        assert abs(out["spearman"]) == pytest.approx(1.0)


class TestCompareModels:
    def test_n5(self):
        full, lin = compare_models(5, 0.5)
        assert full["bound"] == pytest.approx(dirichlet_bound(8, 0.5))
        assert full["measured"] == pytest.approx(1.0916501271011698, abs=1e-9)
        assert lin["bound"] == pytest.approx(linearised_bound(1, 0.5))
        assert lin["measured"] is not None and lin["measured"] <= lin["bound"]
        assert lin["pigeonhole_tau"] == 2.0

    def test_measured_below_bound(self):
        for row in compare_models(65, 0.25):
            assert row["measured"] is None or row["measured"] <= row["bound"]

    def test_omega_invalid_row(self):
        rows = compare_models(25, 0.5)
        assert rows[1]["flag"] == "OmegaInvalid" and rows[1]["bound"] is None
