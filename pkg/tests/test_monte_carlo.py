"""
Tests for the Monte Carlo estimators and the analytic-vs-simulation harness.
"""

import math

import numpy as np
import pytest

from covert_lab import metrics
from covert_lab.exceptions import ConditioningStarvationError
from covert_lab.link_model import ALL_SCENARIOS, FA, FP, IA, IP, NoiseProfile, TransmitConfig, db_to_linear
from covert_lab.monte_carlo import (
    McEstimate,
    estimate_detection,
    estimate_sop,
    estimate_tp,
    validate_scenario,
)


def within(est: McEstimate, value: float) -> bool:
    return abs(est.mean - value) <= 3.0 * est.half_width + 1.0 / est.n


@pytest.fixture
def setting():
    """Numerical-results setting: -20 dB at Bob, 0 dB at both attackers."""
    return NoiseProfile.from_db(-20.0, 0.0, 0.0, 0.01)


class TestMcEstimate:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            McEstimate(1.5, 0.0, 1000, 0)
        with pytest.raises(ValueError):
            McEstimate(0.5, -1.0, 1000, 0)

    def test_bernoulli_half_width(self, setting):
        est = estimate_tp(IP, setting, TransmitConfig(0.01, 1.0, 1.0), 100_000, 3)
        expected = 1.959964 * math.sqrt(est.mean * (1 - est.mean) / est.n)
        assert est.half_width == pytest.approx(expected, rel=1e-6)

    def test_minimum_sample_count(self, setting):
        with pytest.raises(ValueError, match="at least"):
            estimate_tp(IP, setting, TransmitConfig(0.01, 1.0, 1.0), 999, 0)


class TestEstimateTp:
    def test_zero_rate_always_transmits(self, setting):
        est = estimate_tp(IA, setting, TransmitConfig(0.01, 0.5, 0.0), 10_000, 1)
        assert est.mean == 1.0
        assert est.half_width == 0.0

    def test_deterministic(self, setting):
        cfg = TransmitConfig(0.01, 0.75, 0.25)
        assert estimate_tp(IA, setting, cfg, 50_000, 9) == estimate_tp(IA, setting, cfg, 50_000, 9)

    def test_unit_exponent(self):
        # (2^1 - 1) * 0.01 / 0.01 = 1, so TP = exp(-1)
        noise = NoiseProfile(0.01, 1.0, 1.0)
        est = estimate_tp(IP, noise, TransmitConfig(0.01, 1.0, 1.0), 1_000_000, 4)
        assert within(est, math.exp(-1.0))
        assert est.mean == pytest.approx(0.3679, abs=3 * est.half_width)


class TestEstimateSop:
    def test_near_zero_rate(self):
        # the rs -> 0 limit is sigma_b2 / (sigma_b2 + sigma_e2), small only for a quiet Bob
        noise = NoiseProfile(1e-4, 1.0, 1.0)
        est = estimate_sop(IP, noise, TransmitConfig(0.01, 1.0, 1e-9), 100_000, 2)
        assert est.mean <= 1e-3

    def test_ip_closed_form(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        est = estimate_sop(IP, noise, TransmitConfig(0.01, 1.0, 1.0), 1_000_000, 5)
        assert within(est, 0.02 / 1.02)
        assert within(est, 0.019608)

    def test_fp_equal_noise_zero_rate(self):
        # x = s2, c = 2 s2: x (x + 2c) / (x + c)^2 = 5/9
        noise = NoiseProfile(0.5, 0.5, 0.5)
        est = estimate_sop(FP, noise, TransmitConfig(1.0, 1.0, 0.0), 1_000_000, 6)
        assert within(est, 5.0 / 9.0)

    def test_starvation(self):
        noise = NoiseProfile(1.0, 1.0, 1.0)
        cfg = TransmitConfig(0.01, 1.0, 3.0)
        assert metrics.tp_pc(noise, 0.01, 3.0) < 1e-100
        with pytest.raises(ConditioningStarvationError, match="acceptance"):
            estimate_sop(IP, noise, cfg, 1000, 0)


class TestEstimateDetection:
    def test_degenerate_threshold(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        p_fa, p_md, cop = estimate_detection(IP, noise, TransmitConfig(0.1, 1.0, 0.5), 1.0, 10_000, 0)
        assert p_fa.mean == 1.0
        assert p_md.mean == 0.0
        assert cop.mean == 0.0

    def test_ia_reduced_form(self):
        # rho = 1/2: COP = rho (1 - rho)^((1 - rho) / rho) = 1/4 at theta = 1 + ln 2
        noise = NoiseProfile(0.01, 1.0, 1.0)
        theta = 1.0 + math.log(2.0)
        assert metrics.theta_star(IA, noise, 1.0, 0.5) == pytest.approx(theta, rel=1e-12)
        _, _, cop = estimate_detection(IA, noise, TransmitConfig(1.0, 0.5, 0.5), theta, 10_000_000, 1)
        assert within(cop, 0.25)

    def test_fp_missed_detection_gamma2(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        _, p_md, _ = estimate_detection(FP, noise, TransmitConfig(1.0, 1.0, 0.5), 3.0, 1_000_000, 2)
        assert within(p_md, 1.0 - 2.0 * math.exp(-1.0))
        assert within(p_md, 0.264241)

    def test_cop_half_width_in_quadrature(self, setting):
        p_fa, p_md, cop = estimate_detection(FA, setting, TransmitConfig(0.01, 0.5, 0.5), 2.005, 100_000, 3)
        assert cop.half_width == pytest.approx(math.hypot(p_fa.half_width, p_md.half_width))
        assert cop.mean == pytest.approx(1.0 - p_fa.mean - p_md.mean, abs=1e-15)


class TestValidateScenario:
    CFG = TransmitConfig(db_to_linear(-20.0), 0.75, 0.25)

    def test_three_comparisons(self, setting):
        report = validate_scenario(IP, setting, TransmitConfig(0.01, 1.0, 0.25), 10_000, 0)
        assert [c.name for c in report.comparisons] == ["tp", "sop", "cop"]
        assert len(report.lines()) == 3

    def test_numerical_results_setting_ia(self, setting):
        assert validate_scenario(IA, setting, self.CFG, 1_000_000, 0).passed

    def test_perturbation_fails(self, setting):
        report = validate_scenario(IA, setting, self.CFG, 1_000_000, 0, perturbation=0.05)
        assert not report.passed
        assert not any(c.passed for c in report.comparisons)

    @pytest.mark.parametrize("scenario", ALL_SCENARIOS, ids=lambda s: s.code)
    def test_thread_count_does_not_matter(self, scenario, setting, monkeypatch):
        cfg = TransmitConfig(0.01, 0.75 if scenario.uses_artificial_noise else 1.0, 0.25)
        monkeypatch.setenv("COVERT_LAB_THREADS", "1")
        one = validate_scenario(scenario, setting, cfg, 300_000, 11)
        monkeypatch.setenv("COVERT_LAB_THREADS", "4")
        four = validate_scenario(scenario, setting, cfg, 300_000, 11)
        assert one == four


class TestProperties:
    def test_half_width_scaling(self, setting):
        cfg = TransmitConfig(0.01, 0.75, 0.25)
        hw = [estimate_tp(IA, setting, cfg, n, 8).half_width for n in (10_000, 100_000, 1_000_000)]
        for a, b in zip(hw, hw[1:]):
            assert a / b == pytest.approx(math.sqrt(10.0), rel=0.2)

    @pytest.mark.parametrize("scenario", ALL_SCENARIOS, ids=lambda s: s.code)
    def test_analytic_agrees_on_random_sets(self, scenario):
        # 50 fixed random parameter sets per scenario, each with TP >= 0.05
        rng = np.random.default_rng(20240 + ALL_SCENARIOS.index(scenario))
        failures = []
        checked = 0
        while checked < 50:
            noise = NoiseProfile.from_db(rng.uniform(-30, -10), rng.uniform(-5, 5), rng.uniform(-5, 5), 0.01)
            pa = db_to_linear(rng.uniform(-25, 0))
            rho = rng.uniform(0.1, 0.99) if scenario.uses_artificial_noise else 1.0
            ceiling = metrics.rate_ceiling(rho) if scenario.uses_artificial_noise else 4.0
            cfg = TransmitConfig(pa, rho, rng.uniform(0.02, 0.9) * ceiling)
            if metrics.tp(scenario, noise, cfg) < 0.05:
                continue
            report = validate_scenario(scenario, noise, cfg, 1_000_000, checked)
            failures += [line for line in report.lines() if line.endswith("FAIL")]
            checked += 1
        assert not failures, failures
