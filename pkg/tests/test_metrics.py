"""
Tests for the analytic TP, SOP and detection metrics.

The SOP oracle below integrates the outage event directly from the SINR
definitions with scipy, without going through the library's closed forms.
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import integrate, stats

from covert_lab import metrics
from covert_lab.exceptions import DomainError, FeasibilityError
from covert_lab.link_model import ALL_SCENARIOS, FA, FP, IA, IP, NoiseProfile, TransmitConfig

E_INV = math.exp(-1.0)


def sop_oracle(scenario, noise, pa, rho, rs):
    """P(C_b - C_e < R_s | C_b >= R_s) by one scipy quadrature over Bob's gain."""
    q = 2.0 ** rs - 1.0
    if not scenario.uses_artificial_noise:
        rho = 1.0
    c = noise.attacker_noise if scenario.is_friend else noise.sigma_e2
    head = rho - q * (1.0 - rho)
    g0 = q * noise.sigma_b2 / (pa * head)

    def snr_b(g):
        return rho * pa * g / ((1.0 - rho) * pa * g + noise.sigma_b2)

    def eve_exceeds(s):
        if s <= 0.0:
            return 1.0
        d = rho - s * (1.0 - rho)
        if d <= 0.0:
            return 0.0
        t = s * c / (pa * d)
        return (1.0 + t) * math.exp(-t) if scenario.is_friend else math.exp(-t)

    # outage: 1 + snr_e > (1 + snr_b) / 2^R_s
    f = lambda g: math.exp(-(g - g0)) * eve_exceeds((1.0 + snr_b(g)) / 2.0 ** rs - 1.0)
    val, _ = integrate.quad(f, g0, g0 + 60.0, epsabs=1e-14, epsrel=1e-12, limit=500)
    return val


class TestTransmissionProbability:
    def test_examples(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        assert metrics.tp_pc(noise, 0.01, 0.0) == 1.0
        # Monte Carlo oracle value of P(C_b >= 1) at sigma_b2 = pa = 0.01
        assert metrics.tp_pc(noise, 0.01, 1.0) == pytest.approx(0.367879, abs=1e-6)
        assert metrics.tp_pc(noise, 1e9, 1.0) >= 1 - 1e-8

    def test_an_examples(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        assert metrics.tp_an(noise, 0.01, 1.0, 0.7) == metrics.tp_pc(noise, 0.01, 0.7)
        assert metrics.tp_an(noise, 0.01, 0.5, 1.0) == 0.0
        assert metrics.tp_an(noise, 0.01, 0.75, 0.5) == pytest.approx(0.5269, abs=1e-3)

    def test_rate_ceiling(self):
        assert metrics.rate_ceiling(0.5) == pytest.approx(1.0)
        assert metrics.tp_an(NoiseProfile(0.01, 1, 1), 0.01, 0.75, 2.5) == 0.0

    @given(st.floats(1e-4, 10.0), st.floats(0.0, 4.0), st.floats(1e-3, 1.0))
    def test_tp_pc_increasing_in_power(self, pa, rs, sb2):
        noise = NoiseProfile(sb2, 1.0, 1.0)
        assume(rs > 1e-3)
        lo, hi = metrics.tp_pc(noise, pa, rs), metrics.tp_pc(noise, pa * 1.01, rs)
        assert 0.0 <= lo <= hi <= 1.0
        if 1e-300 < lo < 1.0 - 1e-12:
            assert hi > lo

    def test_arrays_match_scalars(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        rs = np.linspace(0.0, 2.0, 9)
        np.testing.assert_allclose(metrics.tp_pc_array(noise, 0.02, rs), [metrics.tp_pc(noise, 0.02, r) for r in rs], rtol=1e-14)
        np.testing.assert_allclose(
            metrics.tp_an_array(noise, 0.02, 0.7, rs), [metrics.tp_an(noise, 0.02, 0.7, r) for r in rs], rtol=1e-14
        )


class TestSecrecyOutageClosedForms:
    def test_sop_ip_examples(self):
        assert metrics.sop_ip(NoiseProfile(1.0, 1.0, 1.0), 0.0) == 0.5
        assert metrics.sop_ip(NoiseProfile(0.01, 1.0, 1.0), 1.0) == pytest.approx(0.02 / 1.02, rel=1e-12)

    def test_sop_ip_inversion(self):
        noise = NoiseProfile(0.01, 1.0, 2.0)
        eps = 0.07
        rs = math.log2(noise.sigma_e2 * eps / ((1 - eps) * noise.sigma_b2))
        assert metrics.sop_ip(noise, rs) == pytest.approx(eps, rel=1e-12)

    def test_sop_fp_examples(self):
        assert metrics.sop_fp(NoiseProfile(1.0, 1.0, 1.0), 0.0) == pytest.approx(5 / 9, rel=1e-12)
        assert metrics.sop_fp(NoiseProfile(0.01, 1.0, 1.0), 60.0) == pytest.approx(1.0, abs=1e-12)

    def test_sop_fp_inversion(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        eps = 0.1
        r = math.sqrt(1 - eps)
        rs = math.log2((1 - r) * noise.attacker_noise / (noise.sigma_b2 * r))
        assert metrics.sop_fp(noise, rs) == pytest.approx(eps, rel=1e-10)

    @pytest.mark.parametrize("scenario", [IP, FP])
    @pytest.mark.parametrize("rs", [0.01, 0.5, 2.0])
    def test_against_quadrature_oracle(self, scenario, rs):
        noise = NoiseProfile(0.01, 0.5, 2.0)
        fn = metrics.sop_fp if scenario.is_friend else metrics.sop_ip
        assert fn(noise, rs) == pytest.approx(sop_oracle(scenario, noise, 0.3, 1.0, rs), rel=1e-8)

    @given(st.floats(0.0, 5.0), st.floats(1e-3, 1.0), st.floats(0.1, 10.0))
    def test_increasing_in_rate_and_bounded(self, rs, sb2, se2):
        noise = NoiseProfile(sb2, 1.0, se2)
        for fn in (metrics.sop_ip, metrics.sop_fp):
            lo, hi = fn(noise, rs), fn(noise, rs + 0.05)
            assert 0.0 <= lo < hi <= 1.0


class TestSecrecyOutageArtificialNoise:
    def test_default_setting_value(self, base_noise):
        # oracle-frozen value; also confirmed against simulation in test_monte_carlo
        assert metrics.sop_ia(base_noise, 0.01, 0.75, 0.25) == pytest.approx(
            sop_oracle(IA, base_noise, 0.01, 0.75, 0.25), rel=1e-7
        )
        assert 0.0 <= metrics.sop_ia(base_noise, 0.01, 0.75, 0.25) <= 1.0

    @pytest.mark.parametrize("scenario", [IA, FA])
    @pytest.mark.parametrize(
        "pa, rho, rs",
        [(0.01, 0.75, 0.25), (0.05, 0.3, 0.2), (0.001, 0.95, 1.5), (1.0, 0.6, 0.05), (0.03, 0.9, 3.0)],
    )
    def test_against_quadrature_oracle(self, scenario, pa, rho, rs):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        fn = metrics.sop_fa if scenario.is_friend else metrics.sop_ia
        assert fn(noise, pa, rho, rs) == pytest.approx(sop_oracle(scenario, noise, pa, rho, rs), rel=1e-7, abs=1e-12)

    def test_small_rate_limit(self, base_noise):
        # as R_s -> 0 the outage event is SNR_e > SNR_b, probability sigma_b2/(sigma_b2+sigma_e2)
        limit = base_noise.sigma_b2 / (base_noise.sigma_b2 + base_noise.sigma_e2)
        assert metrics.sop_ia(base_noise, 0.01, 0.75, 1e-6) == pytest.approx(limit, rel=1e-4)
        quiet = NoiseProfile(1e-4, 1.0, 1.0)
        assert metrics.sop_ia(quiet, 0.01, 0.75, 1e-6) <= 1e-3
        assert metrics.sop_fa(quiet, 0.01, 0.75, 1e-6) <= 1e-3

    @pytest.mark.parametrize("seed", range(5))
    def test_rho_to_one_limit(self, seed):
        rng = np.random.default_rng(seed)
        noise = NoiseProfile(*10 ** (rng.uniform(-3, 0, 3)))
        pa, rs = 10 ** rng.uniform(-3, 0), rng.uniform(0.05, 3.0)
        rho = 1 - 1e-9
        assert metrics.tp_an(noise, pa, rho, rs) == pytest.approx(metrics.tp_pc(noise, pa, rs), abs=1e-4)
        assert metrics.sop_ia(noise, pa, rho, rs) == pytest.approx(metrics.sop_ip(noise, rs), abs=1e-4)
        assert metrics.sop_fa(noise, pa, rho, rs) == pytest.approx(metrics.sop_fp(noise, rs), abs=1e-4)

    def test_printed_form_agrees_at_moderate_rho(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        for pa, rho, rs in [(0.01, 0.75, 0.25), (0.05, 0.5, 0.5), (0.2, 0.3, 0.1)]:
            assert metrics.sop_ia_printed(noise, pa, rho, rs) == pytest.approx(metrics.sop_ia(noise, pa, rho, rs), rel=1e-7)

    def test_above_ceiling(self, base_noise):
        with pytest.raises(FeasibilityError):
            metrics.sop_ia(base_noise, 0.01, 0.5, 1.0)
        with pytest.raises(DomainError):
            metrics.sop_fa(base_noise, 0.01, 0.5, 0.0)

    def test_near_ceiling_tends_to_one(self, base_noise):
        ceiling = metrics.rate_ceiling(0.75)
        assert metrics.sop_ia(base_noise, 0.01, 0.75, ceiling * (1 - 1e-6)) > 0.99

    def test_sop_array_matches_adaptive(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        rho = np.array([0.3, 0.75, 0.9, 0.99])
        rs = np.array([0.2, 0.25, 1.0, 3.0])
        for scenario, fn in ((IA, metrics.sop_ia), (FA, metrics.sop_fa)):
            arr = metrics.sop_array(scenario, noise, 0.02, rho, rs)
            np.testing.assert_allclose(arr, [fn(noise, 0.02, r, s) for r, s in zip(rho, rs)], rtol=1e-7)

    @given(
        st.sampled_from([IA, FA]),
        st.floats(-30.0, 0.0),
        st.floats(0.05, 0.99),
        st.floats(0.01, 0.98),
    )
    def test_bounded_and_increasing(self, scenario, pa_db, rho, frac):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        pa = 10 ** (pa_db / 10)
        rs = frac * metrics.rate_ceiling(rho)
        assume(rs > 1e-4)
        fn = metrics.sop_fa if scenario.is_friend else metrics.sop_ia
        lo, hi = fn(noise, pa, rho, rs), fn(noise, pa, rho, rs * 1.01)
        assert 0.0 <= lo <= hi + 1e-9 <= 1.0 + 1e-9


class TestDetection:
    def test_thresholds(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        assert metrics.theta_star(IP, noise, 0.5) == pytest.approx(1.01)
        assert metrics.theta_star(FP, noise, 0.5) == pytest.approx(2.01)
        assert metrics.theta_star(FA, noise, 1.0, 0.5) == pytest.approx(2 + 2 * math.log(2), rel=1e-12)
        assert metrics.theta_star(IA, noise, 1.0, 0.5) == pytest.approx(1 + math.log(2), rel=1e-12)

    def test_ia_threshold_is_grid_argmax(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        grid = np.linspace(1.0 + 1e-6, 11.0, 100_001)
        values = [metrics.cop(IA, noise, 1.0, 0.5, t) for t in grid]
        assert grid[int(np.argmax(values))] == pytest.approx(1 + math.log(2), abs=2e-4)

    def test_pc_step_below_floor(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        errs = metrics.detection_errors(IP, noise, 0.5, 1.0, 0.9)
        assert (errs.p_fa, errs.p_md) == (1.0, 0.0)

    def test_fp_missed_detection(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        errs = metrics.detection_errors(FP, noise, 1.0, 1.0, 3.0)
        # P(g_aw + g_ae <= 1): shape-2 gamma CDF
        assert errs.p_md == pytest.approx(stats.gamma.cdf(1.0, 2), rel=1e-12)
        assert errs.p_md == pytest.approx(1 - 2 * E_INV, rel=1e-12)

    def test_ia_errors(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        errs = metrics.detection_errors(IA, noise, 1.0, 0.5, 1 + math.log(2))
        assert errs.p_fa == pytest.approx(0.25, rel=1e-12)
        assert errs.p_md == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("scenario", ALL_SCENARIOS)
    def test_cop_zero_at_or_below_floor(self, scenario):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        floor = metrics.noise_floor(scenario, noise)
        assert metrics.cop(scenario, noise, 0.1, 0.6, floor) == 0.0
        assert metrics.cop(scenario, noise, 0.1, 0.6, floor - 0.5) == 0.0

    def test_reduced_forms(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        assert metrics.cop_at_optimal_theta(IA, noise, 1.0, 0.5) == pytest.approx(0.25, rel=1e-12)
        assert metrics.cop_at_optimal_theta(FA, noise, 1.0, 0.5) == pytest.approx(0.36079, abs=1e-4)
        pa = -0.01 / math.log(0.2)
        assert metrics.cop_at_optimal_theta(IP, noise, pa) == pytest.approx(0.2, rel=1e-14)
        from covert_lab.numerics import lambert_wm1

        pa = -0.01 / (1 + lambert_wm1(-0.2 / math.e))
        assert metrics.cop_at_optimal_theta(FP, noise, pa) == pytest.approx(0.2, rel=1e-12)
        assert metrics.cop_at_optimal_theta(IA, noise, 1.0, 0.773) == pytest.approx(0.5, abs=2e-3)

    @pytest.mark.parametrize("scenario", ALL_SCENARIOS)
    @pytest.mark.parametrize("pa, rho", [(0.01, 0.75), (1.0, 0.5), (0.3, 0.2)])
    def test_reduced_form_equals_cop_at_threshold(self, scenario, pa, rho):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        theta = metrics.theta_star(scenario, noise, pa, rho)
        assert metrics.cop_at_optimal_theta(scenario, noise, pa, rho) == pytest.approx(
            metrics.cop(scenario, noise, pa, rho, theta), rel=1e-12, abs=1e-300
        )

    def test_cop_ip_increasing_in_power(self):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        values = [metrics.cop_at_optimal_theta(IP, noise, p) for p in np.geomspace(1e-4, 10, 50)]
        assert np.all(np.diff(values) > 0)

    @given(
        st.sampled_from(ALL_SCENARIOS),
        st.floats(1e-3, 10.0),
        st.floats(0.01, 1.0),
        st.floats(-1.0, 10.0),
    )
    def test_identity_and_range(self, scenario, pa, rho, offset):
        noise = NoiseProfile(0.01, 1.0, 1.0)
        theta = metrics.noise_floor(scenario, noise) + offset
        errs = metrics.detection_errors(scenario, noise, pa, rho, theta)
        value = metrics.cop(scenario, noise, pa, rho, theta)
        assert 0.0 <= errs.p_fa <= 1.0 and 0.0 <= errs.p_md <= 1.0
        assert value == pytest.approx(1.0 - errs.p_fa - errs.p_md, abs=1e-12)
        assert -1e-12 <= value <= 1.0


class TestDispatch:
    @pytest.mark.parametrize("scenario", ALL_SCENARIOS)
    def test_metric_set_in_unit_interval(self, scenario, base_noise):
        ms = metrics.metric_set(scenario, base_noise, TransmitConfig(0.01, 0.75, 0.25))
        for v in (ms.tp, ms.cop, ms.sop):
            assert 0.0 <= v <= 1.0

    def test_pc_ignores_rho(self, base_noise):
        a = metrics.metric_set(IP, base_noise, TransmitConfig(0.01, 0.3, 0.25))
        b = metrics.metric_set(IP, base_noise, TransmitConfig(0.01, 1.0, 0.25))
        assert a == b
