import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagnac_deutsch.deutsch import FunctionClass
from sagnac_deutsch.labsim import (
    InvalidConfigError,
    SweepConfig,
    UndefinedContrastError,
    classify_counts,
    contrast_ratio,
    detection_probs,
    expected_counts,
    fit_fringe,
    fit_visibility,
    point_stream,
    proper_phase_voltages,
    sample_counts,
    simulate_sweep,
    voltage_to_phase,
)
from sagnac_deutsch.optics import OracleKind

CONSTANT = [OracleKind.CONSTANT_ZERO, OracleKind.CONSTANT_ONE]
BALANCED = [OracleKind.BALANCED_IDENTITY, OracleKind.BALANCED_INVERSE]
DEFAULTS = SweepConfig()


class TestConfig:
    @pytest.mark.parametrize(
        "changes",
        [
            {"v_step": 0.0},
            {"v_step": -1.0},
            {"v_end": -1.0},
            {"visibility": 1.2},
            {"extinction": 0.6},
            {"drift_per_volt": -0.1},
            {"background_prob": 1.0},
            {"rate": -5.0},
            {"volts_per_period": 0.0},
            {"rate": math.nan},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises(InvalidConfigError):
            SweepConfig(**changes)

    def test_default_grid(self):
        g = DEFAULTS.grid()
        assert len(g) == 35
        assert g[0] == 0.0 and g[-1] == 34.0


class TestCalibration:
    @pytest.mark.parametrize("v, phi", [(0.0, 0.0), (8.5, math.pi), (34.0, 4 * math.pi)])
    def test_defaults(self, v, phi):
        assert voltage_to_phase(v, DEFAULTS) == pytest.approx(phi, abs=1e-12)

    def test_offset(self):
        cfg = SweepConfig(phase_offset=0.3)
        assert voltage_to_phase(0.0, cfg) == pytest.approx(0.3)

    def test_proper_phase_voltages(self):
        assert proper_phase_voltages(0, 34, DEFAULTS) == pytest.approx([8.5, 25.5])
        cfg = SweepConfig(phase_offset=math.pi / 2)
        for v in proper_phase_voltages(0, 34, cfg):
            assert math.cos(voltage_to_phase(v, cfg)) == pytest.approx(-1.0, abs=1e-12)
        assert proper_phase_voltages(0, 34, cfg) == pytest.approx([4.25, 21.25])


class TestDetectionProbs:
    @pytest.mark.parametrize("kind", BALANCED)
    def test_ideal_balanced_at_pi(self, kind):
        p = detection_probs(kind, math.pi, DEFAULTS)
        assert (p.p_h, p.p_v) == pytest.approx((1.0, 0.0), abs=1e-12)

    def test_visibility_mixing(self):
        cfg = SweepConfig(visibility=0.96)
        p = detection_probs(OracleKind.BALANCED_IDENTITY, math.pi, cfg)
        assert (p.p_h, p.p_v) == pytest.approx((0.98, 0.02), abs=1e-12)
        phis = np.linspace(0, 2 * math.pi, 2001)
        ph = [detection_probs(OracleKind.BALANCED_IDENTITY, x, cfg).p_h for x in phis]
        assert (max(ph) - min(ph)) / (max(ph) + min(ph)) == pytest.approx(0.96, abs=1e-9)

    @pytest.mark.parametrize("kind", CONSTANT)
    @pytest.mark.parametrize("phi", [0.0, 1.3, math.pi])
    def test_extinction_constant(self, kind, phi):
        p = detection_probs(kind, phi, SweepConfig(extinction=2e-4))
        assert (p.p_h, p.p_v) == pytest.approx((2e-4, 0.9998), abs=1e-12)
        assert abs(p.p_v - p.p_h) == pytest.approx(0.9996, abs=1e-12)

    @pytest.mark.parametrize("kind", CONSTANT)
    def test_visibility_does_not_touch_constant(self, kind):
        p = detection_probs(kind, 1.0, SweepConfig(visibility=0.3))
        assert p.p_v == pytest.approx(1.0, abs=1e-12)

    @given(
        st.sampled_from(list(OracleKind)),
        st.floats(-20, 20),
        st.floats(0, 1),
        st.floats(0, 0.5),
    )
    def test_sum_to_one(self, kind, phi, nu, eps):
        p = detection_probs(kind, phi, SweepConfig(visibility=nu, extinction=eps))
        assert abs(p.p_h + p.p_v - 1.0) <= 1e-12


class TestSampling:
    def test_zero_rate(self):
        cfg = SweepConfig(rate=0.0)
        r = sample_counts(OracleKind.BALANCED_IDENTITY, 3.0, cfg, point_stream(0, OracleKind.BALANCED_IDENTITY, 0))
        assert (r.counts_d1, r.counts_d2) == (0, 0)

    def test_balanced_proper_point_mean(self):
        cfg = SweepConfig(rate=1e5)
        kind = OracleKind.BALANCED_IDENTITY
        draws = [sample_counts(kind, 8.5, cfg, point_stream(s, kind, 0)) for s in range(100)]
        c1 = np.array([d.counts_d1 for d in draws])
        assert all(d.counts_d2 == 0 for d in draws)
        # mean of 100 Poisson(1e5) draws has sd sqrt(1e5)/10
        assert abs(c1.mean() - 1e5) <= 3 * math.sqrt(1e5) / 10

    @pytest.mark.parametrize("kind", CONSTANT)
    def test_constant_defaults(self, kind):
        r = sample_counts(kind, 12.0, DEFAULTS, point_stream(7, kind, 12))
        assert r.counts_d1 == 0
        assert abs(r.counts_d2 - 1.5e5) < 6 * math.sqrt(1.5e5)

    def test_expected_counts_with_drift_and_background(self):
        cfg = SweepConfig(drift_per_volt=0.01, background_prob=2.5e-4)
        mu1, mu2 = expected_counts(OracleKind.CONSTANT_ZERO, 10.0, cfg)
        assert mu1 == pytest.approx(0.0, abs=1e-6)
        assert mu2 == pytest.approx(1.5e5 * 0.9 * (1 + 2.5e-4), rel=1e-12)

    def test_drift_clamps_at_zero(self):
        cfg = SweepConfig(drift_per_volt=0.1)
        assert expected_counts(OracleKind.CONSTANT_ZERO, 20.0, cfg) == (0.0, 0.0)


class TestSweep:
    def test_balanced_defaults(self):
        recs = simulate_sweep(OracleKind.BALANCED_IDENTITY, DEFAULTS)
        assert len(recs) == 35
        for r in recs:
            mean = 1.5e5 * (1 - math.cos(r.phase)) / 2
            assert abs(r.counts_d1 - mean) <= 6 * math.sqrt(mean) + 1
            assert r.phase == voltage_to_phase(r.voltage, DEFAULTS)

    def test_constant_no_d1(self):
        recs = simulate_sweep(OracleKind.CONSTANT_ZERO, DEFAULTS)
        assert len(recs) == 35
        assert all(r.counts_d1 == 0 for r in recs)

    def test_drift_decreases_d2(self):
        cfg = SweepConfig(drift_per_volt=0.005)
        recs = simulate_sweep(OracleKind.CONSTANT_ONE, cfg)
        v = np.array([r.voltage for r in recs])
        c2 = np.array([r.counts_d2 for r in recs])
        slope, intercept = np.polyfit(v, c2, 1)
        assert slope == pytest.approx(-0.005 * 1.5e5, rel=0.05)
        assert intercept == pytest.approx(1.5e5, rel=0.01)

    def test_deterministic(self):
        cfg = SweepConfig(visibility=0.9, extinction=0.01, seed=123)
        assert simulate_sweep(OracleKind.BALANCED_INVERSE, cfg) == simulate_sweep(OracleKind.BALANCED_INVERSE, cfg)

    def test_order_independent(self):
        cfg = SweepConfig(seed=5)
        kind = OracleKind.BALANCED_IDENTITY
        recs = simulate_sweep(kind, cfg)
        grid = cfg.grid()
        for i in reversed(range(len(grid))):
            assert sample_counts(kind, grid[i], cfg, point_stream(5, kind, i)) == recs[i]

    def test_seeds_and_kinds_differ(self):
        a = simulate_sweep(OracleKind.BALANCED_IDENTITY, SweepConfig(seed=1))
        b = simulate_sweep(OracleKind.BALANCED_IDENTITY, SweepConfig(seed=2))
        assert a != b

    def test_visibility_contrast_link(self):
        cfg = SweepConfig(visibility=0.83, v_step=0.5, v_end=17.0)
        recs = simulate_sweep(OracleKind.BALANCED_IDENTITY, cfg, noiseless=True)
        c1 = [r.counts_d1 for r in recs]
        assert (max(c1) - min(c1)) / (max(c1) + min(c1)) == pytest.approx(0.83, abs=1e-9)

    @pytest.mark.parametrize("kind", CONSTANT)
    @pytest.mark.parametrize("eps", [0.0, 2e-4, 0.01, 0.2])
    def test_extinction_contrast_link(self, kind, eps):
        recs = simulate_sweep(kind, SweepConfig(extinction=eps), noiseless=True)
        for r in recs:
            assert contrast_ratio(r.counts_d1, r.counts_d2).eta == pytest.approx(1 - 2 * eps, abs=1e-12)

    def test_shot_noise_scaling(self):
        eps = 0.01
        cfg = SweepConfig(extinction=eps, rate=2e4)
        kind = OracleKind.CONSTANT_ONE
        inside = 0
        for seed in range(200):
            r = sample_counts(kind, 5.0, cfg, point_stream(seed, kind, 0))
            n = r.counts_d1 + r.counts_d2
            eta = contrast_ratio(r.counts_d1, r.counts_d2).eta
            inside += abs(eta - (1 - 2 * eps)) <= 5 / math.sqrt(n)
        assert inside / 200 >= 0.99

    def test_proper_phase_discrimination(self):
        for kind in OracleKind:
            mu1, mu2 = expected_counts(kind, 8.5, DEFAULTS)
            if kind.is_balanced:
                assert mu2 == pytest.approx(0.0, abs=1e-6) and mu1 == pytest.approx(1.5e5)
            else:
                assert mu1 == pytest.approx(0.0, abs=1e-6) and mu2 == pytest.approx(1.5e5)


class TestContrast:
    def test_all_on_one_detector(self):
        assert contrast_ratio(0, 12345).eta == 1.0
        assert contrast_ratio(0, 12345).eta_std == 0.0

    def test_arithmetic(self):
        rep = contrast_ratio(100, 50)
        assert rep.eta == pytest.approx(1 / 3)
        assert rep.eta_std == pytest.approx(2 * math.sqrt(100 * 50 * 150) / 150**2)
        assert rep.n_points == 1

    def test_error_propagation_by_finite_difference(self):
        c1, c2 = 400.0, 9000.0
        h = 1e-3

        def eta(a, b):
            return abs(a - b) / (a + b)

        d1 = (eta(c1 + h, c2) - eta(c1 - h, c2)) / (2 * h)
        d2 = (eta(c1, c2 + h) - eta(c1, c2 - h)) / (2 * h)
        expected = math.sqrt(d1**2 * c1 + d2**2 * c2)
        assert contrast_ratio(c1, c2).eta_std == pytest.approx(expected, rel=1e-6)

    def test_ideal_constant_run(self):
        recs = simulate_sweep(OracleKind.CONSTANT_ZERO, DEFAULTS)
        rep = contrast_ratio([r.counts_d1 for r in recs], [r.counts_d2 for r in recs])
        assert rep.eta == 1.0 and rep.n_points == 35

    def test_zero_total(self):
        with pytest.raises(UndefinedContrastError):
            contrast_ratio(0, 0)


class TestFit:
    def test_monte_carlo_self_consistency(self):
        cfg = SweepConfig(visibility=0.96, seed=42)
        nu = fit_visibility(simulate_sweep(OracleKind.BALANCED_IDENTITY, cfg), cfg)
        assert 0.95 <= float(nu) <= 0.97
        assert not nu.flat

    def test_exact_recovery(self):
        recs = simulate_sweep(OracleKind.BALANCED_IDENTITY, DEFAULTS, noiseless=True)
        fit = fit_visibility(recs, DEFAULTS)
        assert fit.amplitude / fit.offset == pytest.approx(1.0, abs=1e-6)
        assert fit.visibility == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("nu", [0.2, 0.5, 0.9])
    def test_recovery_with_drift_and_offset(self, nu):
        cfg = SweepConfig(visibility=nu, drift_per_volt=0.005, phase_offset=0.7)
        fit = fit_visibility(simulate_sweep(OracleKind.BALANCED_INVERSE, cfg, noiseless=True), cfg)
        assert fit.visibility == pytest.approx(nu, abs=1e-9)
        assert math.cos(fit.phase - 0.7) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("kind", CONSTANT)
    @pytest.mark.parametrize("eps", [0.0, 2e-4])
    def test_constant_is_flat(self, kind, eps):
        cfg = SweepConfig(extinction=eps, seed=3)
        fit = fit_visibility(simulate_sweep(kind, cfg), cfg)
        assert fit.flat and fit.visibility == 0.0

    def test_too_few_records(self):
        cfg = SweepConfig(v_end=5.0)
        with pytest.raises(ValueError):
            fit_visibility(simulate_sweep(OracleKind.BALANCED_IDENTITY, cfg), cfg)

    def test_short_span(self):
        cfg = SweepConfig(v_end=10.0, v_step=0.5)
        with pytest.raises(ValueError):
            fit_fringe(cfg.grid(), np.ones(len(cfg.grid())), cfg)


class TestClassifyCounts:
    def test_decisions(self):
        assert classify_counts(150000, 10) is FunctionClass.BALANCED
        assert classify_counts(10, 150000) is FunctionClass.CONSTANT
        assert classify_counts(100, 100) is FunctionClass.INDETERMINATE
        assert classify_counts(0, 0) is FunctionClass.INDETERMINATE


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(list(OracleKind)))
def test_determinism_property(seed, kind):
    cfg = SweepConfig(seed=seed, visibility=0.95, extinction=1e-3, v_end=10)
    assert simulate_sweep(kind, cfg) == simulate_sweep(kind, cfg)
