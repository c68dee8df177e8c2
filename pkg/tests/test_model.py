"""Transfer functions, parameter validation, and the force noise budget."""

import math

import numpy as np
import pytest

from feedcool import (
    FeedbackParams,
    SystemParams,
    chi_eff,
    derived_params,
    effective_freq_damping,
    gain_impulse_weight,
    gain_spectral,
    gain_time,
    interference_coefficients,
    noise_force_psds,
    quadrature_oracle,
)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(q_m=0.0),
        dict(q_m=-1.0),
        dict(q_m=1e6, beta=-0.1),
        dict(q_m=1e6, c_cl=-1.0),
        dict(q_m=1e6, n_bar=-2.0),
        dict(q_m=1e6, eta=0.0),
        dict(q_m=1e6, eta=1.5),
    ],
)
def test_system_params_validation(kwargs):
    with pytest.raises(ValueError):
        SystemParams(**kwargs)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(sigma=-1.0),
        dict(sigma=1.0, alpha=0.0),
        dict(sigma=1.0, theta=0.0),
        dict(sigma=1.0, theta=math.pi / 2 + 0.01),
        dict(sigma=1.0, theta=-0.3),
    ],
)
def test_feedback_params_validation(kwargs):
    with pytest.raises(ValueError):
        FeedbackParams(**kwargs)


def test_derived_params():
    sys_p = SystemParams(q_m=1e6, beta=0.5, c_cl=4.2e5, n_bar=2.1e4, eta=0.8)
    fb = FeedbackParams(sigma=100.0, alpha=2.0, theta=1.0)
    d = derived_params(sys_p, fb)
    assert d.c_q == pytest.approx(20.0)
    assert d.gamma_meas_over_gamma_m == 4.2e5
    kappa = 2.0 / 0.5
    assert d.sigma_abs == pytest.approx(100.0 / (math.sqrt(kappa * 0.8) * math.sin(1.0)))
    # bad-cavity limit: infinite kappa suppresses the absolute gain entirely
    sys0 = SystemParams(q_m=1e6, beta=0.0, c_cl=1.0, n_bar=0.0)
    assert derived_params(sys0, fb).sigma_abs == 0.0


class TestGainSpectral:
    fb = FeedbackParams(sigma=3.0, alpha=2.0)

    def test_dc_value_vanishes(self):
        assert gain_spectral(0.0, self.fb) == 0.0

    def test_high_frequency_limit(self):
        value = gain_spectral(1e9, self.fb)
        assert abs(value) == pytest.approx(self.fb.sigma * self.fb.alpha, rel=1e-8)
        # algebraic limit of (-i w)/(1 - i w/alpha) is +alpha
        assert value.real == pytest.approx(self.fb.sigma * self.fb.alpha, rel=1e-8)

    def test_value_at_cutoff(self):
        # independent evaluation: multiply through by the conjugate denominator
        value = gain_spectral(self.fb.alpha, self.fb)
        sg, al = self.fb.sigma, self.fb.alpha
        independent = sg * (-1j * al) * (1 + 1j) / 2.0
        assert value == pytest.approx(independent, rel=1e-15)
        assert abs(value) == pytest.approx(sg * al / math.sqrt(2.0), rel=1e-15)
        assert np.angle(value) == pytest.approx(-math.pi / 4, abs=1e-15)


class TestGainTime:
    fb = FeedbackParams(sigma=1.7, alpha=2.0)

    def test_zero_before_impulse(self):
        assert gain_time(-0.5, self.fb) == 0.0
        assert np.all(gain_time(np.array([-3.0, -1e-9]), self.fb) == 0.0)

    def test_impulse_weight(self):
        assert gain_impulse_weight(self.fb) == pytest.approx(self.fb.sigma * self.fb.alpha)

    def test_tail_shape(self):
        t = 0.7
        expected = -self.fb.sigma * self.fb.alpha**2 * math.exp(-self.fb.alpha * t)
        assert gain_time(t, self.fb) == pytest.approx(expected, rel=1e-15)

    @pytest.mark.parametrize("omega", [0.1, 0.5, 1.0, 2.0, 5.0])
    def test_fourier_transform_matches_spectral_gain(self, omega):
        # impulse weight plus trapezoidal transform of the smooth tail
        span = 50.0 / self.fb.alpha
        t = np.linspace(0.0, span, 200001)
        tail = gain_time(t, self.fb)
        transform = gain_impulse_weight(self.fb) + np.trapezoid(
            tail * np.exp(1j * omega * t), t
        )
        expected = gain_spectral(omega, self.fb)
        assert abs(transform - expected) / abs(expected) < 1e-4


class TestChiEff:
    sys0 = SystemParams(q_m=1e6, beta=0.0, c_cl=1e4, n_bar=1e3)

    def test_no_feedback_reduces_to_intrinsic_susceptibility(self):
        fb = FeedbackParams(sigma=0.0, alpha=2.0, theta=1.0)
        g = 1.0 / self.sys0.q_m
        for omega in (0.0, 0.3, 1.0, 2.7, 15.0):
            intrinsic = 1.0 / (1.0 - omega**2 - 1j * g * omega)
            assert chi_eff(omega, self.sys0, fb) == pytest.approx(intrinsic, rel=1e-15)

    def test_small_beta_converges_to_bad_cavity_branch(self):
        sys_b = SystemParams(q_m=1e6, beta=1e-6, c_cl=1e4, n_bar=1e3)
        fb = FeedbackParams(sigma=10.0, alpha=2.0, theta=1.0)
        a = chi_eff(1.0, sys_b, fb)
        b = chi_eff(1.0, self.sys0, fb)
        assert abs(a - b) / abs(b) < 1e-4

    def test_inverse_modulus_matches_effective_parameters(self):
        fb = FeedbackParams(sigma=40.0, alpha=1.3, theta=1.0)
        g = 1.0 / self.sys0.q_m
        for omega in np.linspace(0.05, 4.0, 40):
            w_eff, gamma_eff = effective_freq_damping(omega, self.sys0, fb)
            lhs = 1.0 / abs(chi_eff(omega, self.sys0, fb)) ** 2
            rhs = (w_eff**2 - omega**2) ** 2 + (gamma_eff * g * omega) ** 2
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestEffectiveFreqDamping:
    sys0 = SystemParams(q_m=1e6, beta=0.0, c_cl=1e4, n_bar=1e3)

    def test_no_feedback(self):
        w_eff, gamma_eff = effective_freq_damping(1.0, self.sys0, FeedbackParams(sigma=0.0))
        assert w_eff == 1.0
        assert gamma_eff == 1.0

    def test_broadening_at_resonance(self):
        fb = FeedbackParams(sigma=25.0, alpha=1.7)
        _, gamma_eff = effective_freq_damping(1.0, self.sys0, fb)
        assert gamma_eff - 1.0 == pytest.approx(fb.sigma / (1.0 + fb.alpha**-2), rel=1e-14)

    def test_broadening_dies_off_at_high_frequency(self):
        fb = FeedbackParams(sigma=25.0, alpha=1.7)
        _, gamma_eff = effective_freq_damping(1e8, self.sys0, fb)
        assert gamma_eff == pytest.approx(1.0, abs=1e-10)

    def test_rejected_for_finite_cavity_response(self):
        sys_b = SystemParams(q_m=1e6, beta=0.2, c_cl=1e4, n_bar=1e3)
        with pytest.raises(ValueError):
            effective_freq_damping(1.0, sys_b, FeedbackParams(sigma=1.0))


class TestNoisePsds:
    sys_p = SystemParams(q_m=1e6, beta=0.1, c_cl=1e4, n_bar=1e3, eta=0.8)

    def test_phase_quadrature_kills_interference(self):
        fb = FeedbackParams(sigma=30.0, alpha=2.0, theta=math.pi / 2)
        for omega in (0.1, 1.0, 3.0):
            assert noise_force_psds(omega, self.sys_p, fb).s_co == 0.0

    def test_perfect_detection_kills_excess_vacuum(self):
        sys_p = SystemParams(q_m=1e6, beta=0.1, c_cl=1e4, n_bar=1e3, eta=1.0)
        fb = FeedbackParams(sigma=30.0, alpha=2.0, theta=1.0)
        assert noise_force_psds(1.0, sys_p, fb).s_v == 0.0

    def test_no_feedback_leaves_thermal_and_back_action(self):
        fb = FeedbackParams(sigma=0.0, alpha=2.0, theta=1.0)
        p = noise_force_psds(0.7, self.sys_p, fb)
        assert p.s_fb == p.s_co == p.s_v == 0.0
        g = 1.0 / self.sys_p.q_m
        expected_ba = 0.5 * self.sys_p.c_cl * g / (1.0 + self.sys_p.beta**2 * 0.7**2)
        assert p.s_ba == pytest.approx(expected_ba, rel=1e-15)
        assert p.s_th == pytest.approx(2.0 * g * (self.sys_p.n_bar + 0.5), rel=1e-15)

    def test_no_feedback_occupancy_by_quadrature(self):
        # integrating the sigma = 0 spectra must give back the free result
        # n_bar + c_cl/4; pins the rate normalization of every density
        sys_p = SystemParams(q_m=1e4, beta=0.0, c_cl=20.0, n_bar=5.0, eta=1.0)
        fb = FeedbackParams(sigma=0.0, alpha=1.0, theta=1.0)

        def weighted(w):
            p = noise_force_psds(w, sys_p, fb)
            return (1.0 + w * w) * abs(chi_eff(w, sys_p, fb)) ** 2 * p.total()

        n_tot = quadrature_oracle(weighted, rel_tol=1e-10, points=(-1.0, 1.0)) / (
            4.0 * math.pi
        ) - 0.5
        assert n_tot == pytest.approx(sys_p.n_bar + sys_p.c_cl / 4.0, rel=1e-8)

    def test_angle_dependence_factorizes(self):
        # interior angles only: at exactly pi/2 the interference weight is
        # identically zero and the tan(theta) rescaling is degenerate
        thetas = [0.2, 0.6, 1.0, 1.4, 1.55]
        ref_fb = ref_co = None
        for theta in thetas:
            fb = FeedbackParams(sigma=30.0, alpha=2.0, theta=theta)
            p = noise_force_psds(1.3, self.sys_p, fb)
            scaled_fb = p.s_fb * math.sin(theta) ** 2
            scaled_co = p.s_co * math.tan(theta)
            if ref_fb is None:
                ref_fb, ref_co = scaled_fb, scaled_co
            else:
                assert scaled_fb == pytest.approx(ref_fb, rel=1e-13)
                assert scaled_co == pytest.approx(ref_co, rel=1e-13)

    def test_individual_densities_nonnegative(self):
        fb = FeedbackParams(sigma=30.0, alpha=2.0, theta=0.8)
        for omega in np.linspace(0.0, 6.0, 61):
            p = noise_force_psds(omega, self.sys_p, fb)
            assert p.s_th >= 0 and p.s_ba >= 0 and p.s_fb >= 0 and p.s_v >= 0
            assert p.s_co <= 0  # cot(theta) > 0 on (0, pi/2)

    def test_feedback_without_measurement_rejected(self):
        sys_p = SystemParams(q_m=1e6, beta=0.0, c_cl=0.0, n_bar=1e3)
        with pytest.raises(ValueError):
            noise_force_psds(1.0, sys_p, FeedbackParams(sigma=1.0))


class TestInterferenceCoefficients:
    sys_p = SystemParams(q_m=1e6, beta=0.0, c_cl=400.0, n_bar=10.0, eta=1.0)

    def test_phase_quadrature_gives_pure_back_action(self):
        fb = FeedbackParams(sigma=30.0, alpha=2.0, theta=math.pi / 2)
        expected = math.sqrt(self.sys_p.c_cl / self.sys_p.q_m)
        for omega in (0.2, 1.0, 4.0):
            c = interference_coefficients(omega, self.sys_p, fb)
            assert c.coef_x == pytest.approx(expected, rel=1e-12)

    def test_phase_coefficient_modulus(self):
        fb = FeedbackParams(sigma=30.0, alpha=2.0, theta=0.9)
        for omega in (0.5, 1.0, 2.0):
            c = interference_coefficients(omega, self.sys_p, fb)
            expected = abs(gain_spectral(omega, fb)) * math.sqrt(
                1.0 / (self.sys_p.q_m * self.sys_p.c_cl)
            )
            assert abs(c.coef_y) == pytest.approx(expected, rel=1e-12)

    def test_matched_cancellation_geometry(self):
        # at alpha = 1 and sigma = c_cl the fed-back amplitude noise has half
        # the back-action power and sits at 3 pi/4; with theta = pi/4 the two
        # quadrature coefficients then match in modulus with pi/2 between them
        sys_p = self.sys_p
        fb = FeedbackParams(sigma=sys_p.c_cl, alpha=1.0, theta=math.pi / 4)
        c = interference_coefficients(1.0, sys_p, fb)
        assert abs(c.coef_x) == pytest.approx(abs(c.coef_y), rel=1e-12)
        relative = np.angle(c.coef_x / c.coef_y)
        assert abs(relative) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_regime_guard(self):
        fb = FeedbackParams(sigma=1.0, alpha=1.0, theta=1.0)
        with pytest.raises(ValueError):
            interference_coefficients(
                1.0, SystemParams(q_m=1e6, beta=0.1, c_cl=400.0, n_bar=10.0), fb
            )
        with pytest.raises(ValueError):
            interference_coefficients(
                1.0, SystemParams(q_m=1e6, beta=0.0, c_cl=400.0, n_bar=10.0, eta=0.9), fb
            )
