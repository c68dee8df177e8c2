"""Stability margin versus pole locations."""

import math
import random

import numpy as np
import pytest

from feedcool import (
    FeedbackParams,
    SystemParams,
    closed_loop_poles,
    closed_loop_polynomial,
    routh_hurwitz_margin,
    stability_report,
)
from feedcool.stability import MARGINAL_BAND, _neumaier_sum, margin_terms


def draw_params(rng):
    sys_p = SystemParams(q_m=10 ** rng.uniform(1, 9), beta=10 ** rng.uniform(-6, 0.5))
    fb = FeedbackParams(
        sigma=10 ** rng.uniform(-2, 8),
        alpha=10 ** rng.uniform(-2, 2),
        theta=rng.uniform(0.05, math.pi / 2),
    )
    return sys_p, fb


class TestMargin:
    @pytest.mark.parametrize("sigma", [0.0, 1.0, 1e3, 1e7])
    @pytest.mark.parametrize("alpha", [0.1, 1.0, 30.0])
    def test_bad_cavity_limit_is_always_stable(self, sigma, alpha):
        sys_p = SystemParams(q_m=1e6, beta=0.0)
        fb = FeedbackParams(sigma=sigma, alpha=alpha)
        margin = routh_hurwitz_margin(sys_p, fb)
        expected = 1.0 + sigma + alpha**-2 + (1.0 + sigma) / (sys_p.q_m * alpha)
        assert margin == pytest.approx(expected, rel=1e-14)
        assert margin > 0

    def test_no_feedback_is_always_stable(self):
        rng = np.random.RandomState(4)
        for _ in range(100):
            sys_p = SystemParams(q_m=10 ** rng.uniform(1, 8), beta=10 ** rng.uniform(-4, 1))
            fb = FeedbackParams(sigma=0.0, alpha=10 ** rng.uniform(-2, 2))
            assert routh_hurwitz_margin(sys_p, fb) > 0

    def test_margin_is_reordering_invariant(self):
        sys_p = SystemParams(q_m=1e6, beta=0.45, c_cl=1.0)
        fb = FeedbackParams(sigma=2.2e3, alpha=1.1)
        terms = margin_terms(sys_p, fb)
        reference = _neumaier_sum(terms)
        shuffler = random.Random(99)
        for _ in range(20):
            shuffled = list(terms)
            shuffler.shuffle(shuffled)
            assert _neumaier_sum(shuffled) == pytest.approx(reference, rel=1e-12)


class TestPoles:
    def test_intrinsic_oscillator_decay_rate(self):
        # free oscillator: each quadrature decays at half the energy rate
        sys_p = SystemParams(q_m=1e4, beta=0.0)
        fb = FeedbackParams(sigma=0.0, alpha=1.0)
        poles = closed_loop_poles(sys_p, fb)
        g = 1.0 / sys_p.q_m
        mech = sorted(poles, key=lambda p: abs(abs(p.real) - 1.0))[:2]
        for p in mech:
            assert p.imag == pytest.approx(-g / 2.0, rel=1e-6)

    @pytest.mark.parametrize(
        "beta,expected_degree", [(0.0, 3), (0.2, 4), (1.5, 4)]
    )
    def test_pole_count_matches_degree(self, beta, expected_degree):
        sys_p = SystemParams(q_m=1e5, beta=beta, c_cl=1.0)
        fb = FeedbackParams(sigma=3.0, alpha=0.8)
        poly = closed_loop_polynomial(sys_p, fb)
        assert len(poly) - 1 == expected_degree
        assert len(closed_loop_poles(sys_p, fb)) == expected_degree

    def test_instability_onset_matches_margin_zero(self):
        # finite cavity response destabilizes at large gain; both predicates
        # must locate the same onset
        sys_p = SystemParams(q_m=1e3, beta=0.5)

        def margin_stable(sigma):
            return routh_hurwitz_margin(sys_p, FeedbackParams(sigma=sigma, alpha=1.0)) > 0

        def poles_stable(sigma):
            poles = closed_loop_poles(sys_p, FeedbackParams(sigma=sigma, alpha=1.0))
            return bool(np.all(poles.imag < 0))

        def bisect(predicate):
            lo, hi = 1.0, 1e9
            assert predicate(lo) and not predicate(hi)
            while hi / lo > 1.0 + 1e-10:
                mid = math.sqrt(lo * hi)
                if predicate(mid):
                    lo = mid
                else:
                    hi = mid
            return math.sqrt(lo * hi)

        onset_margin = bisect(margin_stable)
        onset_poles = bisect(poles_stable)
        assert onset_margin == pytest.approx(onset_poles, rel=1e-6)


class TestOracleAgreement:
    def test_verdicts_agree_outside_marginal_band(self):
        rng = np.random.RandomState(2024)
        tested = 0
        for _ in range(1000):
            sys_p, fb = draw_params(rng)
            report = stability_report(sys_p, fb)
            if abs(report.rh_margin) < MARGINAL_BAND:
                continue
            tested += 1
            assert report.agree, (sys_p, fb, report.rh_margin)
        assert tested > 900  # the marginal band must not swallow the sample

    def test_report_fields_consistent(self):
        sys_p = SystemParams(q_m=1e3, beta=0.5)
        stable = stability_report(sys_p, FeedbackParams(sigma=10.0, alpha=1.0))
        assert stable.stable_rh and stable.stable_poles and stable.agree
        assert not stable.marginal
        unstable = stability_report(sys_p, FeedbackParams(sigma=1e5, alpha=1.0))
        assert not unstable.stable_rh and not unstable.stable_poles and unstable.agree
