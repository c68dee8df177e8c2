"""Deterministic optimization and sweep behavior."""

import math

import numpy as np
import pytest

from feedcool import (
    SystemParams,
    optimize_alpha,
    optimize_joint,
    sweep_cq,
    sweep_sigma,
)

REFERENCE_SYSTEM = SystemParams(q_m=1e6, beta=0.0, c_cl=4.2e5, n_bar=2.1e4, eta=1.0)


class TestOptimizeAlpha:
    def test_cutoff_shrinks_inversely_with_gain(self):
        sigmas = np.geomspace(1e4, 1e7, 7)
        records = [optimize_alpha(REFERENCE_SYSTEM, float(s)) for s in sigmas]
        alphas = np.array([r.alpha for r in records])
        assert np.all(np.diff(alphas) < 0)
        # alpha_opt * sigma approaches a constant at large gain
        products = alphas * sigmas
        assert np.ptp(products[2:]) / products[-1] < 0.05

    def test_phase_quadrature_branch_also_shrinks(self):
        sigmas = np.geomspace(1e4, 1e7, 5)
        alphas = [optimize_alpha(REFERENCE_SYSTEM, float(s), "pi2").alpha for s in sigmas]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))

    def test_fb_to_co_ratio_constant_along_optimized_sweep(self):
        ratios = []
        for sigma in np.geomspace(1e4, 1e7, 7):
            b = optimize_alpha(REFERENCE_SYSTEM, float(sigma)).breakdown
            ratios.append(b.n_fb / b.n_co)
        spread = (max(ratios) - min(ratios)) / abs(ratios[-1])
        assert spread < 0.01

    def test_grid_refinement_stability(self):
        coarse = optimize_alpha(REFERENCE_SYSTEM, 3e5, grid_points=400)
        fine = optimize_alpha(REFERENCE_SYSTEM, 3e5, grid_points=800)
        assert fine.n_tot == pytest.approx(coarse.n_tot, rel=1e-8)

    def test_optimum_beats_grid_samples(self):
        record = optimize_alpha(REFERENCE_SYSTEM, 1e5)
        from feedcool import occupancy_at_theta_opt

        for alpha in np.geomspace(1e-2, 1e2, 60):
            assert record.n_tot <= occupancy_at_theta_opt(REFERENCE_SYSTEM, 1e5, float(alpha)) * (
                1 + 1e-12
            )

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            optimize_alpha(REFERENCE_SYSTEM, 1.0, theta_mode="bogus")
        with pytest.raises(ValueError):
            optimize_alpha(REFERENCE_SYSTEM, 1.0, path="bogus")

    def test_exact_path_respects_stability(self):
        sys_p = SystemParams(q_m=1e3, beta=0.5, c_cl=1e4, n_bar=100.0)
        record = optimize_alpha(sys_p, 1.2e3, path="exact")
        assert record.margin > 0
        assert math.isfinite(record.n_tot)


class TestSweepSigma:
    table = sweep_sigma(REFERENCE_SYSTEM, np.geomspace(1e4, 1e7, 9))

    def test_thermal_to_back_action_ratio_locked(self):
        # both contributions share the same spectral shape, so their ratio is
        # (n_bar + 1/2) / (c_cl / 4) at every point
        expected = (REFERENCE_SYSTEM.n_bar + 0.5) / (REFERENCE_SYSTEM.c_cl / 4.0)
        for rec in self.table.records:
            assert rec.breakdown.n_th / rec.breakdown.n_ba == pytest.approx(
                expected, rel=1e-10
            )

    def test_angle_stays_near_52_degrees(self):
        angles = [math.degrees(r.theta) for r in self.table.records]
        assert all(50.0 < a < 54.0 for a in angles)

    def test_optimized_angle_dominates_phase_quadrature(self):
        for rec, comp in zip(self.table.records, self.table.comparison):
            assert rec.n_tot <= comp.n_tot

    def test_everything_feasible(self):
        for rec in self.table.records + self.table.comparison:
            assert rec.margin > 0

    def test_determinism(self):
        again = sweep_sigma(REFERENCE_SYSTEM, np.geomspace(1e4, 1e7, 9))
        for a, b in zip(self.table.records, again.records):
            assert a.alpha == b.alpha and a.n_tot == b.n_tot and a.theta == b.theta

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            sweep_sigma(REFERENCE_SYSTEM, [])


class TestSweepCq:
    def test_joint_optimum_tracks_cooperativity(self):
        table = sweep_cq(REFERENCE_SYSTEM, [0.1, 10.0, 1000.0])
        angles = [math.degrees(r.theta) for r in table.records]
        assert angles[0] > 85.0
        assert angles[0] > angles[1] > angles[2]
        for rec, comp in zip(table.records, table.comparison):
            assert rec.n_tot <= comp.n_tot * (1 + 1e-12)

    def test_requires_thermal_reference(self):
        sys_p = SystemParams(q_m=1e6, beta=0.0, c_cl=1.0, n_bar=0.0)
        with pytest.raises(ValueError):
            sweep_cq(sys_p, [1.0])
        with pytest.raises(ValueError):
            sweep_cq(REFERENCE_SYSTEM, [0.0, 1.0])


class TestOptimizeJoint:
    def test_agrees_with_outer_scan(self):
        record = optimize_joint(REFERENCE_SYSTEM)
        # the joint optimum must not be beaten by any point of a dense scan
        for sigma in np.geomspace(1e4, 1e7, 25):
            assert record.n_tot <= optimize_alpha(REFERENCE_SYSTEM, float(sigma)).n_tot * (
                1 + 1e-9
            )
        assert record.mode == "sigma,alpha|theta_opt"

    def test_threaded_sweep_matches_serial(self, monkeypatch):
        grid = np.geomspace(1e5, 1e6, 4)
        serial = sweep_sigma(REFERENCE_SYSTEM, grid)
        monkeypatch.setenv("FEEDCOOL_THREADS", "4")
        threaded = sweep_sigma(REFERENCE_SYSTEM, grid)
        for a, b in zip(serial.records, threaded.records):
            assert a.alpha == b.alpha and a.n_tot == b.n_tot
