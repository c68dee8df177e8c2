"""Embedded cross-validation suite.

Runs the convention lock of the rational-integral formula, the padding
invariance, the agreement of the three occupancy paths, and the agreement of
the two stability verdicts, on fixed deterministic inputs.  Intended both as
a post-install smoke test (``feedcool selfcheck``) and as a mutation target:
perturbing any one of the underlying routines flips at least one check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import FeedbackParams, SystemParams
from .occupancy import occupancy_bad_cavity, occupancy_exact, occupancy_numeric
from .rational import RationalIntegrand, integrate_rational, pad_integrand
from .stability import MARGINAL_BAND, routh_hurwitz_margin, stability_report

__all__ = ["CheckResult", "SelfCheckReport", "run_selfcheck"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class SelfCheckReport:
    results: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            out.append(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}: {r.detail}")
        out.append(f"selfcheck: {'all checks passed' if self.ok else 'FAILURES detected'}")
        return out


def _convention_lock() -> CheckResult:
    # 1/(w^2+1) written as -1/((w - i)(-w - i)); pins both the alternating
    # sign factor and the upper-half-plane root convention at once
    value = integrate_rational(RationalIntegrand(a=[1.0, -1j], b=[-1.0]))
    err = abs(value - math.pi) / math.pi
    return CheckResult(
        "rational-integral convention lock",
        err < 1e-12,
        f"integral = {value:.15g}, relative error vs pi = {err:.2e}",
    )


def _padding_invariance() -> CheckResult:
    base = RationalIntegrand(a=[1.0, -1j], b=[-1.0])
    ref = integrate_rational(base)
    worst = 0.0
    for lam in (0.5, 1.0, 7.0):
        padded = integrate_rational(pad_integrand(base, lam))
        worst = max(worst, abs(padded - ref) / abs(ref))
    return CheckResult(
        "padding invariance",
        worst < 1e-9,
        f"worst relative shift over lambda sweep = {worst:.2e}",
    )


def _three_paths() -> CheckResult:
    details = []
    ok = True

    # finite cavity response: closed form vs direct integration
    worst_exact = 0.0
    for beta, sigma, alpha, theta in [
        (0.1, 50.0, 2.0, 1.0),
        (0.3, 200.0, 1.3, 0.9),
        (0.02, 5.0, 0.7, 1.4),
    ]:
        sys = SystemParams(q_m=1e6, beta=beta, c_cl=1e5, n_bar=1e4, eta=0.9)
        fb = FeedbackParams(sigma=sigma, alpha=alpha, theta=theta)
        a = occupancy_exact(sys, fb).n_tot
        b = occupancy_numeric(sys, fb).n_tot
        worst_exact = max(worst_exact, abs(a - b) / abs(a))
    ok &= worst_exact < 1e-6
    details.append(f"closed-form vs integration (beta > 0): {worst_exact:.2e}")

    # instantaneous cavity: compact closed form vs direct integration
    # (sigma kept small; the compact form drops 1/(q_m alpha) terms whose
    # relative weight grows with sigma)
    worst_bad = 0.0
    for sigma, alpha in [(0.01, 0.1), (0.005, 1.0), (0.01, 10.0)]:
        sys = SystemParams(q_m=1e6, beta=0.0, c_cl=2e4, n_bar=1e3, eta=0.8)
        fb = FeedbackParams(sigma=sigma, alpha=alpha, theta=1.1)
        a = occupancy_bad_cavity(sys, fb).n_tot
        b = occupancy_numeric(sys, fb).n_tot
        worst_bad = max(worst_bad, abs(a - b) / abs(a))
    ok &= worst_bad < 1e-8
    details.append(f"compact vs integration (beta = 0): {worst_bad:.2e}")

    # compact closed form as the small-beta limit of the general one
    worst_limit = 0.0
    sys = SystemParams(q_m=1e6, beta=1e-6, c_cl=4.2e5, n_bar=2.1e4, eta=1.0)
    sys0 = SystemParams(q_m=1e6, beta=0.0, c_cl=4.2e5, n_bar=2.1e4, eta=1.0)
    for sigma in (1.0, 100.0, 1e4):
        fb = FeedbackParams(sigma=sigma, alpha=1.5, theta=0.9)
        a = occupancy_exact(sys, fb)
        b = occupancy_bad_cavity(sys0, fb)
        for key, av in a.as_dict().items():
            bv = b.as_dict()[key]
            if av == bv == 0.0:
                continue
            worst_limit = max(worst_limit, abs(av - bv) / max(abs(av), abs(bv)))
    ok &= worst_limit < 1e-3
    details.append(f"small-beta limit per contribution: {worst_limit:.2e}")

    return CheckResult("three-path occupancy agreement", bool(ok), "; ".join(details))


def _stability_oracle() -> CheckResult:
    rng = np.random.RandomState(20211122)
    disagreements = 0
    tested = 0
    for _ in range(200):
        sys = SystemParams(q_m=10 ** rng.uniform(1, 8), beta=10 ** rng.uniform(-4, 0.5))
        fb = FeedbackParams(
            sigma=10 ** rng.uniform(-2, 7),
            alpha=10 ** rng.uniform(-2, 2),
            theta=rng.uniform(0.05, math.pi / 2),
        )
        if abs(routh_hurwitz_margin(sys, fb)) < MARGINAL_BAND:
            continue
        tested += 1
        if not stability_report(sys, fb).agree:
            disagreements += 1
    return CheckResult(
        "stability margin vs pole locations",
        disagreements == 0,
        f"{disagreements} disagreements on {tested} non-marginal draws",
    )


def run_selfcheck() -> SelfCheckReport:
    results = [
        _convention_lock(),
        _padding_invariance(),
        _three_paths(),
        _stability_oracle(),
    ]
    return SelfCheckReport(results=results)
