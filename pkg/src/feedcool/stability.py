"""Closed-loop stability of the feedback-cooled oscillator.

Two independent verdicts are provided: an algebraic margin from the single
non-trivial row of the Hurwitz table of the closed-loop polynomial, and the
pole locations themselves via companion-matrix eigenvalues.  With the
``exp(-i omega t)`` convention the loop is stable when every pole of the
effective susceptibility lies strictly in the lower half of the complex
frequency plane (equivalently, negative real part in the Laplace variable
``s = -i omega``).

In the ``beta = 0`` limit the margin reduces to
``1 + sigma + alpha^-2 + (1 + sigma)/(q_m alpha)`` which is positive for all
admissible parameters, so instability can only come from a finite cavity
response time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FeedbackParams, SystemParams

__all__ = [
    "StabilityReport",
    "UnstableParametersError",
    "MARGINAL_BAND",
    "routh_hurwitz_margin",
    "closed_loop_polynomial",
    "closed_loop_poles",
    "stability_report",
]

# margins this small are reported as marginal and treated as unstable by the
# optimizer (conservative feasibility)
MARGINAL_BAND = 1e-9


class UnstableParametersError(ValueError):
    """The closed loop is not strictly stable for the given parameters."""


def margin_terms(sys: SystemParams, fb: FeedbackParams) -> list[float]:
    """Individual terms of the stability inequality, in printed order.

    Grouped by powers of ``beta`` with the destabilizing group last; the sum
    is positive exactly when the closed loop is stable.  The terms span about
    twelve orders of magnitude at ``q_m = 1e6``, which is why
    :func:`routh_hurwitz_margin` adds them with compensated summation.
    """
    q, be, al, sg = sys.q_m, sys.beta, fb.alpha, fb.sigma
    return [
        # beta^0 group
        1.0,
        sg,
        1.0 / al**2,
        1.0 / (q * al),
        sg / (q * al),
        # beta^3 group
        be**3 / q,
        be**3 / al,
        be**3 * al,
        # beta^2 group
        be**2,
        be**2 / q**2,
        be**2 / al**2,
        2.0 * be**2 / (q * al),
        be**2 * al / q,
        be**2 * sg / q**2,
        be**2 * sg / (q * al),
        be**2 * sg * al / q,
        # beta^1 group
        be * al,
        be * al * sg,
        2.0 * be / q,
        be / (q * al**2),
        be / al,
        be / (q**2 * al),
        be * sg / q,
        be * sg / (q**2 * al),
        # destabilizing group
        -sg * be**2,
        -be * sg / al,
        -be * sg**2 / q,
    ]


def _neumaier_sum(terms) -> float:
    total = 0.0
    comp = 0.0
    for x in terms:
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def routh_hurwitz_margin(sys: SystemParams, fb: FeedbackParams) -> float:
    """Left-hand side of the stability inequality; positive means stable.

    Equals ``(alpha q_m) *`` the non-trivial Hurwitz minor
    ``a3 a2 a1 - a4 a1^2 - a3^2 a0`` of the closed-loop quartic, summed with
    Neumaier compensation so the sign survives the cancellation near onset.
    """
    return _neumaier_sum(margin_terms(sys, fb))


def closed_loop_polynomial(sys: SystemParams, fb: FeedbackParams) -> np.ndarray:
    """Characteristic polynomial of the closed loop in the frequency variable.

    Coefficients in descending powers of ``omega``; degree 4 for ``beta > 0``
    and 3 in the ``beta = 0`` limit.  Its roots are the poles of the
    effective susceptibility.
    """
    g = 1.0 / sys.q_m
    poly = np.polymul(
        np.array([-1.0, -1j * g, 1.0]),  # 1 - w^2 - i g w
        np.array([-1j / fb.alpha, 1.0]),  # controller pole
    )
    if sys.beta > 0:
        poly = np.polymul(poly, np.array([-1j * sys.beta, 1.0]))  # cavity pole
    return np.polyadd(poly, np.array([-1j * fb.sigma * g, 0.0]))


def closed_loop_poles(sys: SystemParams, fb: FeedbackParams) -> np.ndarray:
    """Poles of the effective susceptibility (companion-matrix eigenvalues).

    Stable poles have strictly negative imaginary part; their imaginary part
    is the real part of the corresponding Laplace-plane root, so the
    intrinsic oscillator decays at ``-gamma_m / 2`` per quadrature.
    """
    return np.roots(closed_loop_polynomial(sys, fb))


@dataclass(frozen=True)
class StabilityReport:
    """Both stability verdicts side by side.

    ``agree`` is the raw comparison of the two booleans; it is only
    meaningful away from ``|rh_margin| < MARGINAL_BAND`` where either test
    may legitimately flip on rounding.
    """

    rh_margin: float
    stable_rh: bool
    poles: np.ndarray
    stable_poles: bool
    agree: bool

    @property
    def marginal(self) -> bool:
        return abs(self.rh_margin) < MARGINAL_BAND


def stability_report(sys: SystemParams, fb: FeedbackParams) -> StabilityReport:
    margin = routh_hurwitz_margin(sys, fb)
    poles = closed_loop_poles(sys, fb)
    stable_rh = margin > 0
    stable_poles = bool(np.all(poles.imag < 0))
    return StabilityReport(
        rh_margin=margin,
        stable_rh=stable_rh,
        poles=poles,
        stable_poles=stable_poles,
        agree=stable_rh == stable_poles,
    )


def require_stable(sys: SystemParams, fb: FeedbackParams) -> float:
    """Return the margin, raising if the loop is unstable or marginal."""
    margin = routh_hurwitz_margin(sys, fb)
    if margin <= MARGINAL_BAND:
        raise UnstableParametersError(
            f"closed loop unstable or marginal: stability margin = {margin:.6e} "
            f"(sigma = {fb.sigma:g}, alpha = {fb.alpha:g}, beta = {sys.beta:g})"
        )
    return margin
