"""Steady-state phonon occupancy of the feedback-cooled oscillator.

The mean occupancy follows from the position and momentum fluctuation
spectra,

    n_tot = (1/2) Integral d(omega)/(2 pi) [S_X + S_P] - 1/2,
    S_P(omega) = omega^2 S_X(omega),

and splits into physically labelled contributions: thermal bath (``th``),
radiation-pressure back-action (``ba``), fed-back imprecision noise (``fb``),
back-action/imprecision interference (``co``, negative for useful angles),
and excess vacuum from imperfect detection (``v``).

Three routes to the same number are implemented and cross-check each other:

* :func:`occupancy_bad_cavity` - compact closed forms valid in the
  instantaneous-cavity limit (``beta = 0``) for ``q_m >> alpha, 1/alpha``;
* :func:`occupancy_exact` - closed forms valid for any stable sideband
  resolution, organized in powers of ``beta`` with ``1/q_m`` coefficients,
  including the position/momentum split;
* :func:`occupancy_numeric` - direct integration of the per-source spectra
  through the determinant formula of the rational-integral module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import FeedbackParams, SystemParams, _cot, _csc2, chi_eff, noise_force_psds
from .rational import RationalIntegrand, RootConditionError, integrate_rational, pad_integrand
from .stability import UnstableParametersError, closed_loop_polynomial, require_stable

__all__ = [
    "OccupancyBreakdown",
    "ClosedLoopModel",
    "SpectraPoint",
    "assemble_closed_loop",
    "occupancy_bad_cavity",
    "theta_opt",
    "occupancy_at_theta_opt",
    "occupancy_exact",
    "occupancy_numeric",
    "spectra_pointwise",
]


@dataclass(frozen=True)
class OccupancyBreakdown:
    """Steady-state occupancy and its per-source decomposition.

    ``n_tot = n_th + n_ba + n_fb + n_co + n_v - 1/2``; the thermal term
    carries the zero-point half quantum, so a ground-state configuration
    gives ``n_th = 1/2`` and ``n_tot = 0``.  When the computing path resolves
    position and momentum separately, ``n_x``/``n_p`` hold the two quadrature
    variances (``n_tot = (n_x + n_p)/2 - 1/2``) and ``split`` maps each
    source to its ``(x, p)`` pair.
    """

    n_th: float
    n_ba: float
    n_fb: float
    n_co: float
    n_v: float
    n_tot: float
    n_x: float | None = None
    n_p: float | None = None
    split: dict[str, tuple[float, float]] | None = field(default=None, repr=False)

    def as_dict(self) -> dict[str, float]:
        return {
            "n_th": self.n_th,
            "n_ba": self.n_ba,
            "n_fb": self.n_fb,
            "n_co": self.n_co,
            "n_v": self.n_v,
            "n_tot": self.n_tot,
        }


@dataclass(frozen=True)
class ClosedLoopModel:
    """Rational-spectrum representation of the closed loop.

    ``denom`` holds the characteristic polynomial in descending powers of
    ``omega`` (degree 4 with a finite cavity response, 3 in the ``beta = 0``
    limit); its roots are the poles of the effective susceptibility and sit
    in the lower half-plane exactly when the loop is stable.  ``numerators``
    maps each noise source to the even polynomial ``g(omega)`` such that its
    position-spectrum contribution is ``g(omega) / |denom(omega)|^2``;
    coefficients are stored highest-order first over powers
    ``omega^(2n-2) ... omega^0``.
    """

    denom: np.ndarray
    numerators: dict[str, np.ndarray]


def _require_measurement(sys: SystemParams, fb: FeedbackParams) -> None:
    if fb.sigma > 0 and sys.c_cl == 0:
        raise ValueError("feedback with sigma > 0 requires a measurement, c_cl > 0")


# ---------------------------------------------------------------------------
# closed forms in the instantaneous-cavity limit
# ---------------------------------------------------------------------------

def _bad_cavity_parts(q_m, c_cl, n_bar, eta, sigma, alpha, theta):
    """Raw contributions (th, ba, fb, co, v); numpy-transparent, unvalidated."""
    denom = 1.0 + sigma + 1.0 / alpha**2
    common = 1.0 + 1.0 / alpha**2 + sigma / (2.0 * q_m * alpha)
    gain_br = 1.0 + alpha * sigma / (2.0 * q_m)
    n_th = (n_bar + 0.5) * common / denom
    n_ba = 0.25 * c_cl * common / denom
    if np.all(sigma == 0):
        n_fb = np.zeros_like(denom)
        n_co = np.zeros_like(denom)
    else:
        n_fb = sigma**2 / (4.0 * c_cl * denom) * gain_br * _csc2(theta)
        n_co = -sigma / (2.0 * alpha * denom) * gain_br * _cot(theta)
    n_v = n_fb * (1.0 / eta - 1.0)
    return n_th, n_ba, n_fb, n_co, n_v


def occupancy_bad_cavity(sys: SystemParams, fb: FeedbackParams) -> OccupancyBreakdown:
    """Occupancy from the compact ``beta = 0`` closed forms.

    Exact evaluation of the instantaneous-cavity expressions, derived under
    ``q_m >> alpha, 1/alpha`` (terms of relative size ``1/(q_m alpha)`` not
    enhanced by ``sigma`` are dropped there).  The formulas stay well defined
    outside that regime; validity is a modeling question, so it is documented
    rather than guarded.  Requires ``sys.beta == 0``.
    """
    if sys.beta != 0:
        raise ValueError("occupancy_bad_cavity requires beta = 0; use occupancy_exact")
    _require_measurement(sys, fb)
    n_th, n_ba, n_fb, n_co, n_v = _bad_cavity_parts(
        sys.q_m, sys.c_cl, sys.n_bar, sys.eta, fb.sigma, fb.alpha, fb.theta
    )
    n_tot = n_th + n_ba + n_fb + n_co + n_v - 0.5
    return OccupancyBreakdown(
        n_th=float(n_th), n_ba=float(n_ba), n_fb=float(n_fb),
        n_co=float(n_co), n_v=float(n_v), n_tot=float(n_tot),
    )


def theta_opt(sys: SystemParams, sigma: float, alpha: float) -> float:
    """Homodyne angle minimizing the occupancy at fixed gain and cutoff.

    ``arccot(c_cl * eta / (alpha * sigma))`` on the branch (0, pi/2).  For
    ``sigma = 0`` the occupancy is angle-independent and the conventional
    phase quadrature ``pi/2`` is returned.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if sigma == 0:
        return math.pi / 2
    return math.atan2(alpha * sigma, sys.c_cl * sys.eta)


def _ntot_at_theta_opt(q_m, c_cl, n_bar, eta, sigma, alpha):
    """Occupancy at the optimal angle; numpy-transparent over sigma/alpha."""
    denom = 1.0 + sigma + 1.0 / alpha**2
    return -0.5 + (1.0 / denom) * (
        (n_bar + 0.5 + 0.25 * c_cl) * (1.0 + 1.0 / alpha**2 + sigma / (2.0 * q_m * alpha))
        + (sigma**2 / (4.0 * c_cl * eta) - c_cl * eta / (4.0 * alpha**2))
        * (1.0 + alpha * sigma / (2.0 * q_m))
    )


def occupancy_at_theta_opt(sys: SystemParams, sigma: float, alpha: float) -> float:
    """Closed form for the angle-optimized occupancy at fixed (sigma, alpha).

    Algebraically identical to evaluating :func:`occupancy_bad_cavity` at
    :func:`theta_opt`; for ``sigma = 0`` the angle drops out and the value is
    ``n_bar + c_cl / 4``.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if sigma == 0:
        return sys.n_bar + 0.25 * sys.c_cl
    if sys.c_cl == 0:
        raise ValueError("feedback with sigma > 0 requires a measurement, c_cl > 0")
    return float(_ntot_at_theta_opt(sys.q_m, sys.c_cl, sys.n_bar, sys.eta, sigma, alpha))


# ---------------------------------------------------------------------------
# closed forms for arbitrary sideband resolution
# ---------------------------------------------------------------------------

def _exact_parts(q, be, c_cl, n_bar, eta, sigma, alpha, theta):
    """Per-source (x, p) pairs of the arbitrary-``beta`` closed form.

    Every bracket is a polynomial in ``beta`` whose coefficients carry the
    ``1/q_m`` corrections; all share the common denominator ``s_m``.
    Numpy-transparent and unvalidated.
    """
    al, sg = alpha, sigma
    s_m = (
        1.0 + sg + 1.0 / al**2 + (1.0 + sg) / (al * q)
        + be * (
            (1.0 - sg) / al
            + (al + 1.0 / (al * q**2)) * (1.0 + sg)
            + (2.0 + 1.0 / al**2 + sg - sg**2) / q
        )
        + be**2 * (
            1.0 + 1.0 / al**2 - sg
            + (1.0 / q) * (1.0 / q + al) * (1.0 + sg)
            + (2.0 + sg) / (al * q)
        )
        + be**3 * (1.0 / al + al + 1.0 / q)
    )
    th_x = (
        1.0 + 1.0 / al**2 + 1.0 / (al * q)
        + be * (1.0 / al + al + (2.0 + 1.0 / al**2 - sg) / q + 1.0 / (al * q**2))
        + be**2 * (1.0 + 1.0 / al**2 + (2.0 / al + al + sg / al) / q + 1.0 / q**2)
        + be**3 * (al + 1.0 / al + 1.0 / q)
    )
    th_p = (
        1.0 + 1.0 / al**2 + (1.0 + sg) / (al * q)
        + be * (1.0 / al + al + (2.0 + 1.0 / al**2 + sg) / q + (1.0 + sg) / (al * q**2))
        + be**2 * (
            1.0 + 1.0 / al**2
            + (2.0 / al + al + sg / al + al * sg) / q
            + (1.0 + sg) / q**2
        )
        + be**3 * (al + 1.0 / al + 1.0 / q)
    )
    ba_x = (
        1.0 + 1.0 / al**2 + 1.0 / (al * q)
        + be * (1.0 / al + al + (2.0 + 1.0 / al**2 - sg) / q + 1.0 / (al * q**2))
        + be**2 * ((1.0 / al + al) / q + 1.0 / q**2)
    )
    ba_p = 1.0 + 1.0 / al**2 + (1.0 + sg) / (al * q) + be * (1.0 / al + al + 1.0 / q)
    fb_x = (
        1.0 + be * (al + 1.0 / q)
        + be**2 * (1.0 + al * (1.0 + sg) / q)
        + be**3 * al
    )
    fb_p = (
        1.0 + al * (1.0 + sg) / q
        + be * (al + (1.0 + al**2 + al**2 * sg) / q + al * (1.0 + sg) / q**2)
        + be**2 * (1.0 + al * (2.0 + sg) / q + al**2 * (1.0 + sg) / q**2)
        + be**3 * (al + al**2 / q)
    )
    co_x = 1.0 + be * (2.0 * al + 1.0 / q) + be**2 * (al**2 + al / q)
    co_p = 1.0 + al * (1.0 + sg) / q + be * (2.0 * al + al**2 * (1.0 + sg) / q) + be**2 * al**2

    pref_th = (n_bar + 0.5) / s_m
    pref_ba = 0.25 * c_cl / s_m
    if np.all(sg == 0):
        zero = 0.0 * s_m
        pair_fb = (zero, zero)
        pair_co = (zero, zero)
    else:
        pref_fb = sg**2 / (4.0 * c_cl) * _csc2(theta) / s_m
        pref_co = -sg / (2.0 * al) * _cot(theta) / s_m
        pair_fb = (pref_fb * fb_x, pref_fb * fb_p)
        pair_co = (pref_co * co_x, pref_co * co_p)
    excess = 1.0 / eta - 1.0
    return {
        "th": (pref_th * th_x, pref_th * th_p),
        "ba": (pref_ba * ba_x, pref_ba * ba_p),
        "fb": pair_fb,
        "co": pair_co,
        "v": (pair_fb[0] * excess, pair_fb[1] * excess),
    }


def _breakdown_from_split(split: dict[str, tuple[float, float]]) -> OccupancyBreakdown:
    per_source = {k: 0.5 * (x + p) for k, (x, p) in split.items()}
    n_x = sum(x for x, _ in split.values())
    n_p = sum(p for _, p in split.values())
    return OccupancyBreakdown(
        n_th=per_source["th"], n_ba=per_source["ba"], n_fb=per_source["fb"],
        n_co=per_source["co"], n_v=per_source["v"],
        n_tot=0.5 * (n_x + n_p) - 0.5,
        n_x=n_x, n_p=n_p, split=split,
    )


def occupancy_exact(sys: SystemParams, fb: FeedbackParams) -> OccupancyBreakdown:
    """Occupancy from the arbitrary-``beta`` closed forms, with X/P split.

    Valid whenever the closed loop is strictly stable; raises
    :class:`~feedcool.stability.UnstableParametersError` otherwise.  Away
    from the ``beta = 0`` limit feedback breaks equipartition, so the
    position and momentum contributions of each source generally differ.
    """
    _require_measurement(sys, fb)
    require_stable(sys, fb)
    raw = _exact_parts(
        sys.q_m, sys.beta, sys.c_cl, sys.n_bar, sys.eta, fb.sigma, fb.alpha, fb.theta
    )
    split = {k: (float(x), float(p)) for k, (x, p) in raw.items()}
    return _breakdown_from_split(split)


# ---------------------------------------------------------------------------
# direct spectral integration
# ---------------------------------------------------------------------------

def assemble_closed_loop(sys: SystemParams, fb: FeedbackParams) -> ClosedLoopModel:
    """Per-source rational numerators over the closed-loop denominator.

    The position spectrum of source ``s`` is
    ``numerators[s](omega) / |denom(omega)|^2``; the cavity and controller
    poles shared between susceptibility and force spectra have been
    cancelled, which keeps every numerator two orders below the denominator
    pair and the momentum-weighted integrals convergent.
    """
    _require_measurement(sys, fb)
    g = 1.0 / sys.q_m
    al, be, th = fb.alpha, sys.beta, fb.theta
    n_bar, c_cl = sys.n_bar, sys.c_cl
    therm = 2.0 * g * (n_bar + 0.5)
    if fb.sigma == 0:
        k_fb = 0.0
        k_co = 0.0
    else:
        k_fb = 0.5 * fb.sigma**2 * g / c_cl * _csc2(th)
        k_co = -fb.sigma * g * (be + 1.0 / al) * _cot(th)
    if be > 0:
        numerators = {
            "th": therm * np.array([0.0, be**2 / al**2, 1.0 / al**2 + be**2, 1.0]),
            "ba": 0.5 * c_cl * g * np.array([0.0, 0.0, 1.0 / al**2, 1.0]),
            "fb": k_fb * np.array([0.0, be**2, 1.0, 0.0]),
            "co": k_co * np.array([0.0, 0.0, 1.0, 0.0]),
        }
    else:
        numerators = {
            "th": therm * np.array([0.0, 1.0 / al**2, 1.0]),
            "ba": 0.5 * c_cl * g * np.array([0.0, 1.0 / al**2, 1.0]),
            "fb": k_fb * np.array([0.0, 1.0, 0.0]),
            "co": k_co * np.array([0.0, 1.0, 0.0]),
        }
    numerators["v"] = numerators["fb"] * (1.0 / sys.eta - 1.0)
    return ClosedLoopModel(denom=closed_loop_polynomial(sys, fb), numerators=numerators)


def _reflect(poly: np.ndarray) -> np.ndarray:
    """p(omega) -> p(-omega) for descending coefficients."""
    n = len(poly) - 1
    return np.array([poly[k] * (-1) ** (n - k) for k in range(n + 1)])


def _momentum_integrand(ri: RationalIntegrand) -> RationalIntegrand:
    """Integrand of the omega^2-weighted spectrum over the same denominator.

    Shifts the even numerator up by one power of omega^2; the assembled
    sources always leave the leading slot free, so the shift fits the degree
    bound.  A full-degree numerator cannot be shifted: its omega^2-weighted
    integrand tends to a constant at infinity and the momentum variance
    diverges.
    """
    if ri.b[0] != 0.0:
        raise ValueError(
            "numerator already has full degree 2n-2; the omega^2-weighted "
            "spectrum is not integrable"
        )
    return RationalIntegrand(a=ri.a, b=np.append(ri.b[1:], 0.0))


def occupancy_numeric(
    sys: SystemParams, fb: FeedbackParams, check_padding: bool = False
) -> OccupancyBreakdown:
    """Occupancy by direct integration of the per-source spectra.

    Each position-spectrum term and its ``omega^2``-weighted momentum
    counterpart is integrated exactly through the determinant formula, after
    reflecting the closed-loop denominator into the upper half-plane
    convention the formula requires.  ``check_padding=True`` additionally
    re-evaluates every integral on a padded integrand and asserts agreement
    to 1e-9 relative (debug profile).

    Raises
    ------
    UnstableParametersError
        When the loop is unstable; a root-condition failure inside the
        integrator is translated into the same diagnostic.
    """
    require_stable(sys, fb)
    model = assemble_closed_loop(sys, fb)
    h = _reflect(model.denom)
    split: dict[str, tuple[float, float]] = {}
    for name, num in model.numerators.items():
        ri = RationalIntegrand(a=h, b=num)
        try:
            n_x = integrate_rational(ri) / (2.0 * math.pi)
            n_p = integrate_rational(_momentum_integrand(ri), check_roots=False) / (2.0 * math.pi)
        except RootConditionError as exc:
            raise UnstableParametersError(
                f"closed-loop pole reached the real axis while integrating '{name}': {exc}"
            ) from exc
        if check_padding:
            for candidate, reference in ((ri, n_x), (_momentum_integrand(ri), n_p)):
                padded_val = integrate_rational(pad_integrand(candidate, 1.0), check_roots=False)
                if abs(padded_val / (2.0 * math.pi) - reference) > 1e-9 * max(abs(reference), 1e-30):
                    raise AssertionError(
                        f"padding invariance violated for source '{name}'"
                    )
        split[name] = (n_x, n_p)
    return _breakdown_from_split(split)


# ---------------------------------------------------------------------------
# pointwise spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectraPoint:
    """Position and momentum fluctuation spectral densities at one frequency."""

    s_x: float
    s_p: float


def spectra_pointwise(omega, sys: SystemParams, fb: FeedbackParams) -> SpectraPoint:
    """Total position spectrum ``|chi_eff|^2 * sum(source densities)`` and its
    momentum counterpart ``omega^2 * S_X``.

    The interference term can push individual summands negative, but the
    total is a genuine spectral density and stays nonnegative.
    """
    psds = noise_force_psds(omega, sys, fb)
    s_x = np.abs(chi_eff(omega, sys, fb)) ** 2 * psds.total()
    s_p = np.asarray(omega, dtype=float) ** 2 * s_x
    if np.ndim(s_x) == 0:
        return SpectraPoint(s_x=float(s_x), s_p=float(s_p))
    return SpectraPoint(s_x=s_x, s_p=s_p)
