"""Dimensionless model of a feedback-cooled oscillator with homodyne readout.

A mechanical mode is monitored through an optical cavity driven on resonance,
the homodyne photocurrent at local-oscillator angle ``theta`` is filtered by a
derivative-plus-low-pass controller, and the resulting force is fed back onto
the mechanics.  Everything in this package is expressed through dimensionless
ratios:

* frequencies in units of the mechanical resonance frequency,
* the loop gain in units of the intrinsic mechanical damping rate,
* the cavity linewidth through the sideband resolution factor
  ``beta = 2 omega_m / kappa`` (``beta = 0`` encodes the instantaneous-cavity
  limit),
* the measurement strength through the classical cooperativity ``c_cl``.

Spectral densities are symmetrized and two-sided, with vacuum quadrature
level 1/2; a thermal bath at occupancy ``n_bar`` drives the oscillator with a
white force of density ``2 (n_bar + 1/2) / q_m``.  The local-oscillator angle
is restricted to ``(0, pi/2]``; ``theta = pi/2`` is the phase quadrature that
carries the position signal, smaller angles deliberately mix in amplitude
noise so that part of the radiation-pressure back-action can be cancelled by
interference in the feedback loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "FeedbackParams",
    "DerivedParams",
    "derived_params",
    "gain_spectral",
    "gain_time",
    "gain_impulse_weight",
    "chi_eff",
    "effective_freq_damping",
    "NoiseForcePsds",
    "noise_force_psds",
    "InterferenceCoefficients",
    "interference_coefficients",
]


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless physical configuration of the optomechanical system.

    Attributes
    ----------
    q_m : float
        Mechanical quality factor ``omega_m / gamma_m``, > 0.
    beta : float
        Sideband resolution factor ``2 omega_m / kappa`` >= 0.  ``beta = 0``
        selects the idealized instantaneous-cavity (bad-cavity) limit.
    c_cl : float
        Classical cooperativity ``4 g_om^2 / (kappa gamma_m)`` >= 0, the
        ideal measurement rate in units of the mechanical damping rate.
    n_bar : float
        Thermal bath phonon occupancy >= 0.
    eta : float
        Net detection efficiency in (0, 1].
    """

    q_m: float
    beta: float = 0.0
    c_cl: float = 0.0
    n_bar: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        if not self.q_m > 0:
            raise ValueError(f"q_m must be positive, got {self.q_m}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.c_cl < 0:
            raise ValueError(f"c_cl must be nonnegative, got {self.c_cl}")
        if self.n_bar < 0:
            raise ValueError(f"n_bar must be nonnegative, got {self.n_bar}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class FeedbackParams:
    """Controller configuration.

    Attributes
    ----------
    sigma : float
        Rescaled feedback gain >= 0, in units of the mechanical damping rate.
    alpha : float
        Cutoff ratio ``omega_fb / omega_m`` > 0 of the low-pass stage.
    theta : float
        Local-oscillator angle in radians, in (0, pi/2].
    """

    sigma: float
    alpha: float = 1.0
    theta: float = math.pi / 2

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.theta <= math.pi / 2:
            raise ValueError(
                f"theta must lie in (0, pi/2], got {self.theta}; angles in "
                "(pi/2, pi) map onto this branch by reflection symmetry"
            )


@dataclass(frozen=True)
class DerivedParams:
    """Ratios derived from the primary parameters.

    ``c_q`` is the quantum cooperativity ``c_cl / n_bar`` (measurement rate
    over thermal decoherence rate), ``gamma_meas_over_gamma_m`` the ideal
    measurement rate in damping-rate units (equal to ``c_cl``), and
    ``sigma_abs`` the absolute loop gain ``sigma / (sqrt(kappa eta) sin
    theta)`` in resonance-frequency units, which grows when the detection is
    inefficient or the angle moves away from the phase quadrature.
    """

    c_q: float
    gamma_meas_over_gamma_m: float
    sigma_abs: float


def derived_params(sys: SystemParams, fb: FeedbackParams) -> DerivedParams:
    if sys.n_bar > 0:
        c_q = sys.c_cl / sys.n_bar
    else:
        c_q = math.inf if sys.c_cl > 0 else 0.0
    if sys.beta > 0:
        kappa = 2.0 / sys.beta
        sigma_abs = fb.sigma / (math.sqrt(kappa * sys.eta) * math.sin(fb.theta))
    else:
        sigma_abs = 0.0  # kappa -> infinity
    return DerivedParams(c_q=c_q, gamma_meas_over_gamma_m=sys.c_cl, sigma_abs=sigma_abs)


def _cot(theta):
    """cot(theta) with the representable pi/2 standing for the exact phase
    quadrature, where the interference weight vanishes identically."""
    theta = np.asarray(theta, dtype=float)
    safe = np.where(theta == math.pi / 2, 1.0, np.tan(theta))
    out = np.where(theta == math.pi / 2, 0.0, 1.0 / safe)
    return float(out) if out.ndim == 0 else out


def _csc2(theta):
    # 1 + cot^2 keeps the phase-quadrature value exactly 1
    return 1.0 + _cot(theta) ** 2


def gain_spectral(omega, fb: FeedbackParams):
    """Loop filter in the frequency domain, in units of the damping rate.

    A derivative gain rolled off by a single low-pass pole at the cutoff
    ratio ``alpha``::

        sigma * (-i omega) / (1 - i omega / alpha)

    using the ``exp(-i omega t)`` transform convention.  The feedback term of
    the inverse susceptibility is this value divided by ``q_m`` (and filtered
    once more by the cavity pole away from the ``beta = 0`` limit).  Vanishes
    at DC and tends to ``sigma * alpha`` in modulus at high frequency, where
    the filter acts as a pure low-passed differentiator.
    """
    return fb.sigma * (-1j * omega) / (1.0 - 1j * omega / fb.alpha)


def gain_impulse_weight(fb: FeedbackParams) -> float:
    """Weight of the delta distribution at t = 0 in the time-domain kernel."""
    return fb.sigma * fb.alpha


def gain_time(t, fb: FeedbackParams):
    """Smooth part of the time-domain feedback kernel.

    The kernel is the derivative of a causal exponential and splits into a
    delta distribution of weight ``sigma * alpha`` at t = 0 (see
    :func:`gain_impulse_weight`) plus the smooth tail returned here,
    ``-sigma * alpha^2 * exp(-alpha t)`` for t >= 0 and zero before the
    impulse.  Time is in units of the inverse resonance frequency, the kernel
    in damping-rate units; the impulse weight plus the transform of the tail
    reproduce :func:`gain_spectral` exactly.
    """
    t = np.asarray(t, dtype=float)
    # clamp keeps the dead branch of np.where from overflowing exp at t << 0
    tail = np.where(t >= 0, -fb.sigma * fb.alpha**2 * np.exp(-fb.alpha * np.maximum(t, 0.0)), 0.0)
    if tail.ndim == 0:
        return float(tail)
    return tail


def chi_eff(omega, sys: SystemParams, fb: FeedbackParams):
    """Effective mechanical susceptibility of the closed loop.

    Parameters
    ----------
    omega : float or ndarray
        Frequency in resonance-frequency units.
    sys, fb : SystemParams, FeedbackParams

    Returns
    -------
    complex or ndarray
        ``1 / (omega_eff^2(omega) - omega^2 - i gamma_eff(omega) omega / q_m)``
        in the ``beta = 0`` limit; for ``beta > 0`` the loop gain acquires the
        cavity pole ``1 / (1 - i beta omega)``.

    The function is total away from real-axis poles; whether the closed loop
    is actually stable is the caller's concern (see the stability module).
    """
    g = 1.0 / sys.q_m
    if sys.beta == 0:
        w_eff, gamma_eff = effective_freq_damping(omega, sys, fb)
        return 1.0 / (w_eff**2 - omega**2 - 1j * gamma_eff * g * omega)
    loop = gain_spectral(omega, fb) * g / (1.0 - 1j * sys.beta * omega)
    return 1.0 / (1.0 - omega**2 - 1j * g * omega + loop)


def effective_freq_damping(omega, sys: SystemParams, fb: FeedbackParams):
    """Feedback-shifted resonance frequency and broadened damping rate.

    Only defined in the ``beta = 0`` limit, where the loop delay is purely
    the controller's.  Returns ``(omega_eff, gamma_eff)`` with the frequency
    in resonance-frequency units and the damping in units of the intrinsic
    rate:

    * ``omega_eff(omega) = sqrt(1 + (sigma/q_m) alpha omega^2 / (alpha^2 + omega^2))``
    * ``gamma_eff(omega) = 1 + sigma alpha^2 / (alpha^2 + omega^2)``

    At resonance the broadening is ``gamma_eff - 1 = sigma / (1 + alpha^-2)``,
    the viscous cooling rate bought by the loop gain.
    """
    if sys.beta != 0:
        raise ValueError("effective_freq_damping is defined only for beta = 0")
    omega = np.asarray(omega, dtype=float)
    lowpass = fb.alpha**2 / (fb.alpha**2 + omega**2)
    w_eff = np.sqrt(1.0 + (fb.sigma / sys.q_m) * omega**2 * lowpass / fb.alpha)
    gamma_eff = 1.0 + fb.sigma * lowpass
    if w_eff.ndim == 0:
        return float(w_eff), float(gamma_eff)
    return w_eff, gamma_eff


@dataclass(frozen=True)
class NoiseForcePsds:
    """Symmetrized spectral densities of the stochastic forces driving the
    oscillator: thermal bath, radiation-pressure back-action, fed-back
    imprecision noise, back-action/imprecision interference, and the excess
    vacuum admixed by imperfect detection.  ``s_co`` carries the interference
    sign and is the only one allowed to go negative."""

    s_th: float
    s_ba: float
    s_fb: float
    s_co: float
    s_v: float

    def total(self):
        return self.s_th + self.s_ba + self.s_fb + self.s_co + self.s_v


def noise_force_psds(omega, sys: SystemParams, fb: FeedbackParams) -> NoiseForcePsds:
    """Force noise budget at a single frequency.

    All densities are two-sided and symmetrized, in the scaled units of this
    package (rates carry ``1/q_m``).  The interference term scales as
    ``cot(theta)`` and the fed-back imprecision as ``csc^2(theta)``, so
    ``s_fb * sin^2(theta)`` and ``s_co * tan(theta)`` are angle-independent.
    """
    g = 1.0 / sys.q_m
    omega = np.asarray(omega, dtype=float)
    w2 = omega**2
    cav = 1.0 / (1.0 + sys.beta**2 * w2)
    ctrl = 1.0 / (1.0 + w2 / fb.alpha**2)

    s_th = 2.0 * g * (sys.n_bar + 0.5) * np.ones_like(omega)
    s_ba = 0.5 * sys.c_cl * g * cav
    if fb.sigma == 0:
        zeros = np.zeros_like(omega)
        s_fb, s_co, s_v = zeros, zeros, zeros
    else:
        if sys.c_cl == 0:
            raise ValueError("feedback with sigma > 0 requires c_cl > 0")
        s_fb = 0.5 * fb.sigma**2 * g / sys.c_cl * w2 * ctrl * _csc2(fb.theta)
        s_co = -fb.sigma * g * _cot(fb.theta) * w2 * (sys.beta + 1.0 / fb.alpha) * cav * ctrl
        s_v = s_fb * (1.0 / sys.eta - 1.0)
    if np.ndim(omega) == 0:
        return NoiseForcePsds(float(s_th), float(s_ba), float(s_fb), float(s_co), float(s_v))
    return NoiseForcePsds(s_th, s_ba, s_fb, s_co, s_v)


@dataclass(frozen=True)
class InterferenceCoefficients:
    """Complex weights with which the two input light quadratures drive the
    oscillator, diagnostic of the back-action cancellation geometry."""

    coef_x: complex
    coef_y: complex


def interference_coefficients(omega, sys: SystemParams, fb: FeedbackParams) -> InterferenceCoefficients:
    """Amplitude- and phase-quadrature force coefficients.

    Diagnostic for the high-cooperativity interference picture: the total
    optical force on the oscillator is ``coef_x * X_in + coef_y * Y_in`` with
    the thermal drive left out, valid in the ``beta = 0``, ``eta = 1`` regime
    only (rejected otherwise).  The amplitude coefficient combines the direct
    back-action ``sqrt(c_cl / q_m)`` with the ``cot(theta)``-weighted fed-back
    amplitude noise; their relative phase decides whether the interference is
    destructive.  Not a substitute for the occupancy calculation, which keeps
    every noise source.
    """
    if sys.beta != 0 or sys.eta != 1:
        raise ValueError("interference coefficients are defined for beta = 0, eta = 1 only")
    g = 1.0 / sys.q_m
    back_action = math.sqrt(sys.c_cl * g)
    if fb.sigma == 0:
        fed_back = 0.0 * np.asarray(omega)
    else:
        if sys.c_cl == 0:
            raise ValueError("feedback with sigma > 0 requires c_cl > 0")
        fed_back = gain_spectral(omega, fb) * math.sqrt(g / sys.c_cl)
    return InterferenceCoefficients(
        coef_x=back_action - fed_back * _cot(fb.theta),
        coef_y=-fed_back,
    )
