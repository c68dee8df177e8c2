"""Exact integrals of rational spectra over the whole real line.

Handles integrands of the shape ``g(w) / (h(w) h(-w))`` where ``h`` is a
degree-n polynomial with every root strictly in the upper half of the complex
plane and ``g`` is an even polynomial of degree at most ``2n - 2``.  The
integral equals::

    i * (-1)**(n + 1) * (pi / a_0) * det(M_n) / det(Delta_n)

with two n x n coefficient matrices that differ only in their first row:
``Delta_n`` holds denominator coefficients laid out by the index rule
``(Delta_n)[i, j] = a_{2j - i}`` (1-based, out-of-range coefficients zero)
and ``M_n`` replaces the first row by the numerator coefficients.  An
adaptive-quadrature fallback over a compactified axis provides an independent
cross-check of the determinant route.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sciint

__all__ = [
    "RationalIntegrand",
    "HurwitzMatrices",
    "build_matrices",
    "integrate_rational",
    "quadrature_oracle",
    "pad_integrand",
    "RootConditionError",
    "DegenerateDenominatorError",
    "QuadratureConvergenceError",
]

# roots this close to the real axis make the formula ill-defined and signal
# a marginally (un)stable closed loop upstream
ROOT_IMAG_TOL = 1e-12

_IMAG_RESIDUE_TOL = 1e-10


class RootConditionError(ValueError):
    """A denominator root is not strictly in the upper half-plane."""


class DegenerateDenominatorError(ValueError):
    """det(Delta_n) = 0; the integral formula breaks down."""


class QuadratureConvergenceError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance.

    The best available estimate is kept in the ``partial`` attribute.
    """

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class RationalIntegrand:
    """Coefficients of one rational integrand.

    ``a`` are the n+1 complex denominator coefficients of
    ``h(w) = a_0 w^n + ... + a_n`` (descending powers, ``a_0 != 0``), ``b``
    the n real numerator coefficients of the even polynomial
    ``g(w) = b_0 w^(2n-2) + ... + b_{n-1}``.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=complex))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.ndim != 1 or b.ndim != 1:
            raise ValueError("coefficient lists must be one-dimensional")
        if len(a) < 2:
            raise ValueError("denominator must have degree at least 1")
        if len(b) != len(a) - 1:
            raise ValueError(
                f"numerator needs exactly n = {len(a) - 1} coefficients, got {len(b)}"
            )
        if a[0] == 0:
            raise ValueError("leading denominator coefficient must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    def denominator_roots(self) -> np.ndarray:
        return np.roots(self.a)

    def evaluate(self, omega):
        """g(w) / (h(w) h(-w)) by direct complex arithmetic."""
        h = np.polyval(self.a, omega)
        h_neg = np.polyval(self.a, -np.asarray(omega))
        n = self.degree
        powers = 2 * (n - 1 - np.arange(n))
        g = sum(bk * np.asarray(omega, dtype=float) ** p for bk, p in zip(self.b, powers))
        return g / (h * h_neg)


@dataclass(frozen=True)
class HurwitzMatrices:
    """The two coefficient matrices of the integral formula; they differ only
    by their first rows."""

    delta: np.ndarray
    m: np.ndarray


def build_matrices(ri: RationalIntegrand) -> HurwitzMatrices:
    """Assemble Delta_n and M_n from the integrand coefficients."""
    n = ri.degree

    def a_of(k: int) -> complex:
        return ri.a[k] if 0 <= k <= n else 0.0

    delta = np.array(
        [[a_of(2 * (j + 1) - (i + 1)) for j in range(n)] for i in range(n)],
        dtype=complex,
    )
    m = delta.copy()
    m[0, :] = ri.b
    return HurwitzMatrices(delta=delta, m=m)


def _scaled_logdet(mat: np.ndarray):
    """log-determinant with per-row max-abs scaling.

    Row entries can span many orders of magnitude (quality factors of 1e6
    inject coefficients from 1e-12 up to 1); equilibrating the rows before
    the pivoted factorization keeps the ratio of two such determinants
    accurate and overflow-free.
    """
    scale = np.max(np.abs(mat), axis=1)
    if np.any(scale == 0):
        return 0.0 + 0.0j, -math.inf
    sign, logdet = np.linalg.slogdet(mat / scale[:, None])
    return sign, logdet + float(np.sum(np.log(scale)))


def check_root_condition(ri: RationalIntegrand) -> None:
    """Raise unless every denominator root sits strictly above the real axis."""
    roots = ri.denominator_roots()
    worst = float(np.min(roots.imag))
    if worst < ROOT_IMAG_TOL:
        raise RootConditionError(
            f"denominator root with Im = {worst:.3e} is not strictly in the "
            "upper half-plane (marginal roots are treated as violations)"
        )


def integrate_rational(ri: RationalIntegrand, check_roots: bool = True) -> float:
    """Integrate ``g(w) / (h(w) h(-w))`` over the real line, exactly.

    Parameters
    ----------
    ri : RationalIntegrand
    check_roots : bool
        Verify the upper-half-plane root condition first (via companion
        matrix eigenvalues).  Disable only when the caller has already done
        so.

    Raises
    ------
    RootConditionError
        If a denominator root is not strictly in the upper half-plane.
    DegenerateDenominatorError
        If det(Delta_n) vanishes.
    """
    if check_roots:
        check_root_condition(ri)
    mats = build_matrices(ri)
    sign_d, log_d = _scaled_logdet(mats.delta)
    if sign_d == 0:
        raise DegenerateDenominatorError("det(Delta_n) = 0, integral formula degenerate")
    sign_m, log_m = _scaled_logdet(mats.m)
    if sign_m == 0:
        return 0.0
    n = ri.degree
    value = 1j * (-1) ** (n + 1) * math.pi / ri.a[0] * (sign_m / sign_d) * math.exp(log_m - log_d)
    if abs(value.imag) > _IMAG_RESIDUE_TOL * max(abs(value.real), 1.0):
        raise ValueError(
            f"integral has non-negligible imaginary residue {value.imag:.3e}; "
            "the integrand is not conjugate-symmetric on the real axis"
        )
    return float(value.real)


def quadrature_oracle(psd_evaluator, rel_tol: float = 1e-10, points=()) -> float:
    """Adaptive quadrature of a real integrand over the whole real line.

    Compactifies the axis with ``w = tan(u)`` and refines adaptively until
    the estimated relative error is at or below ``rel_tol``.  The integrand
    must decay at least as fast as ``w**-2``.  Known sharp features (e.g.
    resonance frequencies) can be passed through ``points`` to seed the
    subdivision.

    Raises
    ------
    QuadratureConvergenceError
        If the error estimate stays above the requested tolerance; the best
        value reached is attached as ``partial``.
    """
    rel_tol = max(float(rel_tol), 1e-13)

    def transformed(u: float) -> float:
        w = math.tan(u)
        return psd_evaluator(w) * (1.0 + w * w)

    breakpoints = sorted(math.atan(float(p)) for p in points) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sciint.IntegrationWarning)
        value, abs_err = _sciint.quad(
            transformed,
            -math.pi / 2,
            math.pi / 2,
            points=breakpoints,
            limit=400,
            epsabs=0.0,
            epsrel=rel_tol,
        )
    if abs_err > rel_tol * max(abs(value), 1e-300):
        raise QuadratureConvergenceError(
            f"quadrature error estimate {abs_err:.3e} exceeds rel_tol = {rel_tol:g} "
            f"for value {value:.6e}",
            partial=value,
        )
    return value


def pad_integrand(ri: RationalIntegrand, lam: float) -> RationalIntegrand:
    """Multiply numerator and denominator by a cancelling factor pair.

    The denominator picks up the root ``+i lam`` (upper half-plane) through
    the factor ``i (w - i lam)`` and the numerator the even factor
    ``w^2 + lam^2``; the integral value is unchanged while both degrees rise
    by one.  Used to make room when an ``w^2``-weighted numerator would
    exceed the ``2n - 2`` degree bound.
    """
    if not lam > 0:
        raise ValueError(f"padding root scale must be positive, got {lam}")
    a_new = 1j * np.polymul(ri.a, np.array([1.0, -1j * lam]))
    shifted = np.append(ri.b, 0.0)
    scaled = np.concatenate(([0.0], lam**2 * ri.b))
    return RationalIntegrand(a=a_new, b=shifted + scaled)
