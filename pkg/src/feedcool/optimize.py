"""Deterministic minimization of the steady-state occupancy.

The occupancy is minimized over the controller parameters (angle, cutoff
ratio, gain) under the stability constraint.  The angle optimum is known in
closed form; the cutoff and gain optima are found by log-spaced grid scans
followed by golden-section refinement, which is robust against the
decade-wide flat valleys the objective develops at small gain.  All searches
use fixed grids and no randomness, so identical configurations produce
bit-identical tables.

Sweeps run on the instantaneous-cavity occupancy path by default; passing
``path="exact"`` switches every evaluation to the arbitrary-``beta`` closed
form with stability-infeasible points excluded.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .model import FeedbackParams, SystemParams
from .occupancy import (
    OccupancyBreakdown,
    _bad_cavity_parts,
    _ntot_at_theta_opt,
    occupancy_bad_cavity,
    occupancy_exact,
    theta_opt,
)
from .stability import MARGINAL_BAND, routh_hurwitz_margin

__all__ = [
    "OptimumRecord",
    "SweepTable",
    "optimize_alpha",
    "optimize_joint",
    "sweep_sigma",
    "sweep_cq",
]

THETA_MODES = ("opt", "pi2")

ALPHA_RANGE = (1e-3, 1e3)
ALPHA_GRID_POINTS = 400
SIGMA_RANGE = (1e0, 1e9)
SIGMA_GRID_POINTS = 160
GOLDEN_REL_TOL = 1e-6


@dataclass(frozen=True)
class OptimumRecord:
    """One constrained optimum: the controller settings, the occupancy
    reached, its breakdown, and which variables were free (``mode``)."""

    sigma: float
    alpha: float
    theta: float
    n_tot: float
    breakdown: OccupancyBreakdown
    mode: str
    margin: float = math.nan


@dataclass(frozen=True)
class SweepTable:
    """Optima along one axis, with the phase-quadrature-constrained optimum
    kept alongside for comparison."""

    axis: str
    values: np.ndarray
    records: list[OptimumRecord]
    comparison: list[OptimumRecord]


def _max_workers() -> int:
    raw = os.environ.get("FEEDCOOL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    workers = _max_workers()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _golden_refine(objective, x_lo: float, x_hi: float, rel_tol: float = GOLDEN_REL_TOL):
    """Golden-section minimum on a log axis; ties resolve to the smaller x."""
    lo, hi = math.log(x_lo), math.log(x_hi)
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = objective(math.exp(c)), objective(math.exp(d))
    while hi - lo > rel_tol:
        if fc <= fd:  # <= keeps the left (smaller-alpha) interval on ties
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = objective(math.exp(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = objective(math.exp(d))
    x = math.exp(0.5 * (lo + hi))
    return x, objective(x)


def _theta_for(sys: SystemParams, sigma: float, alpha, theta_mode: str):
    if theta_mode == "pi2":
        return math.pi / 2 if np.ndim(alpha) == 0 else np.full(np.shape(alpha), math.pi / 2)
    if np.ndim(alpha) == 0:
        return theta_opt(sys, sigma, float(alpha))
    if sigma == 0:
        return np.full(np.shape(alpha), math.pi / 2)
    return np.arctan2(np.asarray(alpha) * sigma, sys.c_cl * sys.eta)


def _objective_grid(sys: SystemParams, sigma: float, alphas: np.ndarray, theta_mode: str, path: str):
    """Vectorized occupancy over an alpha grid; infeasible points get +inf."""
    if path == "bad_cavity":
        if theta_mode == "opt" and sigma > 0:
            return _ntot_at_theta_opt(sys.q_m, sys.c_cl, sys.n_bar, sys.eta, sigma, alphas)
        theta = _theta_for(sys, sigma, alphas, theta_mode)
        parts = _bad_cavity_parts(sys.q_m, sys.c_cl, sys.n_bar, sys.eta, sigma, alphas, theta)
        return sum(parts) - 0.5
    # exact path: evaluate the closed form pointwise, masking unstable points
    vals = np.empty(len(alphas))
    for i, al in enumerate(alphas):
        fb = FeedbackParams(sigma=sigma, alpha=float(al), theta=float(_theta_for(sys, sigma, al, theta_mode)))
        if routh_hurwitz_margin(sys, fb) <= MARGINAL_BAND:
            vals[i] = math.inf
        else:
            vals[i] = occupancy_exact(sys, fb).n_tot
    return vals


def _objective_scalar(sys: SystemParams, sigma: float, alpha: float, theta_mode: str, path: str) -> float:
    return float(_objective_grid(sys, sigma, np.array([alpha]), theta_mode, path)[0])


def _breakdown_at(sys: SystemParams, fb: FeedbackParams, path: str) -> OccupancyBreakdown:
    if path == "bad_cavity":
        return occupancy_bad_cavity(sys, fb)
    return occupancy_exact(sys, fb)


def optimize_alpha(
    sys: SystemParams,
    sigma: float,
    theta_mode: str = "opt",
    alpha_range: tuple[float, float] = ALPHA_RANGE,
    grid_points: int = ALPHA_GRID_POINTS,
    path: str = "bad_cavity",
) -> OptimumRecord:
    """Minimize the occupancy over the cutoff ratio at fixed gain.

    ``theta_mode="opt"`` sets the angle to its closed-form optimum at every
    candidate cutoff, ``"pi2"`` pins the phase quadrature.  The scan uses
    ``grid_points`` log-spaced candidates over ``alpha_range`` and refines
    the best bracket by golden section to 1e-6 relative; among equal minima
    the smallest cutoff wins.
    """
    if theta_mode not in THETA_MODES:
        raise ValueError(f"theta_mode must be one of {THETA_MODES}, got {theta_mode!r}")
    if path not in ("bad_cavity", "exact"):
        raise ValueError(f"path must be 'bad_cavity' or 'exact', got {path!r}")
    if path == "bad_cavity" and sys.beta != 0:
        raise ValueError("bad_cavity optimization path requires beta = 0; pass path='exact'")
    if sigma > 0 and sys.c_cl == 0:
        raise ValueError("feedback with sigma > 0 requires a measurement, c_cl > 0")
    grid = np.geomspace(alpha_range[0], alpha_range[1], grid_points)
    vals = np.asarray(_objective_grid(sys, sigma, grid, theta_mode, path))
    if not np.any(np.isfinite(vals)):
        raise ValueError("no stable cutoff ratio in the search range")
    i = int(np.argmin(vals))  # argmin takes the first, i.e. smallest alpha
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    alpha, _ = _golden_refine(lambda al: _objective_scalar(sys, sigma, al, theta_mode, path), lo, hi)
    theta = float(_theta_for(sys, sigma, alpha, theta_mode))
    fb = FeedbackParams(sigma=sigma, alpha=alpha, theta=theta)
    breakdown = _breakdown_at(sys, fb, path)
    return OptimumRecord(
        sigma=sigma, alpha=alpha, theta=theta, n_tot=breakdown.n_tot,
        breakdown=breakdown, mode=f"alpha|theta_{theta_mode}",
        margin=routh_hurwitz_margin(sys, fb),
    )


def optimize_joint(
    sys: SystemParams,
    theta_mode: str = "opt",
    sigma_range: tuple[float, float] = SIGMA_RANGE,
    sigma_grid_points: int = SIGMA_GRID_POINTS,
    alpha_range: tuple[float, float] = ALPHA_RANGE,
    path: str = "bad_cavity",
) -> OptimumRecord:
    """Minimize the occupancy over gain and cutoff jointly.

    Nested one-dimensional searches (outer gain, inner cutoff), justified by
    the observed unimodality of the inner problem; a coarse two-dimensional
    grid pass guards against a missed basin and reseeds the nested search if
    it finds a better cell.
    """
    def best_over_alpha(sigma: float) -> float:
        grid = np.geomspace(alpha_range[0], alpha_range[1], ALPHA_GRID_POINTS)
        vals = np.asarray(_objective_grid(sys, sigma, grid, theta_mode, path))
        i = int(np.argmin(vals))
        if not math.isfinite(vals[i]):
            return math.inf
        _, refined = _golden_refine(
            lambda al: _objective_scalar(sys, sigma, al, theta_mode, path),
            grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)],
        )
        return refined

    sigma_grid = np.geomspace(sigma_range[0], sigma_range[1], sigma_grid_points)
    outer = np.array([best_over_alpha(s) for s in sigma_grid])
    i = int(np.argmin(outer))
    if not math.isfinite(outer[i]):
        raise ValueError("no stable (sigma, alpha) pair in the search range")
    sigma, value = _golden_refine(
        best_over_alpha,
        sigma_grid[max(i - 1, 0)], sigma_grid[min(i + 1, len(sigma_grid) - 1)],
    )

    # coarse 2-d sanity pass against multimodality of the nested search
    coarse_sg = np.geomspace(sigma_range[0], sigma_range[1], 24)
    coarse_al = np.geomspace(alpha_range[0], alpha_range[1], 24)
    for j, sg in enumerate(coarse_sg):
        vals = np.asarray(_objective_grid(sys, float(sg), coarse_al, theta_mode, path))
        if np.min(vals) < value - 1e-9 * max(abs(value), 1.0):
            sigma2, value2 = _golden_refine(
                best_over_alpha,
                coarse_sg[max(j - 1, 0)], coarse_sg[min(j + 1, len(coarse_sg) - 1)],
            )
            if value2 < value:
                sigma, value = sigma2, value2

    record = optimize_alpha(sys, sigma, theta_mode, alpha_range=alpha_range, path=path)
    return replace(record, mode=f"sigma,alpha|theta_{theta_mode}")


def sweep_sigma(
    sys: SystemParams,
    sigma_grid,
    alpha_range: tuple[float, float] = ALPHA_RANGE,
    path: str = "bad_cavity",
) -> SweepTable:
    """Optimal cooling along a gain grid, in both angle modes.

    Each grid point carries the cutoff-optimized occupancy with the
    closed-form angle (``records``) and with the angle pinned to the phase
    quadrature (``comparison``).
    """
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    if sigma_grid.size == 0:
        raise ValueError("sigma grid must be nonempty")

    def solve(sigma: float):
        return (
            optimize_alpha(sys, float(sigma), "opt", alpha_range=alpha_range, path=path),
            optimize_alpha(sys, float(sigma), "pi2", alpha_range=alpha_range, path=path),
        )

    pairs = _map_ordered(solve, sigma_grid)
    return SweepTable(
        axis="sigma",
        values=sigma_grid,
        records=[p[0] for p in pairs],
        comparison=[p[1] for p in pairs],
    )


def sweep_cq(
    sys_template: SystemParams,
    cq_grid,
    sigma_range: tuple[float, float] = SIGMA_RANGE,
    alpha_range: tuple[float, float] = ALPHA_RANGE,
    path: str = "bad_cavity",
) -> SweepTable:
    """Jointly optimized cooling as a function of the quantum cooperativity.

    The bath occupancy is held at the template value and the classical
    cooperativity is re-derived per point as ``c_cl = c_q * n_bar``.
    """
    cq_grid = np.asarray(cq_grid, dtype=float)
    if cq_grid.size == 0:
        raise ValueError("cq grid must be nonempty")
    if np.any(cq_grid <= 0):
        raise ValueError("cq grid values must be positive")
    if sys_template.n_bar <= 0:
        raise ValueError("sweeping the quantum cooperativity requires n_bar > 0")

    def solve(cq: float):
        sys = replace(sys_template, c_cl=float(cq) * sys_template.n_bar)
        return (
            optimize_joint(sys, "opt", sigma_range=sigma_range, alpha_range=alpha_range, path=path),
            optimize_joint(sys, "pi2", sigma_range=sigma_range, alpha_range=alpha_range, path=path),
        )

    pairs = _map_ordered(solve, cq_grid)
    return SweepTable(
        axis="cq",
        values=cq_grid,
        records=[p[0] for p in pairs],
        comparison=[p[1] for p in pairs],
    )
