"""Position spectra under feedback, term by term.

Evaluates the closed-loop position spectrum and its per-source split at a
strongly cooled operating point.  The interference column is negative around
resonance: part of the radiation-pressure back-action is fed back with the
opposite sign and cancels.  Integrating the emitted spectrum recovers the
closed-form occupancy, which is the same consistency check the test suite
runs at tight tolerance.
"""

import math
from pathlib import Path

import numpy as np

from feedcool import (
    FeedbackParams,
    SystemParams,
    chi_eff,
    noise_force_psds,
    occupancy_numeric,
    spectra_pointwise,
    theta_opt,
)

HERE = Path(__file__).parent

system = SystemParams(q_m=1e4, beta=0.1, c_cl=2e3, n_bar=100.0, eta=0.9)
sigma, alpha = 150.0, 1.5
fb = FeedbackParams(sigma=sigma, alpha=alpha, theta=theta_opt(system, sigma, alpha))
print(f"operating point: sigma = {sigma}, alpha = {alpha}, "
      f"theta = {math.degrees(fb.theta):.1f} deg")

grid = np.linspace(-8.0, 8.0, 16001)
rows = []
for omega in grid:
    psds = noise_force_psds(omega, system, fb)
    weight = abs(chi_eff(omega, system, fb)) ** 2
    point = spectra_pointwise(omega, system, fb)
    rows.append((omega, point.s_x, point.s_p, weight * psds.s_th, weight * psds.s_ba,
                 weight * psds.s_fb, weight * psds.s_co, weight * psds.s_v))

data = np.array(rows)
out = HERE / "spectra.csv"
header = "omega,s_x,s_p,s_x_th,s_x_ba,s_x_fb,s_x_co,s_x_v"
np.savetxt(out, data, delimiter=",", header=header, comments="")
print(f"wrote {out}")

# coarse trapezoid of (s_x + s_p)/2 over the grid vs the exact integration
n_trapz = np.trapezoid(0.5 * (data[:, 1] + data[:, 2]), grid) / (2 * math.pi) - 0.5
n_exact = occupancy_numeric(system, fb).n_tot
print(f"occupancy from emitted grid: {n_trapz:.6f}")
print(f"occupancy from closed-form integration: {n_exact:.6f}")
print(f"relative difference: {abs(n_trapz - n_exact) / n_exact:.2e} "
      "(limited by the finite grid, not the model)")

peak = grid[int(np.argmax(data[:, 1]))]
print(f"spectrum peaks at omega = {peak:+.4f} (resonance shifted and broadened "
      "by the loop)")
