"""One number, three independent routes.

The steady-state occupancy is computed by compact closed forms (valid in the
instantaneous-cavity limit), by closed forms valid for any stable sideband
resolution, and by integrating the closed-loop spectra exactly through the
determinant formula.  This script evaluates all three on a few operating
points and prints the mutual deviations, then shows the two stability
verdicts bracketing an instability onset.
"""

import numpy as np

from feedcool import (
    FeedbackParams,
    SystemParams,
    closed_loop_poles,
    occupancy_bad_cavity,
    occupancy_exact,
    occupancy_numeric,
    routh_hurwitz_margin,
)

print("occupancy by three routes")
print("-" * 72)
points = [
    ("resolved sideband, strong feedback",
     SystemParams(q_m=1e6, beta=0.1, c_cl=1e5, n_bar=1e4, eta=1.0),
     FeedbackParams(sigma=50.0, alpha=2.0, theta=1.0)),
    ("lossy detection, moderate feedback",
     SystemParams(q_m=1e5, beta=0.02, c_cl=2e3, n_bar=500.0, eta=0.7),
     FeedbackParams(sigma=30.0, alpha=0.8, theta=0.9)),
]
for label, system, fb in points:
    exact = occupancy_exact(system, fb).n_tot
    numeric = occupancy_numeric(system, fb).n_tot
    print(f"{label}:")
    print(f"  general closed form  {exact:.10g}")
    print(f"  direct integration   {numeric:.10g}   "
          f"(rel. {abs(exact - numeric) / exact:.1e})")

system0 = SystemParams(q_m=1e6, beta=0.0, c_cl=2e4, n_bar=1e3, eta=0.9)
fb0 = FeedbackParams(sigma=0.005, alpha=1.0, theta=1.1)
compact = occupancy_bad_cavity(system0, fb0).n_tot
numeric0 = occupancy_numeric(system0, fb0).n_tot
print("instantaneous cavity, small gain:")
print(f"  compact closed form  {compact:.10g}")
print(f"  direct integration   {numeric0:.10g}   "
      f"(rel. {abs(compact - numeric0) / compact:.1e})")

print()
print("stability onset, two verdicts")
print("-" * 72)
system = SystemParams(q_m=1e3, beta=0.5, c_cl=1e3, n_bar=100.0)
for sigma in (500.0, 1500.0, 1520.0, 3000.0):
    fb = FeedbackParams(sigma=sigma, alpha=1.0)
    margin = routh_hurwitz_margin(system, fb)
    poles = closed_loop_poles(system, fb)
    worst = float(np.max(poles.imag))
    print(f"  sigma = {sigma:7.1f}: margin = {margin:+10.3e},  "
          f"max pole Im = {worst:+.3e}  ->  "
          f"{'stable' if margin > 0 else 'UNSTABLE'}")
