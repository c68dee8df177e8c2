"""Steady-state occupancy and optimization of feedback-cooled mechanical
oscillators read out by variational homodyne measurement.

The package computes the phonon occupancy of a continuously monitored
oscillator under derivative feedback by three mutually checking routes
(compact instantaneous-cavity closed forms, arbitrary sideband-resolution
closed forms, and direct spectral integration via a determinant formula),
decides closed-loop stability two independent ways, and minimizes the
occupancy over the controller parameters.
"""

from .model import (
    DerivedParams,
    FeedbackParams,
    InterferenceCoefficients,
    NoiseForcePsds,
    SystemParams,
    chi_eff,
    derived_params,
    effective_freq_damping,
    gain_impulse_weight,
    gain_spectral,
    gain_time,
    interference_coefficients,
    noise_force_psds,
)
from .occupancy import (
    ClosedLoopModel,
    OccupancyBreakdown,
    SpectraPoint,
    assemble_closed_loop,
    occupancy_at_theta_opt,
    occupancy_bad_cavity,
    occupancy_exact,
    occupancy_numeric,
    spectra_pointwise,
    theta_opt,
)
from .optimize import (
    OptimumRecord,
    SweepTable,
    optimize_alpha,
    optimize_joint,
    sweep_cq,
    sweep_sigma,
)
from .rational import (
    DegenerateDenominatorError,
    HurwitzMatrices,
    QuadratureConvergenceError,
    RationalIntegrand,
    RootConditionError,
    build_matrices,
    integrate_rational,
    pad_integrand,
    quadrature_oracle,
)
from .selfcheck import SelfCheckReport, run_selfcheck
from .stability import (
    StabilityReport,
    UnstableParametersError,
    closed_loop_poles,
    closed_loop_polynomial,
    routh_hurwitz_margin,
    stability_report,
)

__version__ = "0.1.0"

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
    "RationalIntegrand",
    "HurwitzMatrices",
    "build_matrices",
    "integrate_rational",
    "quadrature_oracle",
    "pad_integrand",
    "RootConditionError",
    "DegenerateDenominatorError",
    "QuadratureConvergenceError",
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
    "StabilityReport",
    "UnstableParametersError",
    "routh_hurwitz_margin",
    "closed_loop_polynomial",
    "closed_loop_poles",
    "stability_report",
    "OptimumRecord",
    "SweepTable",
    "optimize_alpha",
    "optimize_joint",
    "sweep_sigma",
    "sweep_cq",
    "SelfCheckReport",
    "run_selfcheck",
    "__version__",
]
