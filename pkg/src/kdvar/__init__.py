"""kdvar: variational toolkit for KdV 1- and 2-soliton profiles.

Exact Wronskian tau-function solitons, the conserved functionals E2, E3,
E4 with their gradients on a spectral grid, the two-term power-sum
minimization theory, the (E2, E3) regime classification, and a
projected-gradient constrained minimizer with concentration diagnostics.
"""

from .errors import (CoverageError, DomainError, GridMismatchError,
                     InfeasibleRatioError, InvalidInputError, KdvarError,
                     ProjectionFailureError, UnsupportedSizeError)
from .exppoly import ExpPoly, canonicalize
from .functionals import (ELFit, GridFunction, el_residual, energy,
                          fit_single_soliton, fit_two_soliton, gradient,
                          h2_distance, h2_norm, integrate)
from .massdecomp import (ConcentrationSite, Density, density,
                         extract_concentrations, vanishing_metric)
from .minimizer import (MinimizeConfig, MinimizeResult, Perturbed, ScaledSech,
                        SolitonGuess, minimize, project_to_constraints)
from .powersum import (PowerSumSolution, brute_force_min_x7, excess_e, g_fn,
                       h_fn, hessian_det, k_fn, m_value, ratio_bound_check,
                       solve_two_term)
from .regime import (NO_MINIMIZER, ConstraintPoint, classify, forward, invert,
                     j_value, mu_const)
from .soliton import (ProfileKernel, SolitonParams, closed_form_energy,
                      evolve, profile, sample_profile, separation_defect, tau)

__version__ = "0.1.0"

__all__ = [
    "KdvarError", "InvalidInputError", "DomainError", "InfeasibleRatioError",
    "UnsupportedSizeError", "CoverageError", "GridMismatchError",
    "ProjectionFailureError",
    "ExpPoly", "canonicalize",
    "SolitonParams", "ProfileKernel", "tau", "profile", "sample_profile",
    "closed_form_energy", "evolve", "separation_defect",
    "GridFunction", "ELFit", "energy", "gradient", "el_residual",
    "h2_distance", "h2_norm", "integrate", "fit_two_soliton",
    "fit_single_soliton",
    "PowerSumSolution", "g_fn", "h_fn", "k_fn", "solve_two_term", "m_value",
    "excess_e", "ratio_bound_check", "brute_force_min_x7", "hessian_det",
    "ConstraintPoint", "NO_MINIMIZER", "mu_const", "classify", "forward",
    "invert", "j_value",
    "Density", "ConcentrationSite", "density", "vanishing_metric",
    "extract_concentrations",
    "MinimizeConfig", "MinimizeResult", "ScaledSech", "SolitonGuess",
    "Perturbed", "minimize", "project_to_constraints",
]
