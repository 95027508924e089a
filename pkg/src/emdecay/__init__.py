"""Early-time electromagnetic decay of conducting permeable targets.

The package computes induced-response relaxation curves for a conducting,
magnetically permeable sphere, the boundary-layer model that reproduces
their early-time behaviour, and a boundary-element generalization of the
mode spectrum to arbitrary closed surfaces.
"""
from .earlytime import (DecayCurve, ModeAmplitudes, ProfileQuery,
                        asymptote_early_H_l, asymptote_late_H_l,
                        boundary_dH_dt, boundary_flux_residual, boundary_H,
                        early_time_H_l, mode_profile_A, pde_residual,
                        profile_H, synthesize_response)
from .errors import ConfigError, NumericError
from .fitting import FitReport, fit_power_law, fit_windows
from .mesh import SurfaceMesh, load_off, make_icosphere, make_surface_mesh
from .params import (MU_0, DerivedTimescales, TargetParams, derive_timescales,
                     epsilon_of_t)
from .specfun import BesselEval, erfc, erfcx, spherical_bessel_j
from .sphere import (ScreeningCurrent, SeriesValue, SphereModeLabels,
                     SphereSpectrum, H_l, H_l_zero, characteristic_residual,
                     find_roots, initial_screening_sphere, sphere_mode_labels)
from .surface import (SurfaceModeBasis, SurfaceOperator, analytic_sphere_kappa,
                      build_ntd_operator, build_surface_laplacian,
                      cluster_multiplets, project_surface_current,
                      solve_scalar_modes, solve_surface_modes,
                      solve_transverse_modes, sphere_radius_if_sphere)

__version__ = "0.1.0"

__all__ = [
    "MU_0", "TargetParams", "DerivedTimescales", "derive_timescales",
    "epsilon_of_t",
    "erfc", "erfcx", "BesselEval", "spherical_bessel_j",
    "SphereSpectrum", "SeriesValue", "SphereModeLabels", "ScreeningCurrent",
    "characteristic_residual", "find_roots", "H_l", "H_l_zero",
    "sphere_mode_labels", "initial_screening_sphere",
    "ProfileQuery", "profile_H", "boundary_H", "boundary_dH_dt",
    "early_time_H_l", "asymptote_early_H_l", "asymptote_late_H_l",
    "ModeAmplitudes", "DecayCurve", "mode_profile_A", "synthesize_response",
    "pde_residual", "boundary_flux_residual",
    "SurfaceMesh", "make_surface_mesh", "make_icosphere", "load_off",
    "SurfaceOperator", "SurfaceModeBasis", "build_surface_laplacian",
    "build_ntd_operator", "solve_scalar_modes", "solve_transverse_modes",
    "solve_surface_modes", "cluster_multiplets", "project_surface_current",
    "analytic_sphere_kappa", "sphere_radius_if_sphere",
    "FitReport", "fit_power_law", "fit_windows",
    "ConfigError", "NumericError",
]
