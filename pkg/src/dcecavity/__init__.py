"""Particle creation in a uniformly contracting one-dimensional cavity.

The main entry points are :func:`params_from` for cavity parameters,
:func:`mean_particle_number` / :func:`spectrum` for the created-particle
spectrum, :func:`transform_matrices` for the in-to-out Bogoliubov matrices
and :func:`bogoliubov_matrices` for the instantaneous-basis coefficients.
"""

from .bogoliubov import (
    BogoliubovMatrices,
    alpha_beta,
    bogoliubov_matrices,
    commutator_residual,
    generator_matrices,
    nonadiabatic_couplings,
    unitarity_residuals,
)
from .core import CavityParams, chi_of_t, derived_mode, params_from
from .milne import MilneMode, kg_gram_matrix, kg_inner_product, milne_mode_value
from .oracles import (
    compare_routes,
    evolve_bogoliubov_ode,
    v_double_quadrature,
    v_region_integration,
)
from .quadrature import QuadratureConfig, QuadratureError
from .spectrum import (
    exact_maximum_search,
    maxima_positions,
    mean_particle_number,
    plateau_estimate,
    scan_theta,
    spectrum,
    zero_positions,
)
from .transform import TransformMatrices, transform_matrices, u_closed, v_closed

__version__ = "0.1.0"

__all__ = [
    "BogoliubovMatrices",
    "CavityParams",
    "MilneMode",
    "QuadratureConfig",
    "QuadratureError",
    "TransformMatrices",
    "alpha_beta",
    "bogoliubov_matrices",
    "chi_of_t",
    "commutator_residual",
    "compare_routes",
    "derived_mode",
    "evolve_bogoliubov_ode",
    "exact_maximum_search",
    "generator_matrices",
    "kg_gram_matrix",
    "kg_inner_product",
    "maxima_positions",
    "mean_particle_number",
    "milne_mode_value",
    "nonadiabatic_couplings",
    "params_from",
    "plateau_estimate",
    "scan_theta",
    "spectrum",
    "transform_matrices",
    "u_closed",
    "unitarity_residuals",
    "v_closed",
    "v_region_integration",
    "v_double_quadrature",
    "zero_positions",
]
