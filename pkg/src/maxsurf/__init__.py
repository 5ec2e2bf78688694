"""Maximal spacelike hypersurfaces outside a compact set: exact tilted
radial solutions, an annulus solver for the area functional, flux/
asymptotics analysis, and exterior continuation."""

from .errors import (AdmissibilityError, ConvergenceError, DomainError,
                     FitError, GridConstructionError, InvalidBoostError,
                     LinearSolveError, MaxsurfError, NonSpacelikeError,
                     OutOfDomainError, RootFindError, UsageError)
from .lorentz import (BoostParam, SpacetimePoint, boost_axis,
                      boost_axis_arrays, boost_graph_point, rotation_to_axis)
from .radial import (BoostedRadialSolution, RadialSolution, M_const,
                     M_const_with_error, boosted_curvature, boosted_eval,
                     boosted_flux_vector, boosted_gradient,
                     boosted_value_and_gradient, flux_density, m_const,
                     m_const_with_error, radial_curvature, w_slope, w_value,
                     w_value_with_error)
from .mesh import (ElementQuadrature, Grid, HoleSpec, ScalarField, build_grid,
                   domain_measure, element_quadrature, gradient, inner_nodes,
                   interp, load_field, max_cell_diameter, outer_nodes, sample,
                   save_field)
from .solver import (AdmissibilityReport, BoundaryData, SolveResult,
                     SolverConfig, area_energy, check_admissible, newton_step,
                     solve_dirichlet, spacelike_margin, theta_h)
from .analysis import (AsymptoticFit, BlowdownSample, InfConvExtension,
                       RadialExtension, ResidueReport, blowdown_sequence,
                       check_residue_relation, extend_infconv, extend_radial,
                       fit_asymptotics, pairwise_lipschitz, raw_flux, residue,
                       second_ff_norm, tilt_remainder_model)
from .exterior import (BarrierEnvelope, BarrierReport, ContinuationSchedule,
                       ExteriorProblem, ExteriorResult, StageRecord,
                       barrier_check, barrier_envelope, monitor_difference,
                       outer_data, solve_exterior, uniqueness_crosscheck)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "ConvergenceError", "DomainError", "FitError",
    "GridConstructionError", "InvalidBoostError", "LinearSolveError",
    "MaxsurfError", "NonSpacelikeError", "OutOfDomainError", "RootFindError",
    "UsageError",
    "BoostParam", "SpacetimePoint", "boost_axis", "boost_axis_arrays",
    "boost_graph_point", "rotation_to_axis",
    "BoostedRadialSolution", "RadialSolution", "M_const",
    "M_const_with_error", "boosted_curvature", "boosted_eval",
    "boosted_flux_vector", "boosted_gradient", "boosted_value_and_gradient",
    "flux_density", "m_const", "m_const_with_error", "radial_curvature",
    "w_slope", "w_value", "w_value_with_error",
    "ElementQuadrature", "Grid", "HoleSpec", "ScalarField", "build_grid",
    "domain_measure", "element_quadrature", "gradient", "inner_nodes",
    "interp", "load_field", "max_cell_diameter", "outer_nodes", "sample",
    "save_field",
    "AdmissibilityReport", "BoundaryData", "SolveResult", "SolverConfig",
    "area_energy", "check_admissible", "newton_step", "solve_dirichlet",
    "spacelike_margin", "theta_h",
    "AsymptoticFit", "BlowdownSample", "InfConvExtension", "RadialExtension",
    "ResidueReport", "blowdown_sequence", "check_residue_relation",
    "extend_infconv", "extend_radial", "fit_asymptotics",
    "pairwise_lipschitz", "raw_flux", "residue", "second_ff_norm",
    "tilt_remainder_model",
    "BarrierEnvelope", "BarrierReport", "ContinuationSchedule",
    "ExteriorProblem", "ExteriorResult", "StageRecord", "barrier_check",
    "barrier_envelope", "monitor_difference", "outer_data", "solve_exterior",
    "uniqueness_crosscheck",
]
