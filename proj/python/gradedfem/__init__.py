"""Graded cut finite element solver for Poisson problems with corner singularities."""

from ._gradedfem import (
    GeometryError,
    InvalidArgument,
    SolverError,
    alpha_powers,
    b_matrix,
    convergence_study,
    fit_rate,
    graded_forward,
    graded_inverse,
    graded_jacobian,
    load_weight,
    mesh_function,
    mesh_shift_study,
    min_gamma,
    multipatch_fig8,
    run_sector,
    sample_sector_field,
    singular_solution,
)

__all__ = [
    "GeometryError",
    "InvalidArgument",
    "SolverError",
    "alpha_powers",
    "b_matrix",
    "convergence_study",
    "fit_rate",
    "graded_forward",
    "graded_inverse",
    "graded_jacobian",
    "load_weight",
    "mesh_function",
    "mesh_shift_study",
    "min_gamma",
    "multipatch_fig8",
    "run_sector",
    "sample_sector_field",
    "singular_solution",
]
