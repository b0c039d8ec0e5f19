"""Principal eigenvalues of radial Pucci operators with singular potentials.

Three engines compute the same quantity: :func:`shoot_eigenvalue` (radial
ODE shooting), :func:`variational_eigenvalue` (weighted Rayleigh quotient)
and :func:`fd_principal_eigenvalue` (finite volumes on a regularized
domain). :mod:`singular_eig.harness` checks their output against the
qualitative principles of the problem.
"""
from .core import (
    PotentialSpec,
    PucciParams,
    RadialOperator,
    dimension_like,
    explicit_eigenfunction_gamma2,
    explicit_lambda2,
    gamma2_relative_residual,
    gamma2_residual,
)
from .fd_eig import (
    AnnulusGrid,
    DirichletProblem,
    fd_principal_eigenvalue,
    linear_radial_solve,
    make_grid,
    pucci_dirichlet_solve,
    stability_sweep,
)
from .ode_shoot import shoot_eigenvalue
from .profile import EigenResult, RadialProfile
from .rayleigh import hardy_limit, rayleigh_quotient, variational_eigenvalue

__version__ = "0.1.0"

__all__ = [
    "AnnulusGrid", "DirichletProblem", "EigenResult", "PotentialSpec",
    "PucciParams", "RadialOperator", "RadialProfile", "dimension_like",
    "explicit_eigenfunction_gamma2", "explicit_lambda2", "fd_principal_eigenvalue",
    "gamma2_relative_residual", "gamma2_residual", "hardy_limit",
    "linear_radial_solve", "make_grid", "pucci_dirichlet_solve",
    "rayleigh_quotient", "shoot_eigenvalue", "stability_sweep",
    "variational_eigenvalue", "__version__",
]
