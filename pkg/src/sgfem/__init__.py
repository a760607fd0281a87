"""Strain-gradient elasticity finite elements and a benchmark harness."""

from .constitutive import (PULLOUT_TABLE, SHEAR_TABLE, ConstitutiveParams, EngineeringMaterial,
                           StrainState, build_isotropic_C, build_isotropic_D, energy_density,
                           params_from_engineering)
from .discretization import BasisFamily, KnotVector, eval_basis, gauss_legendre, open_knot_vector
from .estimators import MixedShear2D, PulloutSolver, ShearSolver
from .harness import (ConvergenceRecord, RunConfig, convergence_study, l1_error,
                      run_benchmark)
from .linalg import SingularSystemError, TripletBuffer, apply_dirichlet, compress, solve_sparse
from .mesh import build_dof_map, interval_mesh, quad_mesh
from .mixed2d import sample_edge, solve_shear_mixed_2d
from .pullout import (NewtonConfig, PulloutDomain, pullout_energy_density, solve_pullout)
from .shear import (ShearCase, analytic_shear, reduced_moduli, solve_shear_1d,
                    solve_shear_mixed_1d)

__version__ = "0.1.0"

__all__ = [
    "BasisFamily", "ConstitutiveParams", "ConvergenceRecord", "EngineeringMaterial",
    "KnotVector", "MixedShear2D", "NewtonConfig", "PULLOUT_TABLE", "PulloutDomain",
    "PulloutSolver", "RunConfig", "SHEAR_TABLE", "ShearCase", "ShearSolver",
    "SingularSystemError", "StrainState", "TripletBuffer", "analytic_shear", "apply_dirichlet",
    "build_dof_map", "build_isotropic_C", "build_isotropic_D", "compress", "convergence_study",
    "energy_density", "eval_basis", "gauss_legendre", "interval_mesh", "l1_error",
    "open_knot_vector", "params_from_engineering", "pullout_energy_density", "quad_mesh",
    "reduced_moduli", "run_benchmark", "sample_edge", "solve_pullout", "solve_shear_1d",
    "solve_shear_mixed_1d", "solve_shear_mixed_2d", "solve_sparse",
]
