"""
Full-order solvers: SBM Poisson, SBM Stokes, CutFEM Poisson
"""

from src.solvers.problem_data import CutfemOptions, OuterCondition, ProblemData, SbmOptions
from src.solvers.system import AssembledSystem, solve_fom
from src.solvers.sbm_poisson import assemble_poisson_sbm
from src.solvers.sbm_stokes import assemble_stokes_sbm, drag_force, velocity_h1_matrix
from src.solvers.cutfem_poisson import assemble_poisson_cutfem

__all__ = [
    'CutfemOptions', 'OuterCondition', 'ProblemData', 'SbmOptions',
    'AssembledSystem', 'solve_fom',
    'assemble_poisson_sbm', 'assemble_stokes_sbm', 'drag_force', 'velocity_h1_matrix',
    'assemble_poisson_cutfem',
]
