"""Geometrically informed algebraic multigrid for high-order hexahedral systems.

p-coarsening driven by element dof maps, smoothed-aggregation h-coarsening on
the linear level, Chebyshev smoothing and a PCG driver.
"""
from .fem import BoundaryPolicy, HexMesh, assemble_helmholtz, evaluate_solution
from .hierarchy import Hierarchy, Preconditioner, SolveOptions, setup, vcycle
from .krylov import ConvergenceLog, diagonal_preconditioner, pcg_solve, solve
from .sparse import BACKEND, SparseMatrix

__all__ = [
    "BACKEND",
    "BoundaryPolicy",
    "ConvergenceLog",
    "HexMesh",
    "Hierarchy",
    "Preconditioner",
    "SolveOptions",
    "SparseMatrix",
    "assemble_helmholtz",
    "diagonal_preconditioner",
    "evaluate_solution",
    "pcg_solve",
    "setup",
    "solve",
    "vcycle",
]
