"""Finite element solver for nonlinear Riesz space-fractional diffusion on convex 2D domains."""
from .analysis import (ConvergenceRecord, convergence_study, error_energy, error_energy_exact,
                       error_l2, error_linf, write_csv, write_field)
from .assembly import assemble_mass, assemble_stiffness, apply_dirichlet
from .fracpath import Direction
from .mesh import (Triangulation, generate_disk_mesh, generate_ellipse_mesh,
                   generate_pentagon_mesh, generate_square_mesh, load_mesh, save_mesh)
from .problems import PROBLEMS, ProblemSpec, example1_spec, example2_spec, example3_spec, fhn_spec
from .timestep import Discretization, TimeGrid, begm_solve, fhn_simulate

__version__ = "0.1.0"
