"""Gross-Pitaevskii ground states by Riemannian Sobolev gradient descent."""

from .grids import GridSpec, Scheme, TensorOperator, gauss_lobatto_rule
from .meshes import TriMesh2D, p1_assemble, read_mesh, write_mesh
from .linalg import FastSolver, lowest_two_eigenpairs, pcg
from .energy import Problem, State, energy, residual, retract
from .flows import (FixedStep, FlowConfig, FlowKind, LineSearchStep,
                    StopRule, default_initial_state, run)
from .analysis import (convergence_study, convexity_check, eigengap_study,
                       exact_case, m_matrix_check, monotonicity_oracle,
                       perron_check, rate_fit)
from .config import RunConfig, parse_config

__all__ = [
    "GridSpec", "Scheme", "TensorOperator", "gauss_lobatto_rule",
    "TriMesh2D", "p1_assemble", "read_mesh", "write_mesh",
    "FastSolver", "lowest_two_eigenpairs", "pcg",
    "Problem", "State", "energy", "residual", "retract",
    "FixedStep", "FlowConfig", "FlowKind", "LineSearchStep", "StopRule",
    "default_initial_state", "run",
    "convergence_study", "convexity_check", "eigengap_study", "exact_case",
    "m_matrix_check", "monotonicity_oracle", "perron_check", "rate_fit",
    "RunConfig", "parse_config",
]
