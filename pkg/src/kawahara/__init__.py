"""Numerical toolkit for the Kawahara equation on half-lines."""

__version__ = "0.1.0"

from .forcing import apply_forcing, assemble_boundary_matrix, default_lambdas, trace_coefficient
from .fractional import CausalSignal, TimeGrid, fractional_integral
from .ibvp import IBVPProblem, SolverConfig, energy_identity_residual, solve_linear, solve_nonlinear
from .probe import NormParams, PhaseGrid, bilinear_probe, block_J, resonance
from .special_kernel import eval_kernel, kernel_constants, mellin_transform
from .spectral import SpaceGrid, apply_group, reference_solve

__all__ = [
    "CausalSignal",
    "IBVPProblem",
    "NormParams",
    "PhaseGrid",
    "SolverConfig",
    "SpaceGrid",
    "TimeGrid",
    "apply_forcing",
    "apply_group",
    "assemble_boundary_matrix",
    "bilinear_probe",
    "block_J",
    "default_lambdas",
    "energy_identity_residual",
    "eval_kernel",
    "fractional_integral",
    "kernel_constants",
    "mellin_transform",
    "reference_solve",
    "resonance",
    "solve_linear",
    "solve_nonlinear",
    "trace_coefficient",
]
