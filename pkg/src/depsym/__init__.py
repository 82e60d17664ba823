"""Dependent symmetries and constants of the motion in open quantum dynamics.

The package builds small composite systems S+R, evolves S observables in the
Heisenberg picture, reduces them over a fixed environment state and checks
which unitaries on S commute with the resulting map and which observables it
leaves fixed.
"""
from .constants import ConstantReport, ConstantScan, constant_defect, constant_defect_spectral, scan_constants
from .dynamics import (ReducedTrajectory, analytic_evolve, heisenberg_evolve, leakage_check, reduce,
                       trajectory)
from .hamiltonians import HamiltonianSpec, build, space_of
from .model import DensityMatrix, Operator, SpaceSpec, env_state, pauli
from .symmetry import (FormTemplate, SymmetryReport, UnitarySpec, axis_frame, check_symmetry, form_violation,
                       realize, symmetry_defect)

__version__ = "0.1.0"

__all__ = [
    "ConstantReport", "ConstantScan", "DensityMatrix", "FormTemplate", "HamiltonianSpec", "Operator",
    "ReducedTrajectory", "SpaceSpec", "SymmetryReport", "UnitarySpec", "analytic_evolve", "axis_frame",
    "build", "check_symmetry", "constant_defect", "constant_defect_spectral", "env_state", "form_violation",
    "heisenberg_evolve", "leakage_check", "pauli", "realize", "reduce", "scan_constants", "space_of",
    "symmetry_defect", "trajectory",
]
