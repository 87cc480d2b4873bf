"""Quadratic Wasserstein distances between finite-dimensional noncommutative
dynamical systems, computed as small semidefinite programs over Choi matrices."""

from .balance import ConstraintSet, assemble, same_feasible_set
from .cost import CostSpec, transport_cost
from .coupling import TransportPlan
from .qstate import FaithfulState, diag_state, make_state
from .solver import SolveReport, oracle_2x2, solve, wasserstein
from .systems import GenSystem, system, unitary_angle_system

__all__ = [
    "ConstraintSet", "CostSpec", "FaithfulState", "GenSystem", "SolveReport", "TransportPlan",
    "assemble", "diag_state", "make_state", "oracle_2x2", "same_feasible_set", "solve",
    "system", "transport_cost", "unitary_angle_system", "wasserstein",
]
