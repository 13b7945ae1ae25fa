"""Driven Dicke quantum-battery simulator.

N two-level atoms with distance-dependent flip-flop couplings in a driven,
truncated single-mode cavity: charging trajectories, power-law scaling fits
over the atom number, and the ground-state magnetization phase diagram.
"""

from dickeqb.analysis import (
    FitResult,
    MaxRecord,
    convergence_check,
    find_max,
    fit_linear,
    fit_power_law,
)
from dickeqb.dynamics import (
    PropagationConfig,
    Trajectory,
    oracle_propagate,
    propagate,
    step_magnus4,
)
from dickeqb.model import ModelParams, dipole_coupling, eta_matrix, initial_state
from dickeqb.observables import (
    GroundStateResult,
    charging_power,
    energy_fluctuation,
    ground_state,
    magnetization,
    stored_energy,
)
from dickeqb.operators import HilbertDims, SparseOperator, StateVector

__version__ = "0.1.0"

__all__ = [
    "FitResult",
    "GroundStateResult",
    "HilbertDims",
    "MaxRecord",
    "ModelParams",
    "PropagationConfig",
    "SparseOperator",
    "StateVector",
    "Trajectory",
    "charging_power",
    "convergence_check",
    "dipole_coupling",
    "energy_fluctuation",
    "eta_matrix",
    "find_max",
    "fit_linear",
    "fit_power_law",
    "ground_state",
    "initial_state",
    "magnetization",
    "oracle_propagate",
    "propagate",
    "step_magnus4",
    "stored_energy",
]
