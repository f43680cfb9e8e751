"""Two qubits coupled to a lossy cavity: dynamics, entanglement and the MEMS boundary."""

from .errors import (
    ContractError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    MemsForgeError,
    NotPSDError,
    NumericalError,
    ParameterError,
    ShapeError,
    TruncationError,
    UnsupportedConfigurationError,
)
from .measures import (
    boundary_concurrence,
    boundary_gap,
    concurrence,
    cs_point,
    fidelity,
    linear_entropy,
    mems_boundary,
)
from .reduced import DynamicsParams, analytic_vacuum, generator_apply, integrate, steady_state
from .states import bit_phase_flip_q2, dephase_qubits, maximally_mixed, mems, werner

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "ConvergenceError",
    "DomainError",
    "DynamicsParams",
    "IntegrationError",
    "MemsForgeError",
    "NotPSDError",
    "NumericalError",
    "ParameterError",
    "ShapeError",
    "TruncationError",
    "UnsupportedConfigurationError",
    "analytic_vacuum",
    "bit_phase_flip_q2",
    "boundary_concurrence",
    "boundary_gap",
    "concurrence",
    "cs_point",
    "dephase_qubits",
    "fidelity",
    "generator_apply",
    "integrate",
    "linear_entropy",
    "maximally_mixed",
    "mems",
    "mems_boundary",
    "steady_state",
    "werner",
]
