"""Simulation and verification of a controlled quantum secure direct communication scheme.

The hot statevector kernels come from a compiled extension when it is built,
otherwise from a numpy fallback; ``cqsdc.BACKEND`` names the one in use.
"""
from .kernels import BACKEND
from .qstate import BellOutcome, QubitLabel, StateVector, basis_state, from_amplitudes, measure, tensor
from .channels import bell_decompose, bell_state, channel_state_p, ghz_like, x_basis_decompose
from .protocol import ProtocolAborted, SessionConfig, Transcript, run_session
from .adversary import AttackSpec, detection_probability_exact, estimate_detection
from .metrics import ProtocolCost, efficiency

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BellOutcome", "QubitLabel", "StateVector", "basis_state", "from_amplitudes",
    "measure", "tensor", "bell_decompose", "bell_state", "channel_state_p", "ghz_like",
    "x_basis_decompose", "ProtocolAborted", "SessionConfig", "Transcript", "run_session",
    "AttackSpec", "detection_probability_exact", "estimate_detection", "ProtocolCost", "efficiency",
]
