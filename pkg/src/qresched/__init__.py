"""Noise-aware rescheduling of mapped quantum circuits."""
from .circuit import Circuit, CircuitError, Gate, build_dependency_graph, build_layers, depth, gate_count
from .metrics import CalibrationData, CalibrationError, esp, load_calibration, wesp
from .qasm import QasmError, emit_qasm, parse_qasm
from .rescheduler import (
    RescheduleError,
    RescheduleResult,
    exhaustive_reschedule,
    lookahead_block_errors,
    reschedule_combined,
    reschedule_elementary,
    reschedule_zz,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationData",
    "CalibrationError",
    "Circuit",
    "CircuitError",
    "Gate",
    "QasmError",
    "RescheduleError",
    "RescheduleResult",
    "build_dependency_graph",
    "build_layers",
    "depth",
    "emit_qasm",
    "esp",
    "exhaustive_reschedule",
    "gate_count",
    "load_calibration",
    "lookahead_block_errors",
    "parse_qasm",
    "reschedule_combined",
    "reschedule_elementary",
    "reschedule_zz",
    "wesp",
]
